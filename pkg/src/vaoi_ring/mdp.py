"""Average-cost MDP for the device-to-connected-satellite link.

State ``(b, delta)``: battery level and VAoI at the connected satellite.
The per-transition cost is the successor's VAoI. Solved with relative value
iteration.
"""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .core import State, SystemParams, all_states, legal_actions, state_index
from .policies import PolicyTable, from_actions

REFERENCE_STATE = State(0, 0)


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class TransitionKernel:
    """Sparse kernel.

    ``rows[(s, a)]`` is a list of ``(successor, probability, cost)``. The
    padded arrays ``succ``, ``prob``, ``cost`` (shape ``(2, n_states, width)``)
    carry the same rows for vectorized sweeps; illegal pairs have all-zero
    probability and ``legal[a, s] = False``.
    """

    params: SystemParams
    rows: dict
    succ: np.ndarray
    prob: np.ndarray
    cost: np.ndarray
    legal: np.ndarray

    def row(self, state: State, action: int):
        return self.rows[(State(*state), action)]


def _battery_branches(b, a, params):
    beta, cap = params.p_energy, params.battery_capacity
    if a == 0:
        return [(min(b + 1, cap), beta), (b, 1.0 - beta)]
    return [(b, beta), (b - 1, 1.0 - beta)]


def _vaoi_branches(d, a, params):
    pg, ps, cap = params.p_generate, params.p_success, params.vaoi_cap
    up = min(d + 1, cap)
    if a == 0:
        return [(up, pg), (d, 1.0 - pg)]
    return [
        (up, pg * (1.0 - ps)),
        (d, (1.0 - pg) * (1.0 - ps)),
        (1, pg * ps),
        (0, (1.0 - pg) * ps),
    ]


def build_kernel(params: SystemParams) -> TransitionKernel:
    """Battery and VAoI evolve independently given ``(s, a)``; rows are their product."""
    rows = {}
    for s in all_states(params):
        for a in legal_actions(s):
            merged = defaultdict(float)
            for b2, pb in _battery_branches(s.battery, a, params):
                for d2, pd in _vaoi_branches(s.vaoi, a, params):
                    merged[State(b2, d2)] += pb * pd
            rows[(s, a)] = [(s2, p, float(s2.vaoi)) for s2, p in merged.items() if p > 0.0]

    n = params.n_states
    width = max(len(r) for r in rows.values())
    succ = np.zeros((2, n, width), dtype=np.int64)
    prob = np.zeros((2, n, width))
    cost = np.zeros((2, n, width))
    legal = np.zeros((2, n), dtype=bool)
    for (s, a), row in rows.items():
        i = state_index(s.battery, s.vaoi, params)
        legal[a, i] = True
        succ[a, i, :] = i
        for k, (s2, p, c) in enumerate(row):
            succ[a, i, k] = state_index(s2.battery, s2.vaoi, params)
            prob[a, i, k] = p
            cost[a, i, k] = c
    return TransitionKernel(params, rows, succ, prob, cost, legal)


def q_values(kernel: TransitionKernel, h: np.ndarray) -> np.ndarray:
    """``q[a, s] = sum P (C + h(s'))``; ``inf`` where ``a`` is illegal."""
    q = np.einsum("ask,ask->as", kernel.prob, kernel.cost + h[kernel.succ])
    return np.where(kernel.legal, q, np.inf)


def bellman_apply(kernel: TransitionKernel, h: np.ndarray):
    """One Bellman sweep. Returns ``(Th, greedy_actions)``; ties go to idle."""
    q = q_values(kernel, np.asarray(h, dtype=np.float64))
    actions = (q[1] < q[0]).astype(np.int64)
    return np.minimum(q[0], q[1]), actions


@dataclass
class SolverResult:
    policy: PolicyTable
    average_cost: float
    relative_values: np.ndarray
    iterations_used: int
    span_at_exit: float
    bounds: tuple[float, float] = field(default=(math.nan, math.nan))


def solve_rvia(
    kernel: TransitionKernel,
    tolerance: float = 1e-9,
    max_iterations: int = 100_000,
    reference_state: State = REFERENCE_STATE,
) -> SolverResult:
    """Relative value iteration.

    ``h <- Th - Th(ref)`` until ``span(Th - h) < tolerance``. The average cost
    is ``Th(ref)`` at exit and lies within ``[min(Th - h), max(Th - h)]``
    (returned as ``bounds``).
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    params = kernel.params
    ref = state_index(reference_state.battery, reference_state.vaoi, params)
    h = np.zeros(params.n_states)
    span = math.inf
    for it in range(1, max_iterations + 1):
        th, actions = bellman_apply(kernel, h)
        diff = th - h
        lo, hi = float(diff.min()), float(diff.max())
        span = hi - lo
        if span < tolerance:
            break
        h = th - th[ref]
    else:
        raise ConvergenceError(
            f"RVIA did not reach span < {tolerance:g} in {max_iterations} iterations "
            f"(span {span:.3g})"
        )
    shape = (params.battery_capacity + 1, params.vaoi_cap + 1)
    policy = from_actions(params, actions.reshape(shape), "optimal")
    return SolverResult(
        policy=policy,
        average_cost=float(th[ref]),
        relative_values=h.reshape(shape),
        iterations_used=it,
        span_at_exit=span,
        bounds=(lo, hi),
    )


def solve(params: SystemParams, tolerance: float = 1e-9, max_iterations: int = 100_000) -> SolverResult:
    return solve_rvia(build_kernel(params), tolerance, max_iterations)


def induced_chain(kernel: TransitionKernel, policy: PolicyTable):
    """Transition matrix and expected one-step cost of the chain under ``policy``."""
    n = kernel.params.n_states
    w1 = policy.transmit_probability.reshape(-1)
    w = np.where(kernel.legal, np.stack([1.0 - w1, w1]), 0.0)
    w /= w.sum(axis=0)
    P = np.zeros((n, n))
    rows = np.repeat(np.arange(n), kernel.succ.shape[2])
    for a in (0, 1):
        np.add.at(P, (rows, kernel.succ[a].reshape(-1)), (w[a][:, None] * kernel.prob[a]).reshape(-1))
    r = (w * np.einsum("ask,ask->as", kernel.prob, kernel.cost)).sum(axis=0)
    return P, r


def stationary_distribution(kernel: TransitionKernel, policy: PolicyTable) -> np.ndarray:
    """Stationary law over flat state indices; assumes a single recurrent class."""
    P, _ = induced_chain(kernel, policy)
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones(n)])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi = np.linalg.lstsq(A, rhs, rcond=None)[0]
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def stationary_cost(kernel: TransitionKernel, policy: PolicyTable) -> float:
    """Long-run average cost of a (possibly randomized) policy.

    Uses the stationary distribution of the induced chain directly,
    independent of value iteration.
    """
    _, r = induced_chain(kernel, policy)
    return float(stationary_distribution(kernel, policy) @ r)


INFINITE = math.inf


@dataclass
class Thresholds:
    """Per-battery switching points of a deterministic policy.

    ``values[b]`` is the smallest VAoI at which battery level ``b`` transmits
    (``inf`` if it never does). ``violations`` lists ``(b, delta)`` where an
    idle action follows a transmit action at lower VAoI.
    """

    values: list
    violations: list

    @property
    def is_threshold(self) -> bool:
        return not self.violations

    @property
    def non_increasing_in_battery(self) -> bool:
        v = self.values[1:]
        return all(x >= y for x, y in zip(v, v[1:]))


def extract_thresholds(policy: PolicyTable) -> Thresholds:
    actions = policy.actions()
    values, violations = [], []
    for b, row in enumerate(actions):
        on = np.flatnonzero(row)
        values.append(int(on[0]) if on.size else INFINITE)
        if on.size:
            for d in range(int(on[0]) + 1, row.size):
                if row[d] == 0:
                    violations.append((b, d))
    return Thresholds(values, violations)


def write_values_csv(path, result: SolverResult) -> None:
    h = result.relative_values
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["b", "delta", "h"])
        for b in range(h.shape[0]):
            for d in range(h.shape[1]):
                w.writerow([b, d, repr(float(h[b, d]))])


def write_thresholds_csv(path, thresholds: Thresholds) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["b", "threshold"])
        for b, t in enumerate(thresholds.values):
            w.writerow([b, "inf" if t == INFINITE else t])
