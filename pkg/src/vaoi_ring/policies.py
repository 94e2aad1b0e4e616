"""Stationary update policies over the (battery, VAoI) state space."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import ParamError, SlotStreams, State, SystemParams, check_state


@dataclass(frozen=True, eq=False)
class PolicyTable:
    """Transmit probability for every state, shape ``(B + 1, delta_max + 1)``.

    Row ``b = 0`` is forced to zero: an empty battery cannot transmit.
    """

    params: SystemParams
    transmit_probability: np.ndarray
    name: str = "policy"

    def __post_init__(self):
        p = np.array(self.transmit_probability, dtype=np.float64)
        shape = (self.params.battery_capacity + 1, self.params.vaoi_cap + 1)
        if p.shape != shape:
            raise ParamError(f"policy table has shape {p.shape}, expected {shape}")
        if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
            raise ParamError("transmit probabilities must lie in [0, 1]")
        p[0, :] = 0.0
        p.setflags(write=False)
        object.__setattr__(self, "transmit_probability", p)

    @property
    def deterministic(self) -> bool:
        p = self.transmit_probability
        return bool(np.all((p == 0) | (p == 1)))

    def actions(self) -> np.ndarray:
        if not self.deterministic:
            raise ValueError(f"{self.name} is randomized")
        return self.transmit_probability.astype(np.int64)

    def renamed(self, name: str) -> "PolicyTable":
        return PolicyTable(self.params, self.transmit_probability, name)

    def __getitem__(self, state) -> float:
        b, d = state
        return float(self.transmit_probability[b, d])

    def __eq__(self, other):
        if not isinstance(other, PolicyTable):
            return NotImplemented
        return self.params == other.params and np.array_equal(
            self.transmit_probability, other.transmit_probability
        )


def from_actions(params: SystemParams, actions, name: str = "policy") -> PolicyTable:
    return PolicyTable(params, np.asarray(actions, dtype=np.float64), name)


def greedy_policy(params: SystemParams) -> PolicyTable:
    """Transmit whenever the battery is nonempty."""
    table = np.ones((params.battery_capacity + 1, params.vaoi_cap + 1))
    return PolicyTable(params, table, "greedy")


def rs_policy(params: SystemParams, alpha: float) -> PolicyTable:
    """Randomized stationary policy: transmit w.p. ``alpha`` if the battery is nonempty."""
    if not 0.0 <= alpha <= 1.0:
        raise ParamError(f"alpha must lie in [0, 1], got {alpha}")
    table = np.full((params.battery_capacity + 1, params.vaoi_cap + 1), float(alpha))
    return PolicyTable(params, table, f"rs({alpha:g})")


def idle_policy(params: SystemParams) -> PolicyTable:
    return rs_policy(params, 0.0).renamed("idle")


def act(policy: PolicyTable, state: State, streams: SlotStreams) -> int:
    """Sample the action at ``state``.

    Exactly one policy draw is consumed per call, also at ``b = 0`` and for
    deterministic tables, so runs stay aligned across policies.
    """
    check_state(state, policy.params)
    u = streams.policy.random()
    if state.battery == 0:
        return 0
    return int(u < policy.transmit_probability[state.battery, state.vaoi])


def write_policy_csv(path, policy: PolicyTable) -> None:
    """Rows ``b, delta, action``; randomized tables add a ``probability`` column."""
    p = policy.transmit_probability
    randomized = not policy.deterministic
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["b", "delta", "action"] + (["probability"] if randomized else []))
        for b in range(p.shape[0]):
            for d in range(p.shape[1]):
                row = [b, d, int(p[b, d] >= 0.5)]
                if randomized:
                    row.append(repr(float(p[b, d])))
                w.writerow(row)


def read_policy_csv(path, params: SystemParams, name: str = "policy") -> PolicyTable:
    table = np.zeros((params.battery_capacity + 1, params.vaoi_cap + 1))
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            b, d = int(row["b"]), int(row["delta"])
            table[b, d] = float(row["probability"]) if "probability" in row else float(row["action"])
    return PolicyTable(params, table, name)
