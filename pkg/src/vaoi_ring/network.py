"""Analytic VAoI over the ring.

A node ``|n|`` hops from the connected satellite (CS) holds the CS's content
from ``|n|`` slots earlier, so its VAoI is the CS VAoI shifted by ``|n|``
slots plus the number of versions the source generated in between.

Time conventions shared with :mod:`vaoi_ring.sim`:

* traces cover slots ``0 .. T-1``;
* for ``t < 0`` the CS VAoI equals its slot-0 value and no versions are
  generated;
* ``version_increments[t] = V_S(t) - V_S(t - 1)`` (so ``version_increments[0] = 0``).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .core import ParamError, SystemParams


@dataclass(frozen=True)
class BinomialShift:
    """Versions generated during ``hops`` slots: ``Bin(hops, p)``."""

    hops: int
    p: float

    @property
    def mean(self) -> float:
        return self.hops * self.p

    @property
    def support(self) -> range:
        return range(self.hops + 1)

    def pmf(self, k: int) -> float:
        if k not in self.support:
            return 0.0
        return math.comb(self.hops, k) * self.p**k * (1.0 - self.p) ** (self.hops - k)


def node_indices(params: SystemParams) -> range:
    return range(-params.half_ring, params.half_ring + 1)


def _check_node(node: int, params: SystemParams | None):
    if params is not None and abs(node) > params.half_ring:
        raise ParamError(f"node {node} outside -{params.half_ring}..{params.half_ring}")


def shift(trace: np.ndarray, hops: int) -> np.ndarray:
    """``out[..., t] = trace[..., max(t - hops, 0)]`` (constant warm start)."""
    trace = np.asarray(trace)
    if hops == 0:
        return trace.copy()
    T = trace.shape[-1]
    idx = np.maximum(np.arange(T) - hops, 0)
    return trace[..., idx]


def node_vaoi_from_cs(cs_trace, node: int, version_increments, params: SystemParams | None = None) -> np.ndarray:
    """VAoI trace of ring node ``node`` reconstructed from the CS trace.

    ``out[t] = sum(version_increments[t-|n|+1 .. t]) + cs_trace[t-|n|]``,
    with the pre-history conventions of this module.
    """
    _check_node(node, params)
    m = abs(node)
    cs = np.asarray(cs_trace)
    inc = np.asarray(version_increments, dtype=np.int64)
    if cs.shape != inc.shape:
        raise ValueError("cs_trace and version_increments must have the same shape")
    if m == 0:
        return cs.copy()
    total = np.cumsum(inc, axis=-1)
    lagged = np.zeros_like(total)
    lagged[..., m:] = total[..., :-m]
    return (total - lagged) + shift(cs, m)


def shifted_time_average(cs_trace, hops: int):
    """``(1/T) sum_{t=0}^{T-1} cs_trace[t - hops]`` with the warm-start convention.

    Integer traces are summed exactly; float traces use ``math.fsum``.
    Works row-wise on 2-D input.
    """
    cs = np.asarray(cs_trace)
    T = cs.shape[-1]
    head = min(hops, T)
    if np.issubdtype(cs.dtype, np.integer):
        tail = cs[..., : T - head].astype(np.int64).sum(axis=-1)
        return (head * cs[..., 0].astype(np.int64) + tail) / T
    if cs.ndim == 1:
        return math.fsum([head * float(cs[0]), *cs[: T - head].tolist()]) / T
    return np.array([shifted_time_average(row, hops) for row in cs])


def avg_vaoi_node(cs_time_avg, node: int, params: SystemParams):
    """Average VAoI at ``node`` given the (shifted or plain) CS time average."""
    _check_node(node, params)
    return abs(node) * params.p_generate + cs_time_avg


def network_constant(params: SystemParams) -> float:
    """Mean hop distance times ``p_g``: ``N (N + 2) / (4 (N + 1)) * p_g``."""
    N = params.N
    return N * (N + 2) / (4 * (N + 1)) * params.p_generate


def network_avg_exact(cs_trace, params: SystemParams):
    """Network average VAoI using the per-node shifted CS time averages."""
    per_shift = [shifted_time_average(cs_trace, m) for m in range(params.half_ring + 1)]
    # hop 0 occurs once, every other hop distance twice
    shifted = per_shift[0] + 2 * sum(per_shift[1:], start=0 * per_shift[0])
    return network_constant(params) + shifted / params.n_nodes


def network_avg_approx(cs_time_avg, params: SystemParams):
    """Large-horizon form: every shifted average replaced by the plain one."""
    return network_constant(params) + cs_time_avg


def relative_error(exact, approx):
    return np.abs(np.asarray(approx) - np.asarray(exact)) / np.abs(np.asarray(exact))


def per_node_averages(cs_trace, params: SystemParams) -> list[tuple[int, float, float]]:
    """Rows ``(n, exact, approx)`` for every ring node, from one or many traces.

    For 2-D input (runs x slots) the run means are reported.
    """
    plain = float(np.mean(shifted_time_average(cs_trace, 0)))
    rows = []
    for n in node_indices(params):
        exact = float(np.mean(shifted_time_average(cs_trace, abs(n))))
        rows.append((n, avg_vaoi_node(exact, n, params), avg_vaoi_node(plain, n, params)))
    return rows


def write_nodes_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "avg_vaoi_exact", "avg_vaoi_approx"])
        for n, exact, approx in rows:
            w.writerow([n, repr(exact), repr(approx)])
