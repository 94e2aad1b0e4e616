"""Monte Carlo simulation of the device link and of ring dissemination.

By default runs start cold: empty battery, zero VAoI, every satellite
holding the source's initial version. ``start="stationary"`` instead draws
the initial (battery, VAoI) from the policy's stationary law, which removes
the warm-up bias from time averages. Run ``i`` of seed ``s`` always uses
``make_streams(s, i)``, so the scalar simulators and the vectorized engine
behind :func:`evaluate_policy` produce identical trajectories.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import network
from .core import SlotStreams, State, SystemParams, draw_block, draw_slot, make_streams
from .mdp import build_kernel, stationary_distribution
from .policies import PolicyTable, act

COLD = State(0, 0)


def start_distribution(params: SystemParams, policy: PolicyTable, start):
    """Resolve ``start`` to a fixed ``State`` or a law over flat state indices."""
    if isinstance(start, str):
        if start == "cold":
            return COLD
        if start == "stationary":
            return stationary_distribution(build_kernel(params), policy)
        raise ValueError(f"unknown start {start!r}")
    if isinstance(start, tuple):
        return State(*start)
    return np.asarray(start, dtype=np.float64)


def initial_state(params: SystemParams, start, streams: SlotStreams) -> State:
    if isinstance(start, State):
        return start
    i = int(streams.init.choice(start.size, p=start))
    return State(*divmod(i, params.vaoi_cap + 1))


@dataclass
class LinkTrace:
    """Per-slot record of the device/CS link, slots ``0 .. T-1``.

    ``energy``, ``channel``, ``version`` are the slot-``t`` draws; the
    version drawn in slot ``t`` first counts at ``t + 1``.
    """

    battery: np.ndarray
    action: np.ndarray
    energy: np.ndarray
    channel: np.ndarray
    version: np.ndarray
    vaoi: np.ndarray

    def __len__(self):
        return len(self.vaoi)

    @property
    def version_increments(self) -> np.ndarray:
        inc = np.zeros_like(self.version)
        inc[1:] = self.version[:-1]
        return inc

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "b", "a", "e", "c", "z", "delta0"])
            cols = (self.battery, self.action, self.energy, self.channel, self.version, self.vaoi)
            for t, row in enumerate(zip(*cols)):
                w.writerow([t, *map(int, row)])


def simulate_link(
    params: SystemParams,
    policy: PolicyTable,
    streams: SlotStreams,
    start="cold",
) -> LinkTrace:
    T = params.horizon
    cols = {k: np.zeros(T, dtype=np.int64) for k in ("battery", "action", "energy", "channel", "version", "vaoi")}
    b, d = initial_state(params, start_distribution(params, policy, start), streams)
    for t in range(T):
        e, c, z = draw_slot(streams, params)
        a = act(policy, State(b, d), streams)
        for k, v in zip(cols, (b, a, e, c, z, d)):
            cols[k][t] = v
        d = z if (a and c) else min(d + z, params.vaoi_cap)
        b = min(b + e - a, params.battery_capacity)
    return LinkTrace(**cols)


@dataclass
class RingTrace:
    """Version counters of the source and of every satellite.

    ``node_version[t, j]`` belongs to node ``n = j - N/2``; node 0 is the CS.
    """

    source_version: np.ndarray
    node_version: np.ndarray
    link: LinkTrace

    @property
    def half_ring(self) -> int:
        return (self.node_version.shape[1] - 1) // 2

    @property
    def vaoi(self) -> np.ndarray:
        return self.source_version[:, None] - self.node_version

    def node_vaoi(self, n: int) -> np.ndarray:
        return self.vaoi[:, n + self.half_ring]


def _cs_next_version(v_cs, v_src, v_src_next, transmitted, vaoi_cap):
    # a successful update delivers the source version current at slot t;
    # content more than vaoi_cap versions stale is skipped
    v = v_src if transmitted else v_cs
    return max(v, v_src_next - vaoi_cap)


def simulate_ring(
    params: SystemParams,
    policy: PolicyTable,
    streams: SlotStreams,
    start="cold",
) -> RingTrace:
    """Flooding simulation over the bidirectional ring.

    Every slot each satellite sends its stored version to both neighbours;
    messages arrive one slot later and a node keeps the freshest version it
    has seen. The CS additionally takes deliveries from the device.
    """
    link = simulate_link(params, policy, streams, start)
    T, n_nodes, half = params.horizon, params.n_nodes, params.half_ring
    # ring position p holds node n = p for p <= N/2, n = p - (N + 1) otherwise
    column = [(p if p <= half else p - n_nodes) + half for p in range(n_nodes)]

    src = np.zeros(T, dtype=np.int64)
    stored = np.zeros((T, n_nodes), dtype=np.int64)
    v_src = int(link.vaoi[0])
    version = [0] * n_nodes
    for t in range(T):
        src[t] = v_src
        for p in range(n_nodes):
            stored[t, column[p]] = version[p]
        # messages sent during slot t are stored at t + 1
        inbox = [[] for _ in range(n_nodes)]
        if n_nodes > 1:
            for p in range(n_nodes):
                for q in {(p - 1) % n_nodes, (p + 1) % n_nodes}:
                    inbox[q].append(version[p])
        v_src_next = v_src + int(link.version[t])
        delivered = bool(link.action[t] and link.channel[t])
        inbox[0].append(_cs_next_version(version[0], v_src, v_src_next, delivered, params.vaoi_cap))
        version = [max(version[p], *inbox[p]) if inbox[p] else version[p] for p in range(n_nodes)]
        v_src = v_src_next
    return RingTrace(src, stored, link)


def _se(x: np.ndarray):
    return np.std(x, axis=0, ddof=1) / np.sqrt(x.shape[0])


@dataclass
class MetricsSummary:
    """Monte Carlo means and standard errors over independent runs.

    ``network`` is the brute-force ring average; ``network_exact`` and
    ``network_approx`` evaluate the analytic formulas on the same CS traces.
    ``updates`` is the mean number of transmission attempts per run and
    ``energy`` the mean number of energy units consumed per run.
    ``runs["shifted"][:, m]`` holds each run's CS time average shifted by
    ``m`` slots.
    """

    policy: str
    params: SystemParams
    cs_mean: float
    cs_se: float
    network_exact_mean: float
    network_exact_se: float
    network_approx_mean: float
    network_approx_se: float
    updates: float
    energy: float
    node_mean: np.ndarray | None = None
    node_se: np.ndarray | None = None
    network_mean: float = float("nan")
    network_se: float = float("nan")
    runs: dict = field(default_factory=dict, repr=False)


def simulate_batch(
    params: SystemParams,
    policy: PolicyTable,
    runs: range,
    start="cold",
    track_nodes: bool = True,
) -> dict:
    """Vectorized simulation of the given run indices.

    Returns per-run arrays: ``cs_trace`` (runs x T), ``node_sum`` (runs x
    (N+1), summed node VAoI, columns ordered ``n = -N/2 .. N/2``),
    ``updates``, ``energy``.
    """
    T, M = params.horizon, len(runs)
    e = np.empty((M, T), dtype=bool)
    c = np.empty((M, T), dtype=bool)
    z = np.empty((M, T), dtype=bool)
    u = np.empty((M, T))
    b = np.empty(M, dtype=np.int64)
    d = np.empty(M, dtype=np.int64)
    law = start_distribution(params, policy, start)
    for i, r in enumerate(runs):
        s = make_streams(params.rng_seed, r)
        b[i], d[i] = initial_state(params, law, s)
        e[i], c[i], z[i] = draw_block(s, params, T)
        u[i] = s.policy.random(T)

    table = policy.transmit_probability
    cs_trace = np.empty((M, T), dtype=np.int64)
    updates = np.zeros(M, dtype=np.int64)

    n_nodes, half = params.n_nodes, params.half_ring
    if track_nodes:
        v_src = d.copy()
        ver = np.zeros((M, n_nodes), dtype=np.int64)
        node_sum = np.zeros((M, n_nodes), dtype=np.int64)

    for t in range(T):
        cs_trace[:, t] = d
        a = (u[:, t] < table[b, d]) & (b > 0)
        ok = a & c[:, t]
        zt = z[:, t].astype(np.int64)
        if track_nodes:
            node_sum += v_src[:, None] - ver
            nxt = ver.copy()
            if n_nodes > 1:
                np.maximum(nxt[:, 1:], ver[:, :-1], out=nxt[:, 1:])
                np.maximum(nxt[:, :-1], ver[:, 1:], out=nxt[:, :-1])
                np.maximum(nxt[:, 0], ver[:, -1], out=nxt[:, 0])
                np.maximum(nxt[:, -1], ver[:, 0], out=nxt[:, -1])
            v_next = v_src + zt
            cs = np.maximum(np.where(ok, v_src, ver[:, 0]), v_next - params.vaoi_cap)
            np.maximum(nxt[:, 0], cs, out=nxt[:, 0])
            ver, v_src = nxt, v_next
        d = np.where(ok, zt, np.minimum(d + zt, params.vaoi_cap))
        b = np.minimum(b + e[:, t] - a, params.battery_capacity)
        updates += a

    out = {"cs_trace": cs_trace, "updates": updates, "energy": updates.copy()}
    if track_nodes:
        # ring position p -> column of node n
        cols = np.array([(p if p <= half else p - n_nodes) + half for p in range(n_nodes)])
        ordered = np.empty_like(node_sum)
        ordered[:, cols] = node_sum
        out["node_sum"] = ordered
    return out


def evaluate_policy(
    params: SystemParams,
    policy: PolicyTable,
    start="cold",
    track_nodes: bool = True,
    chunk: int = 250,
) -> MetricsSummary:
    """Average VAoI of ``policy`` over ``params.mc_iterations`` runs.

    ``track_nodes=False`` skips the ring flooding and reports only the CS
    statistics and the analytic network averages.
    """
    M, T = params.mc_iterations, params.horizon
    if M < 2:
        raise ValueError("evaluate_policy needs mc_iterations >= 2 for standard errors")
    parts = {k: [] for k in ("shifted", "exact", "updates", "energy", "nodes")}
    law = start_distribution(params, policy, start)
    for first in range(0, M, chunk):
        out = simulate_batch(params, policy, range(first, min(first + chunk, M)), law, track_nodes)
        trace = out["cs_trace"]
        parts["shifted"].append(
            np.stack([network.shifted_time_average(trace, m) for m in range(params.half_ring + 1)], axis=1)
        )
        parts["exact"].append(network.network_avg_exact(trace, params))
        parts["updates"].append(out["updates"])
        parts["energy"].append(out["energy"])
        if track_nodes:
            parts["nodes"].append(out["node_sum"] / T)
    runs = {k: np.concatenate(v) for k, v in parts.items() if v}
    runs["cs"] = runs["shifted"][:, 0]
    runs["approx"] = network.network_avg_approx(runs["cs"], params)

    summary = MetricsSummary(
        policy=policy.name,
        params=params,
        cs_mean=float(runs["cs"].mean()),
        cs_se=float(_se(runs["cs"])),
        network_exact_mean=float(runs["exact"].mean()),
        network_exact_se=float(_se(runs["exact"])),
        network_approx_mean=float(runs["approx"].mean()),
        network_approx_se=float(_se(runs["approx"])),
        updates=float(runs["updates"].mean()),
        energy=float(runs["energy"].mean()),
        runs=runs,
    )
    if track_nodes:
        nodes = runs["nodes"]
        runs["network"] = nodes.mean(axis=1)
        summary.node_mean = nodes.mean(axis=0)
        summary.node_se = _se(nodes)
        summary.network_mean = float(runs["network"].mean())
        summary.network_se = float(_se(runs["network"]))
    return summary


METRICS_HEADER = [
    "policy", "beta", "alpha", "avg_vaoi_cs", "avg_vaoi_network", "se",
    "updates", "energy", "cs_se", "avg_vaoi_network_exact", "avg_vaoi_network_approx",
]


def metrics_row(summary: MetricsSummary, alpha=None) -> list:
    """One metrics CSV row.

    ``avg_vaoi_network``/``se`` come from the ring simulation when it was
    tracked, else from the exact formula.
    """
    if np.isnan(summary.network_mean):
        net, se = summary.network_exact_mean, summary.network_exact_se
    else:
        net, se = summary.network_mean, summary.network_se
    return [
        summary.policy,
        summary.params.p_energy,
        "" if alpha is None else alpha,
        summary.cs_mean,
        net,
        se,
        summary.updates,
        summary.energy,
        summary.cs_se,
        summary.network_exact_mean,
        summary.network_approx_mean,
    ]


def node_rows(summary: MetricsSummary) -> list[tuple[int, float, float]]:
    """Per-node ``(n, exact, approx)`` averages from the run means."""
    params = summary.params
    shifted = summary.runs["shifted"].mean(axis=0)
    return [
        (
            n,
            float(network.avg_vaoi_node(shifted[abs(n)], n, params)),
            float(network.avg_vaoi_node(shifted[0], n, params)),
        )
        for n in network.node_indices(params)
    ]


def write_metrics_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(METRICS_HEADER)
        w.writerows(rows)
