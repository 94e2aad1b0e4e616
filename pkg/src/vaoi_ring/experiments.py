"""Experiment drivers behind the command line verbs.

Each ``run_*`` function takes an :class:`ExperimentSpec`, writes its CSV
files under ``spec.out`` and returns the rows it wrote.
"""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import mdp, network, sim
from .core import ParamError, SystemParams, load_config, validate_params
from .policies import greedy_policy, rs_policy, write_policy_csv

log = logging.getLogger(__name__)

KINDS = ("solve", "structure", "beta-sweep", "horizon-error", "evaluate")

DEFAULT_BETAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
DEFAULT_ALPHAS = (0.1, 0.2, 0.3)
# multiples of N
DEFAULT_HORIZON_FACTORS = (0.5, 1, 2, 5, 10, 20, 50, 100)


@dataclass
class ExperimentSpec:
    kind: str
    params: SystemParams = field(default_factory=SystemParams)
    betas: tuple = DEFAULT_BETAS
    alphas: tuple = DEFAULT_ALPHAS
    horizons: tuple = ()
    out: Path = Path(".")
    tolerance: float = 1e-9
    max_iterations: int = 100_000
    start: str = "cold"
    policy: str = "optimal"
    alpha: float = 0.3
    workers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParamError(f"unknown experiment kind {self.kind!r}")
        self.out = Path(self.out)
        if not self.horizons:
            n = max(self.params.N, 2)
            self.horizons = tuple(max(1, int(f * n)) for f in DEFAULT_HORIZON_FACTORS)
        grids = {"beta-sweep": ("betas", "alphas"), "horizon-error": ("horizons",)}
        for name in grids.get(self.kind, ()):
            if len(getattr(self, name)) == 0:
                raise ParamError(f"{name} grid must be non-empty for {self.kind}")
        # every grid value must give valid parameters
        for beta in self.betas:
            self.params.replace(p_energy=beta)
        for T in self.horizons:
            self.params.replace(horizon=T)
        for alpha in (*self.alphas, self.alpha):
            rs_policy(self.params, alpha)
        if self.policy not in ("optimal", "greedy", "rs"):
            raise ParamError(f"unknown policy {self.policy!r}")


# config key -> ExperimentSpec field
SPEC_KEYS = {
    "sweep.betas": "betas",
    "sweep.alphas": "alphas",
    "sweep.horizons": "horizons",
    "sweep.workers": "workers",
    "solver.tolerance": "tolerance",
    "solver.max_iterations": "max_iterations",
    "sim.start": "start",
    "evaluate.policy": "policy",
    "evaluate.alpha": "alpha",
}


def spec_from_config(kind: str, config=None, out=".", **overrides) -> ExperimentSpec:
    if config is None:
        params, extra = validate_params({}), {}
    else:
        params, extra = load_config(config)
    kwargs = {}
    for key, value in extra.items():
        if key not in SPEC_KEYS:
            raise ParamError(f"unknown config key {key!r}")
        name = SPEC_KEYS[key]
        kwargs[name] = tuple(value) if isinstance(value, list) else value
    kwargs.update(overrides)
    return ExperimentSpec(kind=kind, params=params, out=Path(out), **kwargs)


def _write(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _solve(spec: ExperimentSpec, params: SystemParams) -> mdp.SolverResult:
    return mdp.solve_rvia(mdp.build_kernel(params), spec.tolerance, spec.max_iterations)


def run_solve(spec: ExperimentSpec) -> dict:
    """Optimal policy, value function and a one-row summary."""
    params = spec.params
    result = _solve(spec, params)
    spec.out.mkdir(parents=True, exist_ok=True)
    write_policy_csv(spec.out / "policy.csv", result.policy)
    mdp.write_values_csv(spec.out / "values.csv", result)
    row = [
        params.p_energy,
        result.average_cost,
        network.network_avg_approx(result.average_cost, params),
        result.iterations_used,
        result.span_at_exit,
    ]
    _write(spec.out / "solve.csv", ["beta", "avg_vaoi_cs", "avg_vaoi_network_approx", "iterations", "span"], [row])
    log.info("beta=%g average cost %.6f after %d iterations", params.p_energy, result.average_cost, result.iterations_used)
    return {"result": result, "summary": row}


def run_structure(spec: ExperimentSpec) -> dict:
    result = _solve(spec, spec.params)
    thresholds = mdp.extract_thresholds(result.policy)
    spec.out.mkdir(parents=True, exist_ok=True)
    write_policy_csv(spec.out / "structure.csv", result.policy)
    mdp.write_thresholds_csv(spec.out / "thresholds.csv", thresholds)
    if not thresholds.is_threshold:
        log.warning("policy is not threshold-type; violations at %s", thresholds.violations)
    return {"result": result, "thresholds": thresholds}


def _sweep_point(spec: ExperimentSpec, beta: float) -> list:
    params = spec.params.replace(p_energy=beta)
    rows = []
    optimal = _solve(spec, params).policy
    for policy, alpha in [(optimal, None), (greedy_policy(params), None)] + [
        (rs_policy(params, a), a) for a in spec.alphas
    ]:
        summary = sim.evaluate_policy(params, policy, start=spec.start)
        rows.append(sim.metrics_row(summary, alpha))
        log.info("beta=%g %s: network %.4f (se %.4f)", beta, policy.name, rows[-1][4], rows[-1][5])
    return rows


def run_beta_sweep(spec: ExperimentSpec) -> list:
    """Optimal (re-solved per beta), greedy and RS(alpha) over the beta grid."""
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            chunks = list(pool.map(_sweep_point, [spec] * len(spec.betas), spec.betas))
    else:
        chunks = [_sweep_point(spec, beta) for beta in spec.betas]
    rows = [row for chunk in chunks for row in chunk]
    spec.out.mkdir(parents=True, exist_ok=True)
    sim.write_metrics_csv(spec.out / "beta_sweep.csv", rows)
    return rows


HORIZON_HEADER = [
    "T", "network_avg_exact", "network_avg_approx", "error_pct", "exact_se", "approx_se", "T_over_N",
]


def run_horizon_error(spec: ExperimentSpec) -> list:
    """Exact vs large-horizon network VAoI of the optimal policy for each T."""
    policy = _solve(spec, spec.params).policy
    rows = []
    for T in spec.horizons:
        params = spec.params.replace(horizon=T)
        s = sim.evaluate_policy(params, policy, start=spec.start, track_nodes=False)
        err = 100.0 * float(network.relative_error(s.network_exact_mean, s.network_approx_mean))
        rows.append([
            T, s.network_exact_mean, s.network_approx_mean, err,
            s.network_exact_se, s.network_approx_se, T / max(params.N, 1),
        ])
        log.info("T=%d exact %.4f approx %.4f error %.2f%%", T, rows[-1][1], rows[-1][2], err)
    _write(spec.out / "horizon_error.csv", HORIZON_HEADER, rows)
    return rows


def run_evaluate(spec: ExperimentSpec) -> dict:
    params = spec.params
    alpha = None
    if spec.policy == "optimal":
        policy = _solve(spec, params).policy
    elif spec.policy == "greedy":
        policy = greedy_policy(params)
    else:
        alpha = spec.alpha
        policy = rs_policy(params, alpha)
    summary = sim.evaluate_policy(params, policy, start=spec.start)
    spec.out.mkdir(parents=True, exist_ok=True)
    sim.write_metrics_csv(spec.out / "metrics.csv", [sim.metrics_row(summary, alpha)])
    network.write_nodes_csv(spec.out / "nodes.csv", sim.node_rows(summary))
    return {"summary": summary}


RUNNERS = {
    "solve": run_solve,
    "structure": run_structure,
    "beta-sweep": run_beta_sweep,
    "horizon-error": run_horizon_error,
    "evaluate": run_evaluate,
}


def run(spec: ExperimentSpec):
    return RUNNERS[spec.kind](spec)
