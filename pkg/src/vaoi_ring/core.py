"""Shared domain types, parameter validation and random streams."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, NamedTuple

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib


class ParamError(ValueError):
    pass


@dataclass(frozen=True)
class SystemParams:
    """Scenario constants.

    The ring has ``n_ring_nodes_minus_one + 1`` satellites indexed by signed
    hop offset ``-N/2 .. N/2`` around the connected satellite (offset 0).
    Defaults are the values used for every numerical study unless overridden.
    """

    n_ring_nodes_minus_one: int = 64
    p_generate: float = 0.3
    p_success: float = 0.5
    p_energy: float = 0.1
    battery_capacity: int = 20
    vaoi_cap: int = 30
    horizon: int = 3000
    mc_iterations: int = 2000
    rng_seed: int = 0

    def __post_init__(self):
        _check_int(self, "n_ring_nodes_minus_one", 0)
        if self.n_ring_nodes_minus_one % 2:
            raise ParamError(f"N must be even, got {self.n_ring_nodes_minus_one}")
        for name in ("p_generate", "p_success", "p_energy"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ParamError(f"{name} must be a number, got {value!r}")
            if not 0.0 <= value <= 1.0:
                raise ParamError(f"{name} must lie in [0, 1], got {value}")
            object.__setattr__(self, name, float(value))
        if self.p_success == 0.0:
            raise ParamError("degenerate channel: p_success must be > 0")
        _check_int(self, "battery_capacity", 1)
        _check_int(self, "vaoi_cap", 1)
        _check_int(self, "horizon", 1)
        _check_int(self, "mc_iterations", 1)
        _check_int(self, "rng_seed", None)

    @property
    def N(self) -> int:
        return self.n_ring_nodes_minus_one

    @property
    def n_nodes(self) -> int:
        return self.n_ring_nodes_minus_one + 1

    @property
    def half_ring(self) -> int:
        return self.n_ring_nodes_minus_one // 2

    @property
    def n_states(self) -> int:
        return (self.battery_capacity + 1) * (self.vaoi_cap + 1)

    def replace(self, **changes) -> "SystemParams":
        return dataclasses.replace(self, **changes)


def _check_int(params, name, lower):
    value = getattr(params, name)
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ParamError(f"{name} must be an integer, got {value!r}")
    if lower is not None and value < lower:
        raise ParamError(f"{name} must be >= {lower}, got {value}")
    object.__setattr__(params, name, int(value))


class State(NamedTuple):
    battery: int
    vaoi: int


def state_index(battery, vaoi, params: SystemParams):
    """Flat index of ``(battery, vaoi)``; row-major over battery. Works on arrays."""
    return battery * (params.vaoi_cap + 1) + vaoi


def all_states(params: SystemParams) -> list[State]:
    return [
        State(b, d)
        for b in range(params.battery_capacity + 1)
        for d in range(params.vaoi_cap + 1)
    ]


def check_state(state: State, params: SystemParams) -> None:
    if not (0 <= state.battery <= params.battery_capacity and 0 <= state.vaoi <= params.vaoi_cap):
        raise ParamError(f"state {tuple(state)} outside the state space")


def legal_actions(state: State) -> tuple[int, ...]:
    return (0,) if state.battery == 0 else (0, 1)


# config key -> SystemParams field
CONFIG_KEYS = {
    "ring.N": "n_ring_nodes_minus_one",
    "source.p_g": "p_generate",
    "link.p_s": "p_success",
    "energy.beta": "p_energy",
    "device.B": "battery_capacity",
    "mdp.delta_max": "vaoi_cap",
    "sim.T": "horizon",
    "sim.iterations": "mc_iterations",
    "sim.seed": "rng_seed",
}


def validate_params(raw: Mapping[str, Any]) -> SystemParams:
    """Build a validated ``SystemParams`` from a parameter record.

    ``raw`` may use either field names (``p_energy``) or dotted config keys
    (``energy.beta``); missing entries fall back to the defaults.
    """
    fields = {f.name for f in dataclasses.fields(SystemParams)}
    kwargs = {}
    for key, value in raw.items():
        name = CONFIG_KEYS.get(key, key)
        if name not in fields:
            raise ParamError(f"unknown parameter {key!r}")
        kwargs[name] = value
    return SystemParams(**kwargs)


def flatten(tree: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    out = {}
    for key, value in tree.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, Mapping):
            out.update(flatten(value, dotted + "."))
        else:
            out[dotted] = value
    return out


def load_config(path) -> tuple[SystemParams, dict[str, Any]]:
    """Read a TOML config; return the parameters and the remaining keys.

    Parameter keys are the dotted names in ``CONFIG_KEYS``. Everything else
    (sweep grids, solver settings) is returned flat for the caller.
    """
    with open(Path(path), "rb") as fh:
        flat = flatten(tomllib.load(fh))
    raw = {k: v for k, v in flat.items() if k in CONFIG_KEYS}
    extra = {k: v for k, v in flat.items() if k not in CONFIG_KEYS}
    return validate_params(raw), extra


class BernoulliDraws(NamedTuple):
    energy: int
    channel: int
    version: int


@dataclass
class SlotStreams:
    """Independent generators for one Monte Carlo run.

    Each random process owns its generator, so e.g. swapping the policy does
    not change the energy, channel or version sequences of a run. ``init``
    is only used to sample a random initial state.
    """

    energy: np.random.Generator
    channel: np.random.Generator
    version: np.random.Generator
    policy: np.random.Generator
    init: np.random.Generator


def make_streams(seed: int, run: int = 0) -> SlotStreams:
    """Streams for run ``run`` of seed ``seed``; independent of the run count."""
    gens = [
        np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(run, k))))
        for k in range(5)
    ]
    return SlotStreams(*gens)


def draw_slot(streams: SlotStreams, params: SystemParams) -> BernoulliDraws:
    return BernoulliDraws(
        int(streams.energy.random() < params.p_energy),
        int(streams.channel.random() < params.p_success),
        int(streams.version.random() < params.p_generate),
    )


def draw_block(streams: SlotStreams, params: SystemParams, n_slots: int):
    """``n_slots`` consecutive draws as three bool arrays.

    Consumes the streams exactly like ``n_slots`` calls of ``draw_slot``.
    """
    e = streams.energy.random(n_slots) < params.p_energy
    c = streams.channel.random(n_slots) < params.p_success
    z = streams.version.random(n_slots) < params.p_generate
    return e, c, z
