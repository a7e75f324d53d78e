"""Solver portfolio behind a single ``solve`` interface.

Four solvers share the dispatch: the coupled-laser-dynamics heuristic and
three classical baselines (simulated annealing, tabu search, parallel
tempering).  Every solver runs one trajectory from one random initial state,
is bit-reproducible given (model, config, seed), stops at ``target_energy``
or ``max_steps``, and reports the best energy ever visited.
"""
from __future__ import annotations

import datetime as _dt
import json
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from ..errors import UnknownSolver
from ..ising import IsingModel


@dataclass
class RunRecord:
    """One solver trajectory."""

    instance_label: str
    solver_id: str
    seed: int
    steps_executed: int
    success: bool
    best_energy: float
    step_of_solution: int | None
    wall_time: float
    step_unit: str
    timestamp: str = field(default_factory=lambda: _dt.datetime.now(
        _dt.timezone.utc).isoformat(timespec="seconds"))
    best_state: np.ndarray | None = field(default=None, repr=False, compare=False)
    extra: dict[str, Any] = field(default_factory=dict)

    def to_json(self, keep_state: bool = False) -> str:
        d = asdict(self)
        extra = d.pop("extra")
        state = d.pop("best_state")
        if keep_state and state is not None:
            d["best_state"] = [int(x) for x in state]
        d.update(extra)
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "RunRecord":
        d = json.loads(line)
        known = {f: d.pop(f) for f in (
            "instance_label", "solver_id", "seed", "steps_executed", "success",
            "best_energy", "step_of_solution", "wall_time", "step_unit",
            "timestamp") if f in d}
        state = d.pop("best_state", None)
        if state is not None:
            state = np.asarray(state, dtype=np.int8)
        return cls(**known, best_state=state, extra=d)


@dataclass(frozen=True)
class BaseConfig:
    max_steps: int = 100_000
    target_energy: float = 0.0


@dataclass(frozen=True)
class LaserConfig(BaseConfig):
    """Coupled-laser dynamics: saturable gain g0, coupling kappa, noise eta.

    ``g0=None``, ``kappa=None``, and ``detune=None`` each resolve to the
    calibration shipped with the package (kappa/detune per problem size).
    ``detune`` is the half-width of the static per-laser cavity detuning
    distribution; 0 disables the detuning rotation entirely (the bare
    feedback/noise/gain round trip).
    """

    g0: float | None = None
    kappa: float | None = None
    eta: float = 0.0
    init_scale: float = 0.1
    a_sat: float = 1.0
    detune: float | None = None

    solver_id = "laser"
    step_unit = "round_trip"


@dataclass(frozen=True)
class SimAnnealConfig(BaseConfig):
    """Metropolis sweeps over a geometric temperature ladder T_hi -> T_lo.

    ``T_hi=None`` applies the 2*max|J| heuristic at solve time.
    """

    T_hi: float | None = None
    T_lo: float = 0.1
    sweeps_per_temp: int = 1
    schedule: str = "geometric"

    solver_id = "sa"
    step_unit = "sweep"


@dataclass(frozen=True)
class TabuConfig(BaseConfig):
    tenure: int = 10
    aspiration: bool = True

    solver_id = "tabu"
    step_unit = "move"


@dataclass(frozen=True)
class ParTempConfig(BaseConfig):
    """Replica exchange; ``num_replicas=None`` -> max(4, log2 n)."""

    num_replicas: int | None = None
    T_hi: float | None = None
    T_lo: float = 0.1
    sweeps_between_swaps: int = 10

    solver_id = "pt"
    step_unit = "sweep"


SolverConfig = LaserConfig | SimAnnealConfig | TabuConfig | ParTempConfig

CONFIG_BY_NAME = {
    "laser": LaserConfig,
    "sa": SimAnnealConfig,
    "tabu": TabuConfig,
    "pt": ParTempConfig,
}


def config_for(name: str, **kwargs) -> SolverConfig:
    try:
        cls = CONFIG_BY_NAME[name]
    except KeyError:
        valid = ", ".join(sorted(CONFIG_BY_NAME))
        raise UnknownSolver(f"unknown solver '{name}' (valid: {valid})") from None
    return cls(**kwargs)


def trajectory_seed(master_seed: int, *indices: int) -> int:
    """Derive an independent 32-bit stream seed by SeedSequence spawning."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(indices))
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def solve(model: IsingModel, config: SolverConfig, seed: int,
          max_steps: int | None = None, target_energy: float | None = None,
          instance_label: str = "") -> RunRecord:
    """Run one trajectory of the solver selected by the config type."""
    from . import annealing, laser, tabu, tempering

    if isinstance(config, LaserConfig):
        run = laser.solve_laser
    elif isinstance(config, SimAnnealConfig):
        run = annealing.simulated_annealing
    elif isinstance(config, TabuConfig):
        run = tabu.tabu_search
    elif isinstance(config, ParTempConfig):
        run = tempering.parallel_tempering
    else:
        raise UnknownSolver(f"unsupported config type {type(config).__name__}")
    max_steps = config.max_steps if max_steps is None else max_steps
    target = config.target_energy if target_energy is None else target_energy
    return run(model, config, seed, max_steps, target, instance_label)
