"""Experiment orchestration and the Eq.-2 time-to-solution estimator.

TTS(t_f) = t_f * ln(0.01) / ln(1 - p_i(t_f)) per instance, aggregated by the
arithmetic mean over instances (an unsolved instance makes the aggregate
infinite at that cutoff), minimized over a cutoff grid.
"""
from __future__ import annotations

import configparser
import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, EmptyGrid, NoRecords, PlanInvalid
from .ising import xorsat_to_ising
from .solvers import CONFIG_BY_NAME, RunRecord, solve, trajectory_seed
from .xorsat import generate_3r3x

LN_001 = math.log(0.01)


def tts_single(t_f: float, p: float) -> float:
    """Eq. 2 for one instance; p=0 -> inf, p>=0.99 clamps to t_f."""
    if t_f <= 0:
        raise DomainError(f"t_f must be positive, got {t_f}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0,1], got {p}")
    if p == 0.0:
        return math.inf
    if p >= 0.99:
        return float(t_f)
    return t_f * LN_001 / math.log(1.0 - p)


def estimate_success(records: list[RunRecord], t_f: float) -> float:
    """Fraction of restarts solved by cutoff t_f (capped runs count as failures)."""
    if not records:
        raise NoRecords("cannot estimate success from zero records")
    solved = sum(1 for r in records
                 if r.success and r.step_of_solution is not None
                 and r.step_of_solution <= t_f)
    return solved / len(records)


@dataclass(frozen=True)
class TtsCurve:
    grid: np.ndarray               # (G,)
    instance_labels: tuple[str, ...]
    per_instance_p: np.ndarray     # (I, G)
    per_instance_tts: np.ndarray   # (I, G)
    aggregate: np.ndarray          # (G,)
    tf_star: float
    optimal_tts: float

    def mean_p_at_optimum(self) -> float:
        g = int(np.argmin(self.aggregate))
        return float(self.per_instance_p[:, g].mean())


def optimal_tts(records_by_instance: dict[str, list[RunRecord]],
                grid: np.ndarray | list[float]) -> TtsCurve:
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise EmptyGrid("cutoff grid is empty")
    if (np.diff(grid) <= 0).any() or grid[0] <= 0:
        raise DomainError("cutoff grid must be positive and strictly increasing")
    labels = tuple(records_by_instance)
    if not labels or all(not v for v in records_by_instance.values()):
        raise NoRecords("no run records supplied")
    n_i, n_g = len(labels), grid.size
    p = np.zeros((n_i, n_g))
    tts = np.zeros((n_i, n_g))
    for i, label in enumerate(labels):
        recs = records_by_instance[label]
        for g in range(n_g):
            p[i, g] = estimate_success(recs, grid[g])
            tts[i, g] = tts_single(grid[g], p[i, g])
    aggregate = tts.mean(axis=0)
    g_star = int(np.argmin(aggregate))
    return TtsCurve(
        grid=grid,
        instance_labels=labels,
        per_instance_p=p,
        per_instance_tts=tts,
        aggregate=aggregate,
        tf_star=float(grid[g_star]),
        optimal_tts=float(aggregate[g_star]),
    )


def default_cutoff_grid(max_steps: int, points_per_decade: int = 20) -> np.ndarray:
    """Geometric grid of integer cutoffs, ~20 per decade over [1, max_steps]."""
    if max_steps < 1:
        raise DomainError("max_steps must be >= 1 for a cutoff grid")
    decades = math.log10(max_steps) if max_steps > 1 else 0.0
    count = max(int(round(decades * points_per_decade)) + 1, 1)
    raw = np.unique(np.round(np.logspace(0.0, math.log10(max_steps), count)))
    return raw[raw >= 1.0]


# --- experiment plans -------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentPlan:
    solvers: tuple[str, ...] = ("laser",)
    sizes: tuple[int, ...] = (32,)
    instances_per_size: int = 25
    restarts_per_instance: int = 50
    noise_levels: tuple[float, ...] = (0.0,)
    cutoff_grid: tuple[float, ...] | None = None
    master_seed: int = 0
    max_steps: int = 100_000
    max_steps_noisy: int = 500_000
    output: str = "runs.jsonl"
    solver_params: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not self.sizes:
            raise PlanInvalid("plan needs at least one size")
        for n in self.sizes:
            if n % 2 or n < 8:
                raise PlanInvalid(f"sizes must be even and >= 8, got {n}")
        if self.instances_per_size < 1:
            raise PlanInvalid("instances_per_size must be >= 1")
        if self.restarts_per_instance < 1:
            raise PlanInvalid("restarts_per_instance must be >= 1")
        for name in self.solvers:
            if name not in CONFIG_BY_NAME:
                raise PlanInvalid(f"unknown solver '{name}'")
        if self.cutoff_grid is not None:
            g = np.asarray(self.cutoff_grid)
            if g.size == 0 or (np.diff(g) <= 0).any() or g[0] <= 0:
                raise PlanInvalid("cutoff_grid must be positive, strictly increasing")
        for eta in self.noise_levels:
            if eta < 0:
                raise PlanInvalid("noise levels must be >= 0")
        if self.max_steps < 0 or self.max_steps_noisy < 0:
            raise PlanInvalid("step budgets must be >= 0")


def _parse_list(raw: str, cast) -> tuple:
    return tuple(cast(tok.strip()) for tok in raw.split(",") if tok.strip())


def parse_plan(text: str, base_dir: str = ".") -> ExperimentPlan:
    """Read a plan from key-value INI text (section [plan] + solver overrides)."""
    parser = configparser.ConfigParser()
    parser.read_string(text)
    if "plan" not in parser:
        raise PlanInvalid("plan file needs a [plan] section")
    sec = parser["plan"]
    kwargs: dict = {}
    if "solvers" in sec:
        kwargs["solvers"] = _parse_list(sec["solvers"], str)
    if "sizes" in sec:
        kwargs["sizes"] = _parse_list(sec["sizes"], int)
    for key, cast in (("instances_per_size", int), ("restarts_per_instance", int),
                      ("master_seed", int), ("max_steps", int),
                      ("max_steps_noisy", int)):
        if key in sec:
            kwargs[key] = cast(sec[key])
    if "noise_levels" in sec:
        kwargs["noise_levels"] = _parse_list(sec["noise_levels"], float)
    if "cutoff_grid" in sec:
        kwargs["cutoff_grid"] = _parse_list(sec["cutoff_grid"], float)
    if "output" in sec:
        out = sec["output"]
        kwargs["output"] = out if os.path.isabs(out) else os.path.join(base_dir, out)
    solver_params = {}
    for name in CONFIG_BY_NAME:
        if name in parser:
            solver_params[name] = dict(parser[name])
    kwargs["solver_params"] = solver_params
    plan = ExperimentPlan(**kwargs)
    plan.validate()
    return plan


def load_plan(path: str) -> ExperimentPlan:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_plan(fh.read(), base_dir=os.path.dirname(os.path.abspath(path)))


_CONFIG_KEY_ALIASES = {
    "t_hi": "T_hi",
    "t_lo": "T_lo",
}


def build_config(name: str, params: dict | None = None, **overrides):
    """Solver config from file-recorded defaults + plan params + overrides."""
    from .defaults import solver_defaults

    kwargs = dict(solver_defaults(name))
    kwargs.update(params or {})
    kwargs.update(overrides)
    cls = CONFIG_BY_NAME[name]
    fields = cls.__dataclass_fields__
    clean = {}
    for key, val in kwargs.items():
        key = _CONFIG_KEY_ALIASES.get(key, key)
        if key not in fields:
            continue
        if isinstance(val, str):
            anno = str(fields[key].type)
            if "bool" in anno:
                val = val.lower() == "true"
            elif "int" in anno and "float" not in anno:
                val = int(val)
            else:
                try:
                    val = float(val)
                except ValueError:
                    pass
        clean[key] = val
    return cls(**clean)


# --- the experiment loop -------------------------------------------------------------

def _existing_keys(path: str) -> set[tuple]:
    keys = set()
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = RunRecord.from_json(line)
                keys.add((rec.solver_id, rec.instance_label,
                          float(rec.extra.get("noise", 0.0)),
                          int(rec.extra.get("restart", 0))))
    return keys


def run_experiment(plan: ExperimentPlan, resume: bool = False,
                   threads: int = 1, log=None) -> list[RunRecord]:
    """Execute the plan, appending one JSONL record per trajectory.

    Work items already present in the output file are skipped when resuming
    (and also on a plain rerun, which makes reruns idempotent).  Returns the
    full record set, including previously existing rows.
    """
    plan.validate()
    existing = _existing_keys(plan.output) if (resume or os.path.exists(plan.output)) else set()

    work = []
    models = {}
    for si, name in enumerate(plan.solvers):
        noise_levels = plan.noise_levels if name == "laser" else (0.0,)
        for n in plan.sizes:
            for i in range(plan.instances_per_size):
                inst_seed = trajectory_seed(plan.master_seed, n, i)
                instance = generate_3r3x(n, inst_seed)
                if instance.label not in models:
                    models[instance.label] = xorsat_to_ising(instance)[0]
                for ni, eta in enumerate(noise_levels):
                    budget = plan.max_steps if eta == 0.0 else plan.max_steps_noisy
                    for restart in range(plan.restarts_per_instance):
                        key = (name, instance.label, float(eta), restart)
                        if key in existing:
                            continue
                        work.append((si, name, n, i, instance.label,
                                     ni, eta, restart, budget))

    def run_one(item) -> RunRecord:
        si, name, n, i, label, ni, eta, restart, budget = item
        params = dict(plan.solver_params.get(name, {}))
        if name == "laser":
            params["eta"] = eta
        cfg = build_config(name, params)
        seed = trajectory_seed(plan.master_seed, si, n, i, ni, restart)
        rec = solve(models[label], cfg, seed, max_steps=budget,
                    target_energy=0.0, instance_label=label)
        rec.extra.update({"n": n, "noise": eta, "restart": restart,
                          "max_steps": budget})
        return rec

    new_records: list[RunRecord] = []
    outdir = os.path.dirname(os.path.abspath(plan.output))
    os.makedirs(outdir, exist_ok=True)
    with open(plan.output, "a", encoding="utf-8") as fh:
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                for rec in pool.map(run_one, work):
                    fh.write(rec.to_json() + "\n")
                    fh.flush()
                    new_records.append(rec)
                    if log:
                        log(rec)
        else:
            for item in work:
                rec = run_one(item)
                fh.write(rec.to_json() + "\n")
                fh.flush()
                new_records.append(rec)
                if log:
                    log(rec)
    return load_records(plan.output)


def load_records(path: str) -> list[RunRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(RunRecord.from_json(line))
    return records


@dataclass(frozen=True)
class SummaryRow:
    solver: str
    n: int
    noise: float
    tf_star: float
    tts_steps: float
    tts_seconds: float
    mean_p: float
    instances: int
    restarts: int


SUMMARY_COLUMNS = ("solver", "n", "noise", "tf_star", "tts_steps",
                   "tts_seconds", "mean_p", "instances", "restarts")


def summarize(records: list[RunRecord],
              cutoff_grid: tuple[float, ...] | None = None) -> list[SummaryRow]:
    """Per (solver, n, noise): optimal TTS in steps and seconds."""
    if not records:
        raise NoRecords("no records to summarize")
    groups: dict[tuple, dict[str, list[RunRecord]]] = {}
    for rec in records:
        n = int(rec.extra.get("n", 0))
        eta = float(rec.extra.get("noise", 0.0))
        groups.setdefault((rec.solver_id, n, eta), {}).setdefault(
            rec.instance_label, []).append(rec)
    rows = []
    for (solver, n, eta), by_instance in sorted(groups.items()):
        all_recs = [r for recs in by_instance.values() for r in recs]
        budget = max(int(r.extra.get("max_steps", r.steps_executed))
                     for r in all_recs)
        grid = (np.asarray(cutoff_grid, dtype=np.float64)
                if cutoff_grid is not None else default_cutoff_grid(max(budget, 1)))
        curve = optimal_tts(by_instance, grid)
        stepped = [r for r in all_recs if r.steps_executed > 0]
        sec_per_step = (float(np.mean([r.wall_time / r.steps_executed
                                       for r in stepped]))
                        if stepped else float("nan"))
        restarts = max(len(v) for v in by_instance.values())
        rows.append(SummaryRow(
            solver=solver, n=n, noise=eta,
            tf_star=curve.tf_star,
            tts_steps=curve.optimal_tts,
            tts_seconds=curve.optimal_tts * sec_per_step,
            mean_p=curve.mean_p_at_optimum(),
            instances=len(by_instance),
            restarts=restarts,
        ))
    return rows


def write_summary(rows: list[SummaryRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow([row.solver, row.n, repr(row.noise), repr(row.tf_star),
                             repr(row.tts_steps), repr(row.tts_seconds),
                             repr(row.mean_p), row.instances, row.restarts])


def read_summary(path: str) -> list[SummaryRow]:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append(SummaryRow(
                solver=rec["solver"], n=int(rec["n"]), noise=float(rec["noise"]),
                tf_star=float(rec["tf_star"]), tts_steps=float(rec["tts_steps"]),
                tts_seconds=float(rec["tts_seconds"]), mean_p=float(rec["mean_p"]),
                instances=int(rec["instances"]), restarts=int(rec["restarts"])))
    return rows
