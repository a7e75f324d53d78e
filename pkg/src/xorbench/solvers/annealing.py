"""Simulated annealing: Metropolis single-spin-flip sweeps over a geometric
temperature ladder.  The sweep kernel is shared with parallel tempering."""
from __future__ import annotations

import time

import numba
import numpy as np

from ..ising import IsingModel
from . import RunRecord, SimAnnealConfig, trajectory_seed


@numba.njit(cache=True)
def _random_spins(n):
    s = np.empty(n, dtype=np.int8)
    for i in range(n):
        s[i] = 1 if np.random.random() < 0.5 else -1
    return s


@numba.njit(cache=True)
def _local_fields(indptr, indices, values, h, s):
    n = h.size
    local = np.empty(n, dtype=np.float64)
    for i in range(n):
        acc = h[i]
        for p in range(indptr[i], indptr[i + 1]):
            acc += values[p] * s[indices[p]]
        local[i] = acc
    return local


@numba.njit(cache=True)
def _full_energy(pairs_i, pairs_j, pair_w, h, offset, s):
    e = offset
    for i in range(h.size):
        e += h[i] * s[i]
    for p in range(pair_w.size):
        e += pair_w[p] * s[pairs_i[p]] * s[pairs_j[p]]
    return e


@numba.njit(cache=True)
def _sweep_once(indptr, indices, values, s, local, energy, temp):
    """One fixed-order Metropolis sweep; returns the updated running energy."""
    n = s.size
    for i in range(n):
        d_e = -2.0 * s[i] * local[i]
        if d_e <= 0.0 or (temp > 0.0 and np.random.random() < np.exp(-d_e / temp)):
            s_new = -s[i]
            s[i] = s_new
            energy += d_e
            for p in range(indptr[i], indptr[i + 1]):
                local[indices[p]] += 2.0 * values[p] * s_new
    return energy


@numba.njit(cache=True)
def _anneal_kernel(indptr, indices, values, pairs_i, pairs_j, pair_w, h, offset,
                   temps, max_steps, target, seed, check_every):
    np.random.seed(seed)
    n = h.size
    s = _random_spins(n)
    local = _local_fields(indptr, indices, values, h, s)
    energy = _full_energy(pairs_i, pairs_j, pair_w, h, offset, s)
    best = energy
    best_s = s.copy()
    step_of_solution = -1
    steps = 0
    drift = 0.0
    for t in range(max_steps):
        energy = _sweep_once(indptr, indices, values, s, local, energy, temps[t])
        steps = t + 1
        if energy < best:
            best = energy
            for i in range(n):
                best_s[i] = s[i]
        if step_of_solution < 0 and best <= target:
            step_of_solution = steps
            break
        if steps % check_every == 0:
            exact = _full_energy(pairs_i, pairs_j, pair_w, h, offset, s)
            d = abs(exact - energy)
            if d > drift:
                drift = d
    return steps, best, step_of_solution, drift, best_s


def temperature_ladder(t_hi: float, t_lo: float, max_steps: int,
                       sweeps_per_temp: int) -> np.ndarray:
    """Per-sweep temperatures: geometric from t_hi to t_lo, held for
    sweeps_per_temp sweeps per rung, spanning the whole budget."""
    if max_steps == 0:
        return np.empty(0, dtype=np.float64)
    rungs = max(1, -(-max_steps // sweeps_per_temp))
    if rungs == 1 or t_hi == t_lo:
        levels = np.full(rungs, t_hi, dtype=np.float64)
    else:
        levels = t_hi * (t_lo / t_hi) ** (np.arange(rungs) / (rungs - 1))
    return np.repeat(levels, sweeps_per_temp)[:max_steps]


def default_t_hi(model: IsingModel) -> float:
    """The 2*max|J| heuristic for the hot end of the ladder."""
    scale = max(model.max_abs_coupling, float(np.abs(model.h).max()) if model.n else 1.0)
    return 2.0 * scale if scale > 0 else 1.0


def simulated_annealing(model: IsingModel, config: SimAnnealConfig, seed: int,
                        max_steps: int, target: float,
                        instance_label: str = "") -> RunRecord:
    t_hi = config.T_hi if config.T_hi is not None else default_t_hi(model)
    temps = temperature_ladder(t_hi, config.T_lo, max_steps, config.sweeps_per_temp)
    indptr, indices, values = model.adjacency()
    t0 = time.perf_counter()
    steps, best, step_of_solution, drift, best_s = _anneal_kernel(
        indptr, indices, values,
        model.pairs[:, 0], model.pairs[:, 1], model.weights,
        model.h, model.offset, temps, max_steps, target,
        trajectory_seed(seed), 1000)
    wall = time.perf_counter() - t0
    if drift != 0.0:
        raise AssertionError(f"incremental energy drifted by {drift}")
    return RunRecord(
        instance_label=instance_label,
        solver_id=config.solver_id,
        seed=seed,
        steps_executed=int(steps),
        success=step_of_solution >= 0,
        best_energy=float(best),
        step_of_solution=int(step_of_solution) if step_of_solution >= 0 else None,
        wall_time=wall,
        step_unit=config.step_unit,
        best_state=np.asarray(best_s, dtype=np.int8),
    )
