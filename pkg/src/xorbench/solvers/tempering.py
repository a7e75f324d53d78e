"""Parallel tempering: replicas at geometric temperatures with alternating
even/odd adjacent swaps.  Steps are counted in sweep rounds (every replica
performs one Metropolis sweep per round); K=1 with T_hi=T_lo degenerates to
simulated annealing at fixed temperature, trajectory for trajectory."""
from __future__ import annotations

import math
import time

import numba
import numpy as np

from ..ising import IsingModel
from . import ParTempConfig, RunRecord, trajectory_seed
from .annealing import _full_energy, _local_fields, _random_spins, _sweep_once, default_t_hi


@numba.njit(cache=True)
def swap_probability(beta_a: float, beta_b: float, e_a: float, e_b: float) -> float:
    """Metropolis acceptance probability for exchanging two replica states.

    Equals ``min(1, exp((beta_a - beta_b) * (e_a - e_b)))``; in particular a
    swap between equal-energy replicas is always accepted.
    """
    return math.exp(min(0.0, (beta_a - beta_b) * (e_a - e_b)))


@numba.njit(cache=True)
def _pt_kernel(indptr, indices, values, pairs_i, pairs_j, pair_w, h, offset,
               temps, max_steps, target, swap_every, seed, check_every):
    np.random.seed(seed)
    n = h.size
    k = temps.size
    s = np.empty((k, n), dtype=np.int8)
    local = np.empty((k, n), dtype=np.float64)
    energies = np.empty(k, dtype=np.float64)
    for r in range(k):
        s[r] = _random_spins(n)
        local[r] = _local_fields(indptr, indices, values, h, s[r])
        energies[r] = _full_energy(pairs_i, pairs_j, pair_w, h, offset, s[r])
    r_best = int(np.argmin(energies))
    best = energies[r_best]
    best_s = s[r_best].copy()
    betas = 1.0 / temps
    step_of_solution = -1
    steps = 0
    drift = 0.0
    phase = 0
    for rnd in range(1, max_steps + 1):
        for r in range(k):
            energies[r] = _sweep_once(indptr, indices, values, s[r], local[r],
                                      energies[r], temps[r])
            if energies[r] < best:
                best = energies[r]
                for q in range(n):
                    best_s[q] = s[r, q]
        steps = rnd
        if step_of_solution < 0 and best <= target:
            step_of_solution = steps
            break
        if rnd % swap_every == 0:
            start = phase % 2
            phase += 1
            for a in range(start, k - 1, 2):
                b = a + 1
                prob = swap_probability(betas[a], betas[b],
                                        energies[a], energies[b])
                if np.random.random() < prob:
                    for q in range(n):
                        t8 = s[a, q]
                        s[a, q] = s[b, q]
                        s[b, q] = t8
                        tf = local[a, q]
                        local[a, q] = local[b, q]
                        local[b, q] = tf
                    te = energies[a]
                    energies[a] = energies[b]
                    energies[b] = te
        if rnd % check_every == 0:
            for r in range(k):
                exact = _full_energy(pairs_i, pairs_j, pair_w, h, offset, s[r])
                d = abs(exact - energies[r])
                if d > drift:
                    drift = d
    return steps, best, step_of_solution, drift, best_s


def default_replicas(n: int) -> int:
    return max(4, int(round(math.log2(max(n, 2)))))


def parallel_tempering(model: IsingModel, config: ParTempConfig, seed: int,
                       max_steps: int, target: float,
                       instance_label: str = "") -> RunRecord:
    k = config.num_replicas if config.num_replicas is not None else default_replicas(model.n)
    t_hi = config.T_hi if config.T_hi is not None else default_t_hi(model)
    temps = np.geomspace(config.T_lo, t_hi, k) if k > 1 else np.array([config.T_lo])
    indptr, indices, values = model.adjacency()
    t0 = time.perf_counter()
    steps, best, step_of_solution, drift, best_s = _pt_kernel(
        indptr, indices, values,
        model.pairs[:, 0], model.pairs[:, 1], model.weights,
        model.h, model.offset, temps, max_steps, target,
        config.sweeps_between_swaps, trajectory_seed(seed), 1000)
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
