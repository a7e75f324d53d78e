"""Tabu search: steepest-descent single flips with a recency ban list,
aspiration on new global bests, and a forced-release stall guard."""
from __future__ import annotations

import time

import numba
import numpy as np

from ..ising import IsingModel
from . import RunRecord, TabuConfig, trajectory_seed
from .annealing import _full_energy, _local_fields, _random_spins


@numba.njit(cache=True)
def _tabu_kernel(indptr, indices, values, pairs_i, pairs_j, pair_w, h, offset,
                 max_steps, target, tenure, aspiration, seed, check_every, s0):
    np.random.seed(seed)
    n = h.size
    s = s0.copy() if s0.size == n else _random_spins(n)
    local = _local_fields(indptr, indices, values, h, s)
    energy = _full_energy(pairs_i, pairs_j, pair_w, h, offset, s)
    best = energy
    best_s = s.copy()
    # spin i may move again only at moves strictly after tabu_until[i]
    tabu_until = np.zeros(n, dtype=np.int64)
    tabu_set_at = np.zeros(n, dtype=np.int64)
    step_of_solution = -1
    steps = 0
    drift = 0.0
    for move in range(1, max_steps + 1):
        chosen = -1
        chosen_de = 0.0
        for i in range(n):
            d_e = -2.0 * s[i] * local[i]
            admissible = move > tabu_until[i]
            if not admissible and aspiration and energy + d_e < best:
                admissible = True
            if admissible and (chosen < 0 or d_e < chosen_de):
                chosen = i
                chosen_de = d_e
        if chosen < 0:
            # every spin is tabu and nothing aspirates: release the oldest ban
            oldest = 0
            for i in range(1, n):
                if tabu_set_at[i] < tabu_set_at[oldest]:
                    oldest = i
            chosen = oldest
            chosen_de = -2.0 * s[chosen] * local[chosen]
        s_new = -s[chosen]
        s[chosen] = s_new
        energy += chosen_de
        for p in range(indptr[chosen], indptr[chosen + 1]):
            local[indices[p]] += 2.0 * values[p] * s_new
        tabu_until[chosen] = move + tenure
        tabu_set_at[chosen] = move
        steps = move
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


def tabu_search(model: IsingModel, config: TabuConfig, seed: int,
                max_steps: int, target: float, instance_label: str = "",
                initial_state: np.ndarray | None = None) -> RunRecord:
    indptr, indices, values = model.adjacency()
    s0 = (np.asarray(initial_state, dtype=np.int8) if initial_state is not None
          else np.empty(0, dtype=np.int8))
    t0 = time.perf_counter()
    steps, best, step_of_solution, drift, best_s = _tabu_kernel(
        indptr, indices, values,
        model.pairs[:, 0], model.pairs[:, 1], model.weights,
        model.h, model.offset, max_steps, target,
        config.tenure, config.aspiration, trajectory_seed(seed), 1000, s0)
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
