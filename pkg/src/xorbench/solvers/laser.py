"""Coupled-laser-dynamics solver.

One round trip applies, per laser i:

  1. feedback   f_i = e_i - kappa * (sum_j J_ij e_j + h_i * r),  r = +a_sat
  2. noise      e'_i = f_i + xi_i,  Re/Im xi each N(0, (eta*a_sat)^2)
  3. gain       e''_i = e'_i * g0 / (1 + |e'_i|^2 / a_sat^2)

and the spin readout is the sign of Re(e_i) relative to the reference field.
The minus sign on kappa makes phase alignment lower the Eq.-1 energy for
negative couplings.

An optional static per-cavity detuning (a fixed phase rotation by delta_i,
drawn uniformly from [-detune, +detune] per trajectory, applied between
feedback and noise) models cavity-length disorder.  With it, weakly
constrained lasers keep precessing instead of freezing, which turns the
otherwise convergent map into a sustained search; detune=0 recovers the bare
round trip exactly.  Coupling and detuning are tuned per problem size by
``calibrate`` (see the shipped defaults table).
"""
from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numba
import numpy as np

from ..defaults import laser_table_lookup, load_defaults
from ..errors import NonFiniteField
from ..ising import IsingModel, SpinState
from . import LaserConfig, RunRecord, trajectory_seed


@dataclass(frozen=True)
class LaserField:
    """Complex per-spin field state, in units where a_sat carries the scale."""

    field: np.ndarray          # (n,) complex128
    a_sat: float = 1.0
    g0: float = 2.0
    kappa: float = 0.1
    eta: float = 0.0
    step_count: int = 0
    detunings: np.ndarray | None = None  # (n,) radians, None = no rotation


def noise_channel(rng: np.random.Generator, eta: float, a_sat: float,
                  size: int) -> np.ndarray:
    """The injected complex noise: zero-mean, std eta*a_sat per component."""
    if eta == 0.0:
        return np.zeros(size, dtype=np.complex128)
    std = eta * a_sat
    return rng.normal(0.0, std, size) + 1j * rng.normal(0.0, std, size)


def laser_step(state: LaserField, model: IsingModel,
               rng: np.random.Generator) -> LaserField:
    """One synchronous round trip: feedback, (detuning), noise, gain."""
    e = state.field
    indptr, indices, values = model.adjacency()
    coupled = np.zeros(model.n, dtype=np.complex128)
    for i in range(model.n):
        lo, hi = indptr[i], indptr[i + 1]
        coupled[i] = values[lo:hi] @ e[indices[lo:hi]]
    f = e - state.kappa * (coupled + model.h * state.a_sat)
    if state.detunings is not None:
        f = f * np.exp(1j * state.detunings)
    f = f + noise_channel(rng, state.eta, state.a_sat, model.n)
    gain = state.g0 / (1.0 + np.abs(f) ** 2 / state.a_sat ** 2)
    new_field = f * gain
    if not np.isfinite(new_field).all():
        raise NonFiniteField(
            "laser field is no longer finite; check g0/kappa tuning")
    return replace(state, field=new_field, step_count=state.step_count + 1)


def readout(state: LaserField) -> SpinState:
    """Spin i is the sign of Re(e_i); exact zeros map to +1."""
    spins = np.where(np.real(state.field) >= 0.0, 1, -1).astype(np.int8)
    return SpinState(spins)


def initial_field(model_n: int, config: LaserConfig,
                  rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Uniform random phases at amplitude init_scale*a_sat, plus detunings."""
    phases = rng.uniform(0.0, 2.0 * np.pi, model_n)
    amp = config.init_scale * config.a_sat
    field = amp * np.exp(1j * phases)
    detune = config.detune if config.detune is not None else 0.0
    detunings = (rng.uniform(-detune, detune, model_n) if detune > 0.0
                 else np.zeros(model_n))
    return field, detunings


@numba.njit(cache=True)
def _laser_kernel(indptr, indices, values, pairs_i, pairs_j, pair_w, h, offset,
                  er, ei, cd, sd, g0, kappa, eta, a_sat, max_steps, target,
                  noise_seed, check_every):
    np.random.seed(noise_seed)
    n = h.size
    fr = np.empty(n, dtype=np.float64)
    fi = np.empty(n, dtype=np.float64)
    s = np.empty(n, dtype=np.int8)
    for i in range(n):
        s[i] = 1 if er[i] >= 0.0 else -1
    best = _readout_energy(pairs_i, pairs_j, pair_w, h, offset, s)
    best_s = s.copy()
    noise_std = eta * a_sat
    a_sat2 = a_sat * a_sat
    step_of_solution = -1
    steps = 0
    for step in range(1, max_steps + 1):
        for i in range(n):
            acc_r = 0.0
            acc_i = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                acc_r += values[p] * er[j]
                acc_i += values[p] * ei[j]
            f_r = er[i] - kappa * (acc_r + h[i] * a_sat)
            f_i = ei[i] - kappa * acc_i
            r_r = f_r * cd[i] - f_i * sd[i]
            r_i = f_r * sd[i] + f_i * cd[i]
            if noise_std > 0.0:
                r_r += np.random.normal(0.0, noise_std)
                r_i += np.random.normal(0.0, noise_std)
            gain = g0 / (1.0 + (r_r * r_r + r_i * r_i) / a_sat2)
            fr[i] = r_r * gain
            fi[i] = r_i * gain
        for i in range(n):
            er[i] = fr[i]
            ei[i] = fi[i]
            s[i] = 1 if er[i] >= 0.0 else -1
        steps = step
        energy = _readout_energy(pairs_i, pairs_j, pair_w, h, offset, s)
        if energy < best:
            best = energy
            for i in range(n):
                best_s[i] = s[i]
        if step_of_solution < 0 and best <= target:
            step_of_solution = steps
            break
        if step % check_every == 0:
            finite = True
            for i in range(n):
                if not (np.isfinite(er[i]) and np.isfinite(ei[i])):
                    finite = False
                    break
            if not finite:
                return steps, best, step_of_solution, 1, best_s
    return steps, best, step_of_solution, 0, best_s


@numba.njit(cache=True)
def _readout_energy(pairs_i, pairs_j, pair_w, h, offset, s):
    e = offset
    for i in range(h.size):
        e += h[i] * s[i]
    for p in range(pair_w.size):
        e += pair_w[p] * s[pairs_i[p]] * s[pairs_j[p]]
    return e


def resolve_laser_params(model_n: int,
                         config: LaserConfig) -> tuple[float, float, float]:
    """Fill g0/kappa/detune from the shipped calibration when unset."""
    g0 = config.g0
    kappa = config.kappa
    detune = config.detune
    if g0 is None:
        g0 = load_defaults()["laser"].getfloat("g0")
    if kappa is None:
        kappa = laser_table_lookup("kappa", model_n)
    if detune is None:
        detune = laser_table_lookup("detune", model_n)
    return float(g0), float(kappa), float(detune)


def solve_laser(model: IsingModel, config: LaserConfig, seed: int,
                max_steps: int, target: float,
                instance_label: str = "") -> RunRecord:
    g0, kappa, detune = resolve_laser_params(model.n, config)
    cfg = replace(config, g0=g0, kappa=kappa, detune=detune)
    rng = np.random.default_rng(seed)
    field, detunings = initial_field(model.n, cfg, rng)
    indptr, indices, values = model.adjacency()
    t0 = time.perf_counter()
    steps, best, step_of_solution, nonfinite, best_s = _laser_kernel(
        indptr, indices, values,
        model.pairs[:, 0], model.pairs[:, 1], model.weights,
        model.h, model.offset,
        np.real(field).copy(), np.imag(field).copy(),
        np.cos(detunings), np.sin(detunings),
        cfg.g0, kappa, cfg.eta, cfg.a_sat, max_steps, target,
        trajectory_seed(seed, 1), 1000)
    wall = time.perf_counter() - t0
    if nonfinite:
        raise NonFiniteField(
            f"laser field diverged after {steps} round trips "
            f"(g0={cfg.g0}, kappa={kappa})")
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
        extra={"eta": cfg.eta},
    )


def calibrate(n_spins: int, g0: float = 3.0,
              kappa_grid: tuple[float, ...] = (0.08, 0.16, 0.32, 0.5),
              detune_grid: tuple[float, ...] = (0.0, 0.05, 0.1, 0.12),
              instances: int = 4, seeds_per_instance: int = 3,
              max_steps: int = 100_000, master_seed: int = 51_423,
              refine: bool = True) -> tuple[float, float, float]:
    """Bracketing calibration of (kappa, detune) for one problem size.

    Scans the coarse grids on freshly generated calibration instances, then
    refines once around the best cell with a tighter kappa bracket.  Returns
    (kappa, detune, success_rate).  Calibration instances are derived from
    ``master_seed`` and are distinct from anything a benchmark plan generates.
    """
    from ..ising import xorsat_to_ising
    from ..xorsat import generate_3r3x

    models = []
    for i in range(instances):
        inst = generate_3r3x(n_spins, trajectory_seed(master_seed, n_spins, i))
        model, _ = xorsat_to_ising(inst)
        models.append(model)

    def rate(kappa: float, detune: float) -> float:
        wins = 0
        total = 0
        for mi, model in enumerate(models):
            for si in range(seeds_per_instance):
                cfg = LaserConfig(g0=g0, kappa=kappa, detune=detune)
                rec = solve_laser(model, cfg,
                                  trajectory_seed(master_seed, 7, mi, si),
                                  max_steps, 0.0)
                wins += rec.success
                total += 1
        return wins / total

    best = (-1.0, kappa_grid[0], detune_grid[0])
    for kappa in kappa_grid:
        for detune in detune_grid:
            r = rate(kappa, detune)
            if r > best[0]:
                best = (r, kappa, detune)
    if refine and best[0] > 0.0:
        _, k0, d0 = best
        for kappa in (k0 / 1.5, k0 * 1.5):
            r = rate(kappa, d0)
            if r > best[0]:
                best = (r, kappa, d0)
    return best[1], best[2], best[0]
