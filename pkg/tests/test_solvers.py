"""Unit tests for the four solvers and the shared solve/RunRecord interface.

Empirical success-rate thresholds were frozen by calibration runs on the
fixture instances named in each test; all solvers are bit-reproducible given
(model, config, seed), so those counts are exact, not statistical.
"""
import math

import numba
import numpy as np
import pytest

from xorbench.errors import UnknownSolver
from xorbench.ising import IsingModel, decode, energy, xorsat_to_ising
from xorbench.solvers import (
    LaserConfig,
    ParTempConfig,
    RunRecord,
    SimAnnealConfig,
    TabuConfig,
    config_for,
    solve,
    trajectory_seed,
)
from xorbench.solvers.annealing import (
    _sweep_once,
    default_t_hi,
    simulated_annealing,
    temperature_ladder,
)
from xorbench.solvers.laser import (
    LaserField,
    _laser_kernel,
    initial_field,
    laser_step,
    noise_channel,
    readout,
    resolve_laser_params,
    solve_laser,
)
from xorbench.solvers.tabu import tabu_search
from xorbench.solvers.tempering import default_replicas, swap_probability
from xorbench.xorsat import evaluate, generate_3r3x

ALL_CONFIGS = (LaserConfig(), SimAnnealConfig(), TabuConfig(), ParTempConfig())


def _model(n, seed):
    inst = generate_3r3x(n, seed=seed)
    model, vmap = xorsat_to_ising(inst)
    return inst, model, vmap


def _free_model(n=4):
    """n uncoupled spins with zero field: the laser map's neutral substrate."""
    return IsingModel(n=n, h=np.zeros(n),
                      pairs=np.zeros((0, 2), dtype=np.int32),
                      weights=np.zeros(0))


# --- laser ------------------------------------------------------------------------


def test_laser_fixed_point_amplitude():
    # With no coupling, no field, and no noise, |e| = a_sat*sqrt(g0-1) is a
    # fixed point of the round trip: gain exactly cancels at that amplitude.
    model = _free_model(4)
    rng = np.random.default_rng(0)
    for g0 in (2.0, 3.0):
        amp = math.sqrt(g0 - 1.0)
        phases = np.array([0.0, 1.0, 2.5, -0.7])
        field = amp * np.exp(1j * phases)
        state = LaserField(field=field.copy(), a_sat=1.0, g0=g0, kappa=0.1,
                           eta=0.0, detunings=None)
        stepped = laser_step(state, model, rng)
        assert np.allclose(stepped.field, field, atol=1e-12)
        assert stepped.step_count == 1


def test_laser_saturation_bound():
    # However large the input, one gain application bounds the amplitude by
    # g0*a_sat (the map's true supremum is g0*a_sat/2, attained at |f|=a_sat).
    model = _free_model(6)
    rng = np.random.default_rng(1)
    g0, a_sat = 3.0, 1.0
    for scale in (0.01, 1.0, 100.0, 1e6):
        field = scale * np.exp(1j * rng.uniform(0, 2 * np.pi, 6))
        state = LaserField(field=field, a_sat=a_sat, g0=g0, kappa=0.0,
                           eta=0.0, detunings=None)
        stepped = laser_step(state, model, rng)
        assert np.abs(stepped.field).max() <= g0 * a_sat + 1e-12


def test_laser_ferromagnet_aligns():
    # Two lasers coupled by J01 = -1 lock in phase; readout gives an aligned
    # spin pair, which is the two-spin ferromagnetic ground state.
    model = IsingModel(n=2, h=np.zeros(2),
                       pairs=np.array([[0, 1]], dtype=np.int32),
                       weights=np.array([-1.0]))
    for seed in range(10):
        rng = np.random.default_rng(seed)
        cfg = LaserConfig(g0=2.0, kappa=0.1, detune=0.0)
        field, _ = initial_field(2, cfg, rng)
        state = LaserField(field=field, a_sat=1.0, g0=2.0, kappa=0.1,
                           eta=0.0, detunings=None)
        for _ in range(300):
            state = laser_step(state, model, rng)
        spins = readout(state).spins
        assert spins[0] == spins[1]
        assert energy(model, spins) == pytest.approx(-1.0)


def test_noise_channel_statistics():
    # Injected noise: zero-mean, isotropic, std eta*a_sat per real component.
    rng = np.random.default_rng(123)
    for eta in (0.03, 0.07):
        xi = noise_channel(rng, eta, a_sat=1.0, size=100_000)
        for comp in (np.real(xi), np.imag(xi)):
            assert abs(comp.std() - eta) / eta < 0.02
            # 3-sigma band for the mean of 1e5 draws
            assert abs(comp.mean()) < 3 * eta / math.sqrt(comp.size)
        # isotropy: real/imag components uncorrelated
        corr = np.corrcoef(np.real(xi), np.imag(xi))[0, 1]
        assert abs(corr) < 0.02


def test_noise_channel_eta_zero_is_silent():
    rng = np.random.default_rng(0)
    xi = noise_channel(rng, 0.0, a_sat=1.0, size=100)
    assert np.all(xi == 0)
    # and it must not consume any randomness
    assert rng.integers(1 << 30) == np.random.default_rng(0).integers(1 << 30)


def test_readout_signs_and_zero_rule():
    state = LaserField(field=np.array([1.0 + 0j, -0.5 + 2j, 0.0 + 1j]))
    assert readout(state).spins.tolist() == [1, -1, 1]


def test_laser_kernel_matches_reference_step():
    # The compiled trajectory must reproduce the pure-Python round trip
    # exactly (modulo float summation order) when noise is off.
    inst, model, _ = _model(16, seed=5)
    rng = np.random.default_rng(7)
    cfg = LaserConfig(g0=3.0, kappa=0.08, detune=0.1)
    field, det = initial_field(model.n, cfg, rng)
    state = LaserField(field=field.copy(), a_sat=1.0, g0=3.0, kappa=0.08,
                       eta=0.0, detunings=det)
    for _ in range(50):
        state = laser_step(state, model, np.random.default_rng(0))
    er, ei = np.real(field).copy(), np.imag(field).copy()
    indptr, indices, values = model.adjacency()
    _laser_kernel(indptr, indices, values,
                  model.pairs[:, 0], model.pairs[:, 1], model.weights,
                  model.h, model.offset, er, ei, np.cos(det), np.sin(det),
                  3.0, 0.08, 0.0, 1.0, 50, -np.inf, trajectory_seed(7, 1), 1000)
    assert np.allclose(er + 1j * ei, state.field, atol=1e-12)


def test_laser_detune_zero_recovers_bare_round_trip():
    inst, model, _ = _model(16, seed=5)
    rng = np.random.default_rng(3)
    cfg = LaserConfig(g0=2.0, kappa=0.1, detune=0.0)
    field, det = initial_field(model.n, cfg, rng)
    assert np.all(det == 0)
    bare = LaserField(field=field.copy(), g0=2.0, kappa=0.1, detunings=None)
    rotated = LaserField(field=field.copy(), g0=2.0, kappa=0.1, detunings=det)
    r = np.random.default_rng(0)
    assert np.array_equal(laser_step(bare, model, r).field,
                          laser_step(rotated, model, r).field)


def test_laser_defaults_resolve_from_shipped_calibration():
    g0, kappa, detune = resolve_laser_params(16, LaserConfig())
    assert g0 > 1.0 and kappa > 0 and detune >= 0
    # explicit values pass through untouched
    assert resolve_laser_params(16, LaserConfig(g0=2.5, kappa=0.2, detune=0.05)) \
        == (2.5, 0.2, 0.05)


def test_laser_solves_small_instances():
    # Calibration fixture: 3 instances (gen seeds 400-402) x seeds 0-9 gave
    # 27/30 with shipped defaults; deterministic, so assert that exact floor.
    wins = 0
    for i in range(3):
        inst, model, vmap = _model(16, seed=400 + i)
        for s in range(10):
            rec = solve(model, LaserConfig(), seed=s, max_steps=20_000,
                        target_energy=0.0)
            if rec.success:
                wins += 1
                assert rec.best_energy == 0.0
                assert evaluate(inst, decode(rec.best_state, vmap)) == 0
                assert rec.step_of_solution <= rec.steps_executed
    assert wins >= 24  # 80% floor under a measured 90%


# --- simulated annealing ------------------------------------------------------------


def test_sweep_at_zero_temperature_is_greedy():
    # At T=0 a sweep may only lower the energy; a local minimum is a fixed
    # point.  Two-spin ferromagnet at an aligned state: both flips cost +2.
    model = IsingModel(n=2, h=np.zeros(2),
                       pairs=np.array([[0, 1]], dtype=np.int32),
                       weights=np.array([-1.0]))
    indptr, indices, values = model.adjacency()
    s = np.array([1, 1], dtype=np.int8)
    local = (model.h + np.array([values[indptr[i]:indptr[i + 1]]
                                 @ s[indices[indptr[i]:indptr[i + 1]]]
                                 for i in range(2)]))
    e = _sweep_once(indptr, indices.astype(np.int32), values, s,
                    local.astype(np.float64), energy(model, [1, 1]), 0.0)
    assert s.tolist() == [1, 1]
    assert e == pytest.approx(-1.0)


@numba.njit(cache=True)
def _acceptance_frequency(trials, d_e_local, temp, seed):
    """Fraction of Metropolis proposals accepted for a single uphill spin."""
    np.random.seed(seed)
    indptr = np.zeros(2, dtype=np.int64)
    indices = np.zeros(0, dtype=np.int32)
    values = np.zeros(0, dtype=np.float64)
    accepted = 0
    for _ in range(trials):
        s = np.full(1, -1, dtype=np.int8)
        local = np.full(1, d_e_local, dtype=np.float64)
        _sweep_once(indptr, indices, values, s, local, -1.0, temp)
        if s[0] == 1:
            accepted += 1
    return accepted / trials


def test_metropolis_acceptance_matches_boltzmann():
    # One spin in field h=+1 sitting at s=-1: the flip costs dE=+2.  At T=2
    # the acceptance rate must be e^-1 within Monte Carlo error.
    freq = _acceptance_frequency(40_000, 1.0, 2.0, 12345)
    expect = math.exp(-1.0)
    sigma = math.sqrt(expect * (1 - expect) / 40_000)
    assert abs(freq - expect) < 4 * sigma


def test_temperature_ladder_shape():
    temps = temperature_ladder(3.0, 0.1, 1000, 1)
    assert temps.size == 1000
    assert temps[0] == pytest.approx(3.0)
    assert temps[-1] == pytest.approx(0.1)
    assert (np.diff(temps) <= 1e-12).all()
    held = temperature_ladder(2.0, 0.5, 100, 10)
    assert held.size == 100
    assert np.unique(held).size == 10
    assert temperature_ladder(1.0, 0.1, 0, 1).size == 0


def test_default_t_hi_heuristic():
    inst, model, _ = _model(16, seed=0)
    scale = max(np.abs(model.weights).max(), np.abs(model.h).max())
    assert default_t_hi(model) == pytest.approx(2.0 * scale)
    flat = IsingModel(n=2, h=np.zeros(2),
                      pairs=np.zeros((0, 2), dtype=np.int32),
                      weights=np.zeros(0))
    assert default_t_hi(flat) == 1.0  # degenerate scale falls back to unity


def test_sa_solves_n16_on_most_seeds():
    # Spec'd calibration point: default schedule reaches the planted ground
    # state within 1e4 sweeps on >= 90% of seeds.  Fixture gave 20/20.
    wins = 0
    for i in range(2):
        inst, model, vmap = _model(16, seed=100 + i)
        for s in range(10):
            rec = solve(model, SimAnnealConfig(), seed=s, max_steps=10_000,
                        target_energy=0.0)
            if rec.success:
                wins += 1
                assert evaluate(inst, decode(rec.best_state, vmap)) == 0
    assert wins >= 18


# --- tabu --------------------------------------------------------------------------


def test_tabu_single_spin_first_move():
    model = IsingModel(n=1, h=np.array([1.0]),
                       pairs=np.zeros((0, 2), dtype=np.int32),
                       weights=np.zeros(0))
    rec = tabu_search(model, TabuConfig(tenure=3), seed=0, max_steps=10,
                      target=-1.0, initial_state=np.array([1], dtype=np.int8))
    assert rec.success
    assert rec.step_of_solution == 1
    assert rec.best_energy == pytest.approx(-1.0)
    assert rec.best_state.tolist() == [-1]


def test_tabu_stall_guard_releases_oldest_ban():
    # tenure >= n with aspiration off: after two moves every spin is tabu and
    # nothing aspirates; the forced release must keep the search moving.
    model = IsingModel(n=2, h=np.zeros(2),
                       pairs=np.array([[0, 1]], dtype=np.int32),
                       weights=np.array([1.0]))
    rec = tabu_search(model, TabuConfig(tenure=10, aspiration=False), seed=0,
                      max_steps=6, target=-3.0,
                      initial_state=np.array([1, 1], dtype=np.int8))
    assert not rec.success            # -3 is unreachable (min is -1)
    assert rec.steps_executed == 6    # ran the full budget without stalling
    assert rec.best_energy == pytest.approx(-1.0)


def test_tabu_solves_calibration_fixture():
    # Calibration run over 30 generated instances found instance seed 202 at
    # 39/40 seeds within 1e4 moves (default tenure); frozen as a regression.
    inst, model, vmap = _model(16, seed=202)
    wins = 0
    for s in range(40):
        rec = solve(model, TabuConfig(), seed=s, max_steps=10_000,
                    target_energy=0.0)
        if rec.success:
            wins += 1
            assert evaluate(inst, decode(rec.best_state, vmap)) == 0
    assert wins >= 36  # 90% of seeds


# --- parallel tempering --------------------------------------------------------------


def test_swap_probability_rules():
    # Equal energies always swap, regardless of the temperature gap.
    assert swap_probability(1.0, 0.5, 5.0, 5.0) == 1.0
    assert swap_probability(2.0, 0.1, -3.0, -3.0) == 1.0
    # A favorable exchange (cold replica holds the higher energy) is certain.
    assert swap_probability(2.0, 1.0, 5.0, 1.0) == 1.0
    # The unfavorable direction pays the Boltzmann factor.
    assert swap_probability(2.0, 1.0, 1.0, 5.0) == pytest.approx(math.exp(-4.0))
    assert 0.0 < swap_probability(2.0, 1.0, 1.0, 5.0) < 1.0


def test_pt_single_replica_degenerates_to_fixed_temperature_sa():
    inst, model, _ = _model(32, seed=1)
    sa = solve(model, SimAnnealConfig(T_hi=0.7, T_lo=0.7), seed=11,
               max_steps=2000, target_energy=0.0)
    pt = solve(model, ParTempConfig(num_replicas=1, T_lo=0.7), seed=11,
               max_steps=2000, target_energy=0.0)
    assert pt.success == sa.success
    assert pt.steps_executed == sa.steps_executed
    assert pt.step_of_solution == sa.step_of_solution
    assert pt.best_energy == sa.best_energy
    assert np.array_equal(pt.best_state, sa.best_state)


def test_default_replicas_rule():
    assert default_replicas(4) == 4
    assert default_replicas(32) == 5
    assert default_replicas(1024) == 10


def test_pt_not_worse_than_sa_at_equal_total_sweeps():
    # Non-strict regression check, frozen by a calibration run: 4 instances
    # (gen seeds 300-303) x 8 seeds at 8000 total sweeps gave SA 30/32 and
    # PT (K=8, 1000 rounds) 31/32.  Deterministic, so compare exactly.
    sa_wins = pt_wins = 0
    for i in range(4):
        inst, model, _ = _model(32, seed=300 + i)
        for s in range(8):
            sa_wins += solve(model, SimAnnealConfig(), seed=s, max_steps=8000,
                             target_energy=0.0).success
            pt_wins += solve(model, ParTempConfig(num_replicas=8), seed=s,
                             max_steps=1000, target_energy=0.0).success
    assert pt_wins >= sa_wins


# --- shared interface ---------------------------------------------------------------


def test_solve_zero_budget_executes_no_steps():
    _, model, _ = _model(16, seed=9)
    for cfg in ALL_CONFIGS:
        rec = solve(model, cfg, seed=0, max_steps=0, target_energy=0.0)
        assert rec.steps_executed == 0
        assert not rec.success
        assert rec.step_of_solution is None


def test_solve_is_deterministic_given_seed():
    _, model, _ = _model(16, seed=2)
    for cfg in ALL_CONFIGS:
        a = solve(model, cfg, seed=77, max_steps=500, target_energy=0.0)
        b = solve(model, cfg, seed=77, max_steps=500, target_energy=0.0)
        assert a.success == b.success
        assert a.steps_executed == b.steps_executed
        assert a.step_of_solution == b.step_of_solution
        assert a.best_energy == b.best_energy
        assert np.array_equal(a.best_state, b.best_state)
        c = solve(model, cfg, seed=78, max_steps=500, target_energy=0.0)
        assert (a.best_energy != c.best_energy
                or not np.array_equal(a.best_state, c.best_state)
                or a.step_of_solution != c.step_of_solution)


def test_success_record_invariants():
    inst, model, vmap = _model(16, seed=3)
    for cfg in ALL_CONFIGS:
        rec = solve(model, cfg, seed=1, max_steps=50_000, target_energy=0.0)
        assert rec.wall_time >= 0.0
        assert rec.steps_executed <= 50_000
        if rec.success:
            assert rec.best_energy <= 0.0
            assert rec.step_of_solution is not None
            assert 1 <= rec.step_of_solution <= rec.steps_executed
            assert energy(model, rec.best_state) == rec.best_energy
        else:
            assert rec.step_of_solution is None


def test_record_json_round_trip():
    rec = RunRecord(instance_label="x", solver_id="sa", seed=3,
                    steps_executed=10, success=True, best_energy=0.0,
                    step_of_solution=7, wall_time=0.5, step_unit="sweep",
                    best_state=np.array([1, -1], dtype=np.int8),
                    extra={"n": 16, "noise": 0.0})
    line = rec.to_json()
    back = RunRecord.from_json(line)
    assert back.best_state is None  # states are dropped unless kept explicitly
    assert back.extra["n"] == 16
    assert back.step_of_solution == 7
    kept = RunRecord.from_json(rec.to_json(keep_state=True))
    assert np.array_equal(kept.best_state, rec.best_state)


def test_config_for_and_unknown_solver():
    assert isinstance(config_for("laser"), LaserConfig)
    assert isinstance(config_for("sa", T_lo=0.2), SimAnnealConfig)
    with pytest.raises(UnknownSolver):
        config_for("quantum")
    with pytest.raises(UnknownSolver):
        solve(_free_model(2), object(), seed=0)  # type: ignore[arg-type]


def test_trajectory_seed_is_stable_and_spread():
    a = trajectory_seed(5, 1, 2, 3)
    assert a == trajectory_seed(5, 1, 2, 3)
    assert a != trajectory_seed(5, 1, 2, 4)
    assert a != trajectory_seed(6, 1, 2, 3)
    seeds = {trajectory_seed(0, i) for i in range(1000)}
    assert len(seeds) == 1000
