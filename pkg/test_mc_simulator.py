"""
Tests for the Monte-Carlo integrator and Welch PSD estimator against the analytic spectra
"""

import json
import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import linalg, signal

from errors import ConfigError
from fluct_solver import FluctSolver
from laser_params import LaserParams
from mc_simulator import (SCHEMES, MCConfig, MonteCarloSimulator, compare_psd, dump_trajectory, euler_maruyama,
                          exact_discretization, exact_step, resolve_config, welch_psd)

# small, fast laser: rates of order one
SMALL = LaserParams(kappa=2.0, gamma_perp=4.0, omega_rabi=1.0, f=0.5, N0=20, P=1.0)


def small_state():
    solver = FluctSolver(SMALL)
    return solver, solver.solve_steady()


def long_run(system, seed=0, segments=300, relaxation_times=40.0):
    slowest = float(system.relaxation_rates().min())
    burn_in = 10.0 / slowest
    return MCConfig(burn_in=burn_in, duration=burn_in + segments * relaxation_times / slowest,
                    segments=segments, seed=seed)


def test_A_psd_matches_analytic_spectrum():
    solver, state = small_state()
    system = solver.a_system(state.N)
    estimate = MonteCarloSimulator(solver).simulate_A(state, long_run(system, seed=1))
    analytic = solver.nA_density(estimate.grid, state.N)
    report = compare_psd(estimate, analytic)
    assert report["bins"] > 10
    assert report["rms_rel_error"] < 0.10
    assert report["z_within_3"] >= 0.95
    assert estimate.variance == pytest.approx(solver.nA_total(state.N), rel=0.08)


def test_S_psd_matches_analytic_spectrum():
    solver, state = small_state()
    assert state.n > 0
    system = solver.s_system(state.N, state.n)
    estimate = MonteCarloSimulator(solver).simulate_S(state, long_run(system, seed=2), include_population=True)
    analytic = solver.nS_density(estimate.grid, state.N, state.n)
    report = compare_psd(estimate, analytic)
    assert report["rms_rel_error"] < 0.10
    assert report["z_within_3"] >= 0.95
    assert estimate.variance == pytest.approx(state.nS, rel=0.08)

    population = estimate.companions["dNe"]
    step = population.grid[1] - population.grid[0]
    integrated = population.values.sum() * step / (2.0 * math.pi)
    assert integrated == pytest.approx(population.variance, rel=0.05)
    assert population.variance == pytest.approx(system.covariance()[2, 2], rel=0.10)


def test_ornstein_uhlenbeck_oracle():
    dt, nperseg, segments = 0.01, 5000, 1000
    trajectory = euler_maruyama(np.array([[-1.0]]), [2.0], dt, nperseg * segments, seed=3)
    estimate = welch_psd(trajectory[:, 0], dt, nperseg, "hann", segments)
    analytic = 2.0 / (1.0 + estimate.grid ** 2)
    assert compare_psd(estimate, analytic)["rms_rel_error"] < 0.05
    assert estimate.variance == pytest.approx(1.0, rel=0.05)


def test_noiseless_relaxation():
    trajectory = euler_maruyama(np.array([[-1.0]]), [0.0], 1e-3, 1000, seed=0, x0=np.array([1.0]))
    assert trajectory.shape == (1001, 1)
    assert trajectory[-1, 0] == pytest.approx(math.exp(-1.0), rel=1e-3)


def test_identical_seeds_give_identical_output():
    solver, state = small_state()
    system = solver.a_system(state.N)
    cfg = long_run(system, seed=5, segments=120, relaxation_times=20.0)
    first = MonteCarloSimulator(solver).simulate_A(state, cfg)
    second = MonteCarloSimulator(solver).simulate_A(state, cfg)
    assert np.array_equal(first.values, second.values)
    assert np.array_equal(first.stderr, second.stderr)
    third = MonteCarloSimulator(solver).simulate_A(state, replace(cfg, seed=6))
    assert not np.array_equal(first.values, third.values)


def test_resolve_config_guards():
    solver, state = small_state()
    system = solver.a_system(state.N)
    fastest = 2.0 * SMALL.kappa + SMALL.gamma_perp + solver.derived.gammaP + state.omega_ro
    resolved = resolve_config(MCConfig(), system, fastest)
    assert resolved.dt == pytest.approx(0.025 / fastest)
    assert resolved.burn_in == pytest.approx(10.0 / resolved.slowest_rate)
    assert resolved.n_steps == resolved.n_burn + resolved.segments * resolved.nperseg

    with pytest.raises(ConfigError, match="stability guard"):
        resolve_config(MCConfig(dt=1.0), system, fastest)
    with pytest.raises(ConfigError, match="too short"):
        resolve_config(MCConfig(burn_in=1.0, duration=2.0), system, fastest)
    with pytest.raises(ConfigError, match="burn_in"):
        resolve_config(MCConfig(burn_in=5.0, duration=4.0), system, fastest)
    with pytest.raises(ConfigError, match="mc.segments"):
        resolve_config(MCConfig(segments=1), system, fastest)
    with pytest.raises(ConfigError, match="mc.window"):
        resolve_config(MCConfig(window="blackman"), system, fastest)


def test_dump_trajectory_layout(tmp_path):
    times = np.arange(4) * 0.5
    trajectory = np.arange(8, dtype=float).reshape(4, 2)
    target = dump_trajectory(str(tmp_path / "run_A.bin"), times, trajectory, ("a_A", "v_A"), {"P": 1.0})
    rows = np.fromfile(target, dtype="<f8").reshape(4, 3)
    assert np.array_equal(rows[:, 0], times)
    assert np.array_equal(rows[:, 1:], trajectory)
    layout = json.loads((tmp_path / "run_A.bin.json").read_text())
    assert layout["columns"] == ["time", "a_A", "v_A"]
    assert layout["rows"] == 4
    assert layout["P"] == 1.0


def test_dump_from_simulation(tmp_path):
    solver, state = small_state()
    cfg = long_run(solver.a_system(state.N), segments=120, relaxation_times=20.0)
    path = tmp_path / "trace.bin"
    MonteCarloSimulator(solver).simulate_A(state, cfg, dump_path=str(path))
    layout = json.loads((tmp_path / "trace.bin.json").read_text())
    assert layout["system"] == "A"
    assert path.stat().st_size == layout["rows"] * 3 * 8


def test_without_photons_decouples_population():
    solver, state = small_state()
    empty = MonteCarloSimulator.without_photons(state)
    assert empty.n == 0.0
    assert empty.N == state.N
    system = solver.s_system(empty.N, empty.n)
    assert system.drift[2, 0] == 0.0
    assert system.drift[1, 2] == 0.0


def test_S_psd_without_photons_is_the_A_spectrum():
    solver, state = small_state()
    empty = MonteCarloSimulator.without_photons(state)
    cfg = long_run(solver.s_system(empty.N, empty.n), seed=7)
    estimate = MonteCarloSimulator(solver).simulate_S(empty, cfg)
    report = compare_psd(estimate, solver.nA_density(estimate.grid, state.N))
    assert report["rms_rel_error"] < 0.10
    assert report["z_within_3"] >= 0.95


@pytest.mark.parametrize("scheme", sorted(SCHEMES))
def test_halving_dt_keeps_the_psd(scheme):
    solver, state = small_state()
    system = solver.a_system(state.N)
    fastest = 2.0 * SMALL.kappa + SMALL.gamma_perp + solver.derived.gammaP + state.omega_ro
    cfg = replace(long_run(system, seed=8, segments=200), scheme=scheme)
    dt = resolve_config(cfg, system, fastest).dt
    simulator = MonteCarloSimulator(solver)
    coarse = simulator.simulate_A(state, replace(cfg, dt=dt))
    fine = simulator.simulate_A(state, replace(cfg, dt=dt / 2.0, seed=9))

    analytic = solver.nA_density(coarse.grid, state.N)
    band = analytic > 0.01 * analytic.max()
    values = np.interp(coarse.grid, fine.grid, fine.values)
    stderr = np.interp(coarse.grid, fine.grid, fine.stderr)
    z = (coarse.values - values)[band] / np.hypot(coarse.stderr, stderr)[band]
    assert np.mean(np.abs(z) < 3.0) >= 0.95


def test_A_and_S_runs_are_uncorrelated(tmp_path):
    solver, state = small_state()
    slowest = min(float(solver.a_system(state.N).relaxation_rates().min()),
                  float(solver.s_system(state.N, state.n).relaxation_rates().min()))
    burn_in = 10.0 / slowest
    cfg = MCConfig(burn_in=burn_in, duration=burn_in + 120 * 20.0 / slowest, segments=120, seed=4)
    simulator = MonteCarloSimulator(solver)
    simulator.simulate_A(state, cfg, dump_path=str(tmp_path / "a.bin"))
    simulator.simulate_S(state, cfg, dump_path=str(tmp_path / "s.bin"))

    layout = json.loads((tmp_path / "a.bin.json").read_text())
    a = np.fromfile(tmp_path / "a.bin", dtype="<f8").reshape(-1, 3)[:, 1]
    s = np.fromfile(tmp_path / "s.bin", dtype="<f8").reshape(-1, 4)[:, 1]
    assert len(a) == len(s)
    nperseg = layout["nperseg"]
    _, coherence = signal.coherence(a, s, fs=1.0 / layout["dt"], window="boxcar", nperseg=nperseg, noverlap=0)
    assert np.mean(coherence) < 2.0 / (len(a) // nperseg)


def test_exact_step_of_ornstein_uhlenbeck():
    transition, covariance = exact_step(np.array([[-1.0]]), [2.0], 0.5)
    assert transition[0, 0] == pytest.approx(math.exp(-0.5), rel=1e-12)
    assert covariance[0, 0] == pytest.approx(1.0 - math.exp(-1.0), rel=1e-12)


def test_exact_noiseless_relaxation():
    trajectory = exact_discretization(np.array([[-1.0]]), [0.0], 1e-3, 1000, seed=0, x0=np.array([1.0]))
    assert trajectory[-1, 0] == pytest.approx(math.exp(-1.0), rel=1e-10)


def test_exact_step_keeps_weakly_damped_variance():
    # strongly pumped S system: relaxation oscillation far less damped than it is fast
    fs = FluctSolver(LaserParams(kappa=50.0, gamma_perp=50.0, omega_rabi=34.0, f=0.5, N0=100, P=16.0))
    state = fs.solve_steady()
    system = fs.s_system(state.N, state.n)
    fastest = 2.0 * fs.params.kappa + fs.params.gamma_perp + fs.derived.gammaP + state.omega_ro
    dt = resolve_config(MCConfig(), system, fastest).dt
    stationary = system.covariance()[0, 0]

    transition, covariance = exact_step(system.drift, system.diffusion, dt)
    exact = linalg.solve_discrete_lyapunov(transition, covariance)[0, 0]
    assert exact == pytest.approx(stationary, rel=1e-6)

    step = np.eye(system.size) + system.drift * dt
    euler = linalg.solve_discrete_lyapunov(step, np.diag(system.diffusion * dt))[0, 0]
    assert euler > 1.2 * stationary


def test_unknown_scheme_rejected():
    solver, state = small_state()
    system = solver.a_system(state.N)
    with pytest.raises(ConfigError, match="mc.scheme"):
        resolve_config(MCConfig(scheme="milstein"), system, 10.0)


if __name__ == "__main__":
    print("🧪 Testing Monte-Carlo simulator")
    test_noiseless_relaxation()
    test_ornstein_uhlenbeck_oracle()
    print("✅ Monte-Carlo checks passed")
