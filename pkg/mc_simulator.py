"""
Monte-Carlo check of the analytic spectra.

The linearized Langevin systems for the A and S combinations are integrated
at fixed stationary n and N, and the power spectral density of the field
quadrature is estimated with Welch's method. The default scheme samples the
linear SDE exactly (matrix exponential step with the matching noise
covariance); plain Euler-Maruyama is kept as the "euler" scheme. Spectra use
the two-sided angular-frequency convention (1/2pi) * integral S = variance.
"""

import json
import logging
import math
from dataclasses import dataclass, field, asdict, replace
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, signal

from errors import ConfigError, PhysicsDomainError
from fluct_solver import FluctSolver, LinearSystem, SteadyState

logger = logging.getLogger(__name__)

WINDOWS = {"hann": "hann", "rect": "boxcar"}
SCHEME_NAMES = ("exact", "euler")
DT_GUARD = 0.05
CHUNK = 1 << 20
MAX_CONDITION = 1e8
# A and S runs draw from separate streams of one seed
STREAMS = {"A": 0, "S": 1}

Seed = Union[int, Sequence[int]]


@dataclass(frozen=True)
class MCConfig:
    """
    Monte-Carlo settings; None fields are derived from the simulated system.

    dt defaults to half the guard 0.05/(2 kappa + gamma_perp + gammaP + omega_ro),
    each Welch segment to 20 slowest relaxation times, burn_in to 10 of them and
    duration to burn_in + max(segments, 100) segment lengths. scheme picks the
    step: "exact" (default) or "euler".
    """
    dt: Optional[float] = None
    duration: Optional[float] = None
    burn_in: Optional[float] = None
    seed: int = 0
    segments: int = 128
    window: str = "hann"
    scheme: str = "exact"

    def validate(self) -> "MCConfig":
        if self.window not in WINDOWS:
            raise ConfigError(f"mc.window must be one of {', '.join(WINDOWS)} (got {self.window!r})")
        if self.scheme not in SCHEME_NAMES:
            raise ConfigError(f"mc.scheme must be one of {', '.join(SCHEME_NAMES)} (got {self.scheme!r})")
        if not isinstance(self.segments, int) or self.segments < 2:
            raise ConfigError(f"mc.segments must be an integer >= 2 (got {self.segments!r})")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"mc.seed must be a 64-bit unsigned integer (got {self.seed!r})")
        for name in ("dt", "duration"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"mc.{name} must be > 0 (got {value!r})")
        if self.burn_in is not None and self.burn_in < 0:
            raise ConfigError(f"mc.burn_in must be >= 0 (got {self.burn_in!r})")
        return self


@dataclass(frozen=True)
class ResolvedMC:
    dt: float
    duration: float
    burn_in: float
    seed: int
    segments: int
    window: str
    scheme: str
    nperseg: int
    noverlap: int
    n_burn: int
    n_steps: int
    slowest_rate: float

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass
class PSDEstimate:
    grid: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    variance: float
    variance_stderr: float
    meta: Dict = field(default_factory=dict)
    companions: Dict[str, "PSDEstimate"] = field(default_factory=dict)


def resolve_config(cfg: MCConfig, system: LinearSystem, fastest_rate: float) -> ResolvedMC:
    """Fill derived settings and enforce the step-size and duration guards"""
    cfg.validate()
    rates = system.relaxation_rates()
    if not np.all(rates > 0):
        raise PhysicsDomainError("unstable drift: the linear system has no stationary state")
    slowest = float(rates.min())
    dt_max = DT_GUARD / fastest_rate
    dt = cfg.dt if cfg.dt is not None else 0.5 * dt_max
    if dt > dt_max:
        raise ConfigError(f"mc.dt={dt:.4g} exceeds the stability guard {dt_max:.4g}")
    burn_in = cfg.burn_in if cfg.burn_in is not None else 10.0 / slowest
    if cfg.duration is None:
        segment = 20.0 / slowest
        span = max(cfg.segments, 100) * segment
        duration = burn_in + span
    else:
        duration = cfg.duration
        span = duration - burn_in
        if span <= 0:
            raise ConfigError(f"mc.duration={duration:.4g} does not exceed burn_in={burn_in:.4g}")
        segment = span / cfg.segments
    required = 100.0 * max(1.0 / slowest, segment)
    if span < required * (1.0 - 1e-12):
        raise ConfigError(
            f"mc.duration too short: {span:.4g} after burn-in, need >= {required:.4g} "
            f"(100 x max(1/slowest rate, segment length))"
        )
    nperseg = int(round(segment / dt))
    if nperseg < 8:
        raise ConfigError(f"Welch segments of {nperseg} samples are too short; reduce mc.dt")
    n_burn = int(round(burn_in / dt))
    return ResolvedMC(dt=dt, duration=duration, burn_in=burn_in, seed=cfg.seed, segments=cfg.segments,
                      window=cfg.window, scheme=cfg.scheme, nperseg=nperseg,
                      noverlap=nperseg // 2 if cfg.window == "hann" else 0,
                      n_burn=n_burn, n_steps=n_burn + cfg.segments * nperseg, slowest_rate=slowest)


def _linear_recursion(step: np.ndarray, gain: np.ndarray, n_steps: int, seed: Seed,
                      x0: Optional[np.ndarray] = None) -> np.ndarray:
    """
    x_{k+1} = step x_k + gain xi_k, xi_k standard normal, one independent
    generator per channel spawned from seed (an int or a sequence of ints).

    Returns the trajectory of shape (n_steps + 1, k) including x0.
    """
    k = step.shape[0]
    x0 = np.zeros(k) if x0 is None else np.asarray(x0, dtype=float)
    rngs = [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(k)]

    eigenvalues, vectors = np.linalg.eig(step)
    out = np.empty((n_steps + 1, k))
    out[0] = x0
    if np.linalg.cond(vectors) > MAX_CONDITION:
        logger.info("ℹ️ Ill-conditioned modal basis; integrating with dlsim")
        noise = np.column_stack([rng.standard_normal(n_steps) for rng in rngs])
        noise = np.vstack([noise, np.zeros((1, k))])
        _, states, _ = signal.dlsim((step, gain, np.eye(k), np.zeros((k, k)), 1.0), noise, x0=x0)
        out[:] = states
        return out

    inverse = np.linalg.inv(vectors)
    modes = inverse @ x0.astype(complex)
    done = 0
    while done < n_steps:
        m = min(CHUNK, n_steps - done)
        noise = np.column_stack([rng.standard_normal(m) for rng in rngs])
        forcing = noise @ (inverse @ gain).T
        chunk = np.empty((m, k), dtype=complex)
        for j, lam in enumerate(eigenvalues):
            chunk[:, j], _ = signal.lfilter([1.0], [1.0, -lam], forcing[:, j], zi=[lam * modes[j]])
            modes[j] = chunk[-1, j]
        out[done + 1:done + 1 + m] = (chunk @ vectors.T).real
        done += m
    return out


def _check_diffusion(diffusion) -> np.ndarray:
    diffusion = np.asarray(diffusion, dtype=float)
    if np.any(diffusion < 0):
        raise PhysicsDomainError("diffusion coefficients must be >= 0 in the real-noise model")
    return diffusion


def euler_maruyama(drift: np.ndarray, diffusion: Sequence[float], dt: float, n_steps: int, seed: Seed,
                   x0: Optional[np.ndarray] = None) -> np.ndarray:
    """x_{k+1} = (I + drift dt) x_k + sqrt(diffusion dt) xi_k"""
    drift = np.asarray(drift, dtype=float)
    diffusion = _check_diffusion(diffusion)
    step = np.eye(drift.shape[0]) + drift * dt
    return _linear_recursion(step, np.diag(np.sqrt(diffusion * dt)), n_steps, seed, x0)


def exact_step(drift: np.ndarray, diffusion: Sequence[float], dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Transition matrix expm(drift dt) and the covariance of the noise gathered
    over one step, integral_0^dt expm(drift s) diag(diffusion) expm(drift s)^T ds,
    both from one Van Loan block exponential.
    """
    drift = np.asarray(drift, dtype=float)
    diffusion = _check_diffusion(diffusion)
    k = drift.shape[0]
    block = np.zeros((2 * k, 2 * k))
    block[:k, :k] = -drift
    block[:k, k:] = np.diag(diffusion)
    block[k:, k:] = drift.T
    exp_block = linalg.expm(block * dt)
    transition = exp_block[k:, k:].T
    covariance = transition @ exp_block[:k, k:]
    return transition, 0.5 * (covariance + covariance.T)


def exact_discretization(drift: np.ndarray, diffusion: Sequence[float], dt: float, n_steps: int, seed: Seed,
                         x0: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Sampled linear SDE with the exact step distribution: no damping or
    frequency error at any dt, so weakly damped oscillations keep their width.
    """
    transition, covariance = exact_step(drift, diffusion, dt)
    w, v = np.linalg.eigh(covariance)
    gain = v * np.sqrt(np.clip(w, 0.0, None))
    return _linear_recursion(transition, gain, n_steps, seed, x0)


SCHEMES = dict(zip(SCHEME_NAMES, (exact_discretization, euler_maruyama)))


def welch_psd(trajectory: np.ndarray, dt: float, nperseg: int, window: str = "hann",
              segments: Optional[int] = None) -> PSDEstimate:
    """
    Two-sided angular-frequency PSD of a real series with per-bin standard
    error from the scatter of individual segment periodograms.
    """
    x = np.asarray(trajectory, dtype=float)
    if window not in WINDOWS:
        raise ConfigError(f"window must be one of {', '.join(WINDOWS)} (got {window!r})")
    noverlap = nperseg // 2 if window == "hann" else 0
    blocks = len(x) // nperseg
    if nperseg < 2 or blocks < 2:
        raise ConfigError(f"{len(x)} samples are too few for Welch segments of {nperseg}")
    fs = 1.0 / dt
    options = dict(fs=fs, window=WINDOWS[window], nperseg=nperseg, noverlap=noverlap,
                   return_onesided=False, detrend=False, scaling="density")
    freqs, pxx = signal.welch(x, average="mean", **options)
    _, _, sxx = signal.spectrogram(x, mode="psd", **options)
    effective = segments or blocks
    stderr = sxx.std(axis=1, ddof=1) / math.sqrt(effective)

    block_var = x[:blocks * nperseg].reshape(blocks, nperseg).var(axis=1)
    return PSDEstimate(
        grid=2.0 * math.pi * np.fft.fftshift(freqs),
        values=np.fft.fftshift(pxx),
        stderr=np.fft.fftshift(stderr),
        variance=float(x.var()),
        variance_stderr=float(block_var.std(ddof=1) / math.sqrt(blocks)),
        meta={"dt": dt, "nperseg": nperseg, "noverlap": noverlap, "window": window,
              "segments_used": int(sxx.shape[1])},
    )


def compare_psd(estimate: PSDEstimate, analytic: np.ndarray, band_fraction: float = 0.01) -> Dict[str, float]:
    """RMS relative error and |z| < 3 share over bins where analytic exceeds band_fraction of its peak"""
    analytic = np.asarray(analytic, dtype=float)
    band = analytic > band_fraction * analytic.max()
    rel = (estimate.values[band] - analytic[band]) / analytic[band]
    z = (estimate.values[band] - analytic[band]) / np.where(estimate.stderr[band] > 0, estimate.stderr[band], np.inf)
    return {
        "bins": int(band.sum()),
        "rms_rel_error": float(np.sqrt(np.mean(rel ** 2))),
        "z_within_3": float(np.mean(np.abs(z) < 3.0)),
        "max_abs_z": float(np.max(np.abs(z))),
    }


def dump_trajectory(path: str, times: np.ndarray, trajectory: np.ndarray, labels: Sequence[str], meta: Dict) -> Path:
    """Raw float64 rows (time, components...) plus a JSON sidecar describing the layout"""
    target = Path(path)
    rows = np.column_stack([times, trajectory]).astype("<f8")
    target.write_bytes(np.ascontiguousarray(rows).tobytes(order="C"))
    sidecar = target.with_name(target.name + ".json")
    layout = {"dtype": "float64", "byte_order": "little", "order": "row-major",
              "columns": ["time", *labels], "rows": int(rows.shape[0]), **meta}
    sidecar.write_text(json.dumps(layout, indent=2, sort_keys=True))
    logger.info("✅ Trajectory written to %s (%d rows)", target, rows.shape[0])
    return target


class MonteCarloSimulator:
    """
    Sampled trajectories of the linear A and S Langevin systems.

    Args:
        solver: FluctSolver holding the laser parameters
    """

    def __init__(self, solver: FluctSolver):
        self.solver = solver

    def _solver_for(self, state: SteadyState) -> FluctSolver:
        return self.solver if state.P == self.solver.params.P else self.solver.at_pump(state.P)

    def _run(self, solver: FluctSolver, system: LinearSystem, state: SteadyState, cfg: MCConfig, label: str,
             dump_path: Optional[str], diffusion: Optional[np.ndarray] = None,
             x0: Optional[np.ndarray] = None) -> Tuple[np.ndarray, ResolvedMC]:
        p, d = solver.params, solver.derived
        if not state.N < d.Nth:
            raise PhysicsDomainError(f"unstable drift: N={state.N:.6g} >= Nth={d.Nth:.6g}")
        fastest = 2.0 * p.kappa + p.gamma_perp + d.gammaP + state.omega_ro
        resolved = resolve_config(cfg, system, fastest)
        logger.info("🎲 %s run (%s): %d steps, dt=%.3g, seed=%d", label, resolved.scheme, resolved.n_steps,
                    resolved.dt, resolved.seed)
        noise = system.diffusion if diffusion is None else diffusion
        integrate = SCHEMES[resolved.scheme]
        stream = (resolved.seed, STREAMS[label])
        trajectory = integrate(system.drift, noise, resolved.dt, resolved.n_steps, stream, x0)
        kept = trajectory[resolved.n_burn + 1:]
        if dump_path:
            times = resolved.dt * np.arange(resolved.n_burn + 1, resolved.n_steps + 1)
            dump_trajectory(dump_path, times, kept, system.labels,
                            {"system": label, "P": state.P, "N": state.N, "n": state.n, **resolved.to_dict()})
        return kept, resolved

    def _estimate(self, series: np.ndarray, resolved: ResolvedMC, label: str) -> PSDEstimate:
        estimate = welch_psd(series, resolved.dt, resolved.nperseg, resolved.window, resolved.segments)
        estimate.meta.update({"component": label, **resolved.to_dict()})
        return estimate

    def simulate_A(self, state: SteadyState, cfg: MCConfig = MCConfig(), dump_path: Optional[str] = None,
                   noiseless: bool = False, x0: Optional[np.ndarray] = None) -> PSDEstimate:
        """Welch PSD of a_A from the A-combination system"""
        solver = self._solver_for(state)
        system = solver.a_system(state.N)
        diffusion = np.zeros(system.size) if noiseless else None
        kept, resolved = self._run(solver, system, state, cfg, "A", dump_path, diffusion, x0)
        return self._estimate(kept[:, 0], resolved, "a_A")

    def simulate_S(self, state: SteadyState, cfg: MCConfig = MCConfig(), include_population: bool = False,
                   dump_path: Optional[str] = None) -> PSDEstimate:
        """Welch PSD of a_S from the S-combination system coupled to the population fluctuation"""
        solver = self._solver_for(state)
        system = solver.s_system(state.N, state.n)
        kept, resolved = self._run(solver, system, state, cfg, "S", dump_path)
        estimate = self._estimate(kept[:, 0], resolved, "a_S")
        if include_population:
            estimate.companions["dNe"] = self._estimate(kept[:, 2], resolved, "dNe")
        return estimate

    @staticmethod
    def without_photons(state: SteadyState) -> SteadyState:
        """Copy of state with n forced to 0, which decouples the S field from the population"""
        return replace(state, n=0.0, omega_ro=0.0)
