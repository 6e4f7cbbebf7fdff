"""
Laser with population fluctuations: spectra of the symmetric (S) and
antisymmetric (A) field combinations, the self-consistent stationary state,
the full lasing spectrum, the high-pump linewidth and the RF spectrum.
"""

import logging
import math
from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from errors import PhysicsDomainError, SolverError
from laser_params import DerivedParams, LaserParams, derive
from noise_model import NoiseModel, noise_model
from nofluct_solver import (LinewidthResult, NoFluctSolver, power_form_high, quadratic_inversion,
                            spontaneous_factor)
from numerics import default_window, find_root, integrate_spectrum
from spectrum import GridSpec, Spectrum, composite_grid

logger = logging.getLogger(__name__)

REGIONS = ("LED", "intermediate", "lasing")
REGION_TOLERANCE = 0.05
SCAN_UNIFORM = 256
SCAN_CLUSTERED = 384


@dataclass
class SteadyState:
    P: float
    N: float
    Ne: float
    Ng: float
    n: float
    nS: float
    nA: float
    omega_ro: float
    region: str = "intermediate"
    N_nofluct: Optional[float] = None
    n_nofluct: Optional[float] = None
    N_highpump: Optional[float] = None
    residual: float = 0.0
    diagnostics: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class AsymptoteState:
    """High-pump closed-form inversion; admissible=False when no root lies in [-N0, Nth)"""
    P: float
    N: float
    n: float
    admissible: bool
    branch: str
    root_error: float
    warnings: Tuple[str, ...] = ()


@dataclass
class LinearSystem:
    """
    Linear Langevin system dx/dt = drift @ x + F with independent white forces,
    <F_j(t) F_j(t')> = diffusion[j] delta(t - t').
    """
    drift: np.ndarray
    diffusion: np.ndarray
    labels: Tuple[str, ...]

    def __post_init__(self):
        self.drift = np.asarray(self.drift, dtype=float)
        self.diffusion = np.asarray(self.diffusion, dtype=float)

    @property
    def size(self) -> int:
        return len(self.labels)

    def relaxation_rates(self) -> np.ndarray:
        return -np.linalg.eigvals(self.drift).real

    @property
    def stable(self) -> bool:
        return bool(np.all(self.relaxation_rates() > 0))

    def psd(self, omega, index: int = 0) -> np.ndarray:
        """S(omega) of component index, normalized so (1/2pi) integral S = variance"""
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        eye = np.eye(self.size)
        kernel = -1j * omega[:, None, None] * eye - self.drift[None, :, :]
        response = np.linalg.inv(kernel)[:, index, :]
        return np.sum(np.abs(response) ** 2 * self.diffusion[None, :], axis=1)

    def covariance(self) -> np.ndarray:
        """Stationary covariance from drift @ C + C @ drift.T + diag(diffusion) = 0"""
        if not self.stable:
            raise PhysicsDomainError("linear system is not stable; no stationary covariance")
        return linalg.solve_continuous_lyapunov(self.drift, -np.diag(self.diffusion))


class FluctSolver:
    """
    Stationary solution including population fluctuations.

    Args:
        params: working parameters; params.P is the pump used by solve_steady()
    """

    def __init__(self, params: LaserParams):
        self.params = params.validate()
        self.derived: DerivedParams = derive(params)
        self.nofluct = NoFluctSolver(params)

    def at_pump(self, P: float) -> "FluctSolver":
        return FluctSolver(self.params.with_pump(P))

    def _for_state(self, state: SteadyState) -> "FluctSolver":
        if state is None or not isinstance(state, SteadyState) or not math.isfinite(state.N):
            raise SolverError("a solved steady state is required")
        return self if state.P == self.params.P else self.at_pump(state.P)

    # --- helpers ---

    def populations(self, N):
        Ne = 0.5 * (np.asarray(N, dtype=float) + self.params.N0)
        return Ne, self.params.N0 - Ne

    def energy_photon_number(self, N):
        """(gamma_par/4 kappa)[P(N0 - N) - N0 - N], unclamped"""
        p = self.params
        return p.gamma_par / (4.0 * p.kappa) * (p.P * (p.N0 - N) - p.N0 - N)

    def omega_ro(self, n) -> float:
        p = self.params
        return np.sqrt(4.0 * p.omega_rabi ** 2 * p.f * np.maximum(n, 0.0))

    def _check_pole(self, N) -> None:
        if np.any(np.asarray(N) >= self.derived.Nth):
            raise PhysicsDomainError(f"pole: no stationary spectrum at/above threshold inversion Nth={self.derived.Nth:.6g}")

    def _AB(self, N):
        p = self.params
        A = (1.0 - np.asarray(N) / self.derived.Nth) * p.kappa * p.gamma_perp / 2.0
        return A, p.kappa + p.gamma_perp / 2.0

    def _grid(self, omega_ro: float, grid, grid_spec: Optional[GridSpec]) -> np.ndarray:
        if grid is not None:
            return np.asarray(grid, dtype=float)
        return composite_grid(self.params.kappa, self.params.gamma_perp, omega_ro, grid_spec)

    def _meta(self, kind: str, N: float, n: Optional[float] = None, **extra) -> Dict:
        meta = {"kind": kind, "P": self.params.P, "N": float(N), "params": self.params.to_dict()}
        if n is not None:
            meta["n"] = float(n)
        meta.update(extra)
        return meta

    # --- A combinations ---

    def nA_density(self, omega, N):
        p, d = self.params, self.derived
        A, B = self._AB(N)
        w2 = np.square(omega)
        num = 0.5 * p.kappa * ((1.0 + p.N0 / d.Nth) * p.gamma_perp ** 2 / 4.0 + w2)
        return num / ((A - w2) ** 2 + B * B * w2)

    def nA_spectrum(self, N: float, grid=None, grid_spec: Optional[GridSpec] = None) -> Spectrum:
        self._check_pole(N)
        omega = self._grid(0.0, grid, grid_spec)
        return Spectrum("A", omega, self.nA_density(omega, N), self._meta("A", N))

    def nA_total(self, N):
        """Closed-form photons in the A combinations; 1/4 at N = -N0"""
        p, d = self.params, self.derived
        self._check_pole(N)
        return p.gamma_perp / (4.0 * (2.0 * p.kappa + p.gamma_perp)) * (
            (p.N0 + d.Nth) / (d.Nth - np.asarray(N, dtype=float)) + 2.0 * p.kappa / p.gamma_perp
        )

    # --- S combinations ---

    def nS_density(self, omega, N, n):
        """S-combination spectrum; vectorized over omega or over (N, n)"""
        p, d = self.params, self.derived
        A, B = self._AB(N)
        Ne, Ng = self.populations(N)
        w2 = np.square(omega)
        wro2 = 4.0 * p.omega_rabi ** 2 * p.f * np.asarray(n, dtype=float)
        gP = d.gammaP
        g2 = p.gamma_perp / 2.0
        num = (p.kappa * ((wro2 - w2 + gP * g2) ** 2 + w2 * (g2 + gP) ** 2)
               + p.kappa * p.gamma_perp ** 2 * (w2 + gP ** 2) * p.N0 / (4.0 * d.Nth)
               + wro2 * p.kappa * p.gamma_par * p.gamma_perp * (p.P * Ng + Ne) / d.Nth)
        re = gP * (A - w2) - w2 * B + 2.0 * p.kappa * wro2
        im = -np.asarray(omega) * (gP * B + (A - w2) + wro2)
        return num / (2.0 * (re ** 2 + im ** 2))

    def _characteristic_points(self, N, n) -> List[float]:
        """Frequencies where S/A lines or relaxation sidebands sit, used as quadrature breakpoints"""
        A, B = self._AB(N)
        A = np.atleast_1d(A)
        wro = np.atleast_1d(self.omega_ro(n))
        gP = self.derived.gammaP
        core = (gP * A + 2.0 * self.params.kappa * wro ** 2) / (gP * B)
        pts = np.concatenate([A / B, np.sqrt(np.maximum(A, 0.0)), wro, core])
        return sorted({float(x) for x in pts if x > 0 and math.isfinite(x)})

    def nS_spectrum(self, N: float, n: float, grid=None, grid_spec: Optional[GridSpec] = None) -> Spectrum:
        if n < 0:
            raise PhysicsDomainError(f"photon number must be >= 0 (got {n})")
        self._check_pole(N)
        wro = float(self.omega_ro(n))
        omega = self._grid(wro, grid, grid_spec)
        return Spectrum("S", omega, self.nS_density(omega, N, n), self._meta("S", N, n, omega_ro=wro))

    def nS_total(self, N, n):
        """(1/2pi) integral of the S spectrum; exactly nA_total when n = 0"""
        N = np.asarray(N, dtype=float)
        n = np.broadcast_to(np.asarray(n, dtype=float), N.shape)
        if np.any(n < 0):
            raise PhysicsDomainError("photon number must be >= 0")
        self._check_pole(N)
        result = np.array(self.nA_total(N), dtype=float, copy=True)
        live = n > 0
        if np.any(live):
            Nl, nl = N[live], n[live]
            scale = np.asarray(self.nA_total(Nl))
            window = default_window(self.params.kappa, self.params.gamma_perp, float(np.max(self.omega_ro(nl))))
            integral = integrate_spectrum(
                lambda w: self.nS_density(w, Nl, nl) / scale,
                0.5 * self.params.kappa / scale,
                window,
                points=self._characteristic_points(Nl, nl),
            )
            result[live] = np.asarray(integral) * scale
        return float(result) if result.ndim == 0 else result

    # --- combined spectra ---

    def nAS_spectrum(self, N: float, grid=None, grid_spec: Optional[GridSpec] = None) -> Spectrum:
        """2 nA(omega) - n(omega) without population fluctuations; may be negative"""
        self._check_pole(N)
        omega = self._grid(0.0, grid, grid_spec)
        values = 2.0 * self.nA_density(omega, N) - self.nofluct.density(omega, N)
        return Spectrum("AS", omega, values, self._meta("AS", N))

    def full_spectrum(self, state: SteadyState, grid=None, grid_spec: Optional[GridSpec] = None) -> Spectrum:
        """
        nS(omega) plus the explicit remainder
        [(kappa gamma_perp^2/4Nth)(N + N0/2) - (kappa/2)(gamma_perp^2/4 + omega^2)] / D(omega),
        which equals nA + nS - nAS. Negative excursions are kept and reported.
        """
        solver = self._for_state(state)
        p, d = solver.params, solver.derived
        N, n = state.N, state.n
        solver._check_pole(N)
        omega = solver._grid(state.omega_ro, grid, grid_spec)
        A, B = solver._AB(N)
        w2 = omega ** 2
        remainder = ((p.kappa * p.gamma_perp ** 2 / (4.0 * d.Nth)) * (N + p.N0 / 2.0)
                     - 0.5 * p.kappa * (p.gamma_perp ** 2 / 4.0 + w2)) / ((A - w2) ** 2 + B * B * w2)
        values = solver.nS_density(omega, N, n) + remainder
        integrated = state.nS + solver.nofluct.photon_number(N) - float(solver.nA_total(N))
        spectrum = Spectrum("full", omega, values,
                            solver._meta("full", N, n, omega_ro=state.omega_ro, region=state.region,
                                         integrated_n=integrated, n_mismatch=integrated - n))
        spectrum.meta["max_negativity"] = spectrum.max_negativity
        if spectrum.max_negativity > 0:
            logger.warning("⚠️ Full spectrum at P=%.4g dips below zero (relative %.3g)", p.P, spectrum.max_negativity)
        return spectrum

    def rf_spectrum(self, state: SteadyState, grid=None, grid_spec: Optional[GridSpec] = None) -> Spectrum:
        """Intensity-noise spectrum 4 n nS(omega)"""
        solver = self._for_state(state)
        s = solver.nS_spectrum(state.N, state.n, grid, grid_spec)
        meta = dict(s.meta, kind="rf", region=state.region)
        if state.region != "lasing":
            message = f"RF spectrum evaluated in the {state.region} region; 4 n nS is a high-pump result"
            logger.warning("⚠️ %s", message)
            meta["warnings"] = [message]
        return Spectrum("rf", s.grid, 4.0 * state.n * s.values, meta)

    # --- linear Langevin systems ---

    def noise(self, N: float) -> NoiseModel:
        Ne = min(max(0.5 * (N + self.params.N0), 0.0), float(self.params.N0))
        return noise_model(self.params, self.derived, Ne)

    def a_system(self, N: float) -> LinearSystem:
        p = self.params
        noise = self.noise(N)
        drift = [[-p.kappa, p.omega_rabi],
                 [p.omega_rabi * p.f * N, -p.gamma_perp / 2.0]]
        return LinearSystem(drift, noise.a_channels(), ("a_A", "v_A"))

    def s_system(self, N: float, n: float, include_population: bool = True) -> LinearSystem:
        p, d = self.params, self.derived
        noise = self.noise(N)
        if not include_population:
            drift = [[-p.kappa, p.omega_rabi],
                     [p.omega_rabi * p.f * N, -p.gamma_perp / 2.0]]
            return LinearSystem(drift, (noise.D_aS, noise.D_vS), ("a_S", "v_S"))
        root_n = math.sqrt(max(n, 0.0))
        drift = [[-p.kappa, p.omega_rabi, 0.0],
                 [p.omega_rabi * p.f * N, -p.gamma_perp / 2.0, 2.0 * p.omega_rabi * p.f * root_n],
                 [-2.0 * root_n * p.kappa, -2.0 * root_n * p.omega_rabi, -d.gammaP]]
        return LinearSystem(drift, noise.s_channels(), ("a_S", "v_S", "dNe"))

    def population_spectrum(self, state: SteadyState, grid=None, grid_spec: Optional[GridSpec] = None) -> Spectrum:
        """Spectrum of the upper-level population fluctuation from the linear S system"""
        solver = self._for_state(state)
        omega = solver._grid(state.omega_ro, grid, grid_spec)
        values = solver.s_system(state.N, state.n).psd(omega, index=2)
        return Spectrum("population", omega, values, solver._meta("population", state.N, state.n))

    # --- balance equation ---

    def balance_residual(self, N):
        """nS(N) + nA(N) - 1/2 - n(N), n(N) from energy conservation (clamped at 0 inside omega_ro)"""
        p, d = self.params, self.derived
        N_arr = np.asarray(N, dtype=float)
        if np.any(N_arr < -p.N0 * (1.0 + 1e-12)) or np.any(N_arr >= d.Nth):
            raise PhysicsDomainError(f"inversion outside [-N0, Nth) = [{-p.N0}, {d.Nth:.6g})")
        N_arr = np.maximum(N_arr, -float(p.N0))
        n_rhs = self.energy_photon_number(N_arr)
        n_in = np.maximum(n_rhs, 0.0)
        residual = self.nS_total(N_arr, n_in) + self.nA_total(N_arr) - 0.5 - n_rhs
        return float(residual) if np.ndim(residual) == 0 else residual

    def scan_points(self) -> np.ndarray:
        """Uniform points on [-N0, Nth) merged with points clustered geometrically toward Nth"""
        p, d = self.params, self.derived
        span = d.Nth + p.N0
        uniform = np.linspace(-p.N0, d.Nth, SCAN_UNIFORM + 1)[:-1]
        clustered = d.Nth - np.geomspace(span, span * 1e-12, SCAN_CLUSTERED)
        points = np.unique(np.concatenate([uniform, clustered]))
        return points[(points >= -p.N0) & (points < d.Nth)]

    def solve_steady(self) -> SteadyState:
        """Self-consistent stationary state: unique sign change of the balance residual, refined by Brent"""
        p, d = self.params, self.derived
        if p.P == 0.0:
            state = SteadyState(P=0.0, N=-float(p.N0), Ne=0.0, Ng=float(p.N0), n=0.0, nS=0.25, nA=0.25,
                                omega_ro=0.0, diagnostics={"unpumped": True})
            return self._finish(state)

        scan = self.scan_points()
        values = self.balance_residual(scan)
        signs = np.sign(values)
        zeros = np.where(signs == 0)[0]
        changes = np.where(signs[:-1] * signs[1:] < 0)[0]
        if len(zeros) + len(changes) != 1:
            sample = ", ".join(f"N={scan[i]:.4g}:{values[i]:.3g}" for i in np.linspace(0, len(scan) - 1, 12).astype(int))
            raise SolverError(
                f"balance equation at P={p.P} has {len(changes)} sign changes and {len(zeros)} zeros "
                f"over {len(scan)} scan points (expected exactly one root); residual samples: {sample}"
            )
        if len(zeros):
            N = float(scan[zeros[0]])
            bracket = (N, N)
        else:
            i = int(changes[0])
            bracket = (float(scan[i]), float(scan[i + 1]))
            N = find_root(self.balance_residual, bracket, tol=1e-12 * max(1.0, p.N0))

        n_rhs = float(self.energy_photon_number(N))
        n = max(n_rhs, 0.0)
        Ne, Ng = (float(x) for x in self.populations(N))
        nS = float(self.nS_total(N, n))
        nA = float(self.nA_total(N))
        diagnostics = {"scan_points": len(scan), "bracket": list(bracket), "warnings": []}
        if n_rhs < 0:
            message = f"photon number from energy conservation clamped at 0 (was {n_rhs:.3g})"
            logger.warning("⚠️ %s", message)
            diagnostics["n_clamped"] = True
            diagnostics["warnings"].append(message)
        state = SteadyState(P=p.P, N=N, Ne=Ne, Ng=Ng, n=n, nS=nS, nA=nA, omega_ro=float(self.omega_ro(n)),
                            residual=nS + nA - 0.5 - n_rhs, diagnostics=diagnostics)
        return self._finish(state)

    def _finish(self, state: SteadyState) -> SteadyState:
        nofluct_state = self.nofluct.solve_N()
        state.N_nofluct = nofluct_state.N
        state.n_nofluct = nofluct_state.n
        highpump = self.highpump_closed_form()
        state.N_highpump = highpump.N if highpump.admissible else None
        state.region = self.classify_region(state)
        logger.info("✅ Steady state solved at P=%.4g: N=%.6g, n=%.6g (%s)", state.P, state.N, state.n, state.region)
        return state

    # --- asymptotes and classification ---

    def highpump_closed_form(self) -> AsymptoteState:
        """High-pump inversion with the A-combination source (N0 + Nth)/2 in place of Ne"""
        p, d = self.params, self.derived
        root = quadratic_inversion(p.P, p.N0, d.Nth, d.beta_tilde, d.beta_tilde_c,
                                   inversion_gain=0.0, source=0.5 * (p.N0 + d.Nth), label="high-pump")
        if not root.admissible:
            logger.info("ℹ️ High-pump closed form has no admissible root at P=%.4g", p.P)
        return AsymptoteState(P=p.P, N=root.N, n=root.n, admissible=root.admissible, branch=root.branch,
                              root_error=root.root_error, warnings=tuple(root.warnings))

    def classify_region(self, state: SteadyState) -> str:
        """
        LED / intermediate / lasing by 5% proximity to the two asymptotic inversions.
        LED also needs P below max(Pth, 1).
        """
        solver = self._for_state(state)
        N = state.N
        N_nf = state.N_nofluct if state.N_nofluct is not None else solver.nofluct.solve_N().N
        if state.N_highpump is not None:
            N_hp = state.N_highpump
        else:
            highpump = solver.highpump_closed_form()
            N_hp = highpump.N if highpump.admissible else None
        tolerance = REGION_TOLERANCE * abs(N)
        led = state.P < max(solver.derived.Pth, 1.0) and abs(N - N_nf) <= tolerance
        lasing = N_hp is not None and abs(N - N_hp) <= tolerance
        if led:
            return "LED"
        return "lasing" if lasing else "intermediate"

    # --- linewidth and energy ---

    def linewidth_high(self, state: SteadyState) -> LinewidthResult:
        """High-excitation power-form linewidth with Nsp = (N0 + Nth)/(2 Nth)"""
        solver = self._for_state(state)
        p, d = solver.params, solver.derived
        if not state.n > 0:
            raise PhysicsDomainError("linewidth undefined: n = 0")
        gamma = power_form_high(d.gamma_c, spontaneous_factor(p.N0, d.Nth), 2.0 * p.kappa * state.n)
        return LinewidthResult(gamma, solver.nofluct.r_parameter(state.N), "power_form_high",
                               solver.nofluct.is_split(state.N), state.N, state.n)

    def linewidth_summary(self, state: SteadyState) -> Dict:
        """Linewidth at the solved state next to its low- and high-pump asymptotes"""
        solver = self._for_state(state)
        nf = solver.nofluct
        row = {"P": state.P, "N": state.N, "n": state.n,
               "split": nf.is_split(state.N),
               "gamma_las": nf.linewidth(state.N, "exact", allow_split=True).gamma_las,
               "gamma_low_asymptote": nf.linewidth(state.N_nofluct, "exact", allow_split=True).gamma_las,
               "gamma_high_asymptote": math.nan, "gamma_power_low": math.nan, "gamma_power_high": math.nan}
        if state.N_highpump is not None:
            row["gamma_high_asymptote"] = nf.linewidth(state.N_highpump, "exact", allow_split=True).gamma_las
        if state.n_nofluct and state.n_nofluct > 0:
            row["gamma_power_low"] = nf.linewidth(state.N_nofluct, "power_form_low").gamma_las
        if state.n > 0:
            row["gamma_power_high"] = solver.linewidth_high(state).gamma_las
        return row

    def energy_split(self, state: SteadyState) -> Dict[str, float]:
        """Share of the photon number held by the S and A combinations"""
        if not state.n > 0:
            raise PhysicsDomainError("energy split undefined: n = 0")
        return {"nS_fraction": state.nS / state.n, "nA_fraction": state.nA / state.n}
