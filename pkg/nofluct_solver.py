"""
Laser spectrum, stationary inversion and linewidth with population
fluctuations neglected (the inversion operator replaced by its mean).
"""

import logging
import math
from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional

import numpy as np

from errors import PhysicsDomainError, SolverError
from laser_params import DerivedParams, LaserParams, derive
from numerics import find_root
from spectrum import GridSpec, Spectrum, composite_grid

logger = logging.getLogger(__name__)

LINEWIDTH_METHODS = ("exact", "first_order", "power_form_low", "power_form_high")


@dataclass(frozen=True)
class QuadraticRoot:
    """Admissible root of the stationary inversion quadratic and its photon number"""
    N: float
    n: float
    branch: str             # "minus" (literal) or "plus" (fallback)
    admissible: bool
    root_error: float       # Newton step at the returned root, in inversion units
    warnings: List[str] = field(default_factory=list)


@dataclass
class NoFluctState:
    P: float
    N: float
    Ne: float
    Ng: float
    n: float
    two_peak: bool
    Pc: Optional[float] = None
    diagnostics: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class LinewidthResult:
    gamma_las: float
    r: float
    method: str
    split: bool = False
    N: Optional[float] = None
    n: Optional[float] = None

    def to_dict(self) -> Dict:
        return asdict(self)


def quadratic_inversion(P: float, N0: float, Nth: float, beta: float, beta_c: float,
                        inversion_gain: float, source: float, label: str = "no-fluctuation") -> QuadraticRoot:
    """
    Solve beta_c Nth (g N + s) = (Nth - N) [(P-1) N0 - (P+1) N] for N.

    inversion_gain (g) and source (s) select the variant: the no-fluctuation
    balance uses g = 1, s = N0; the high-pump closed form uses g = 0 with
    s = (N0 + Nth)/2. In x = N/Nth the quadratic reads
        (P+1) x^2 - [(P-1)u + P+1 + g beta_c] x + (P-1)u - beta_c s/Nth = 0,   u = N0/Nth.
    The smaller root is taken first and must satisfy -N0 <= N < Nth; otherwise
    the larger root is tried and a warning recorded.
    """
    u = N0 / Nth
    a = P + 1.0
    lin = (P - 1.0) * u + a + inversion_gain * beta_c       # = -b
    c = (P - 1.0) * u - beta_c * source / Nth
    M = (P - 1.0) * u - a - inversion_gain * beta_c
    extra = 4.0 * (P - 1.0) * u * inversion_gain * beta_c + 4.0 * a * beta_c * source / Nth     # Q - M^2
    Q = M * M + extra
    if Q < 0:
        raise SolverError(f"{label} quadratic has no real root at P={P} (discriminant {Q:.6g})")
    sqrtQ = math.sqrt(Q)

    # cancellation-free roots
    if lin >= 0:
        x_plus = (lin + sqrtQ) / (2.0 * a)
        x_minus = (2.0 * c / (lin + sqrtQ)) if lin + sqrtQ > 0 else 0.0
    else:
        x_minus = (lin - sqrtQ) / (2.0 * a)
        x_plus = 2.0 * c / (lin - sqrtQ)

    def admissible(x: float) -> bool:
        return -u * (1.0 + 1e-12) <= x < 1.0

    def root_error(x: float) -> float:
        value = a * x * x - lin * x + c
        slope = 2.0 * a * x - lin
        return abs(value / slope) * Nth if slope != 0 else abs(value) * Nth

    def energy_law_n(x: float) -> float:
        # (gamma_par/4 kappa)[(P-1) N0 - (P+1) N] with gamma_par/(4 kappa) = 1/(2 beta Nth)
        return ((P - 1.0) * u - a * x) / (2.0 * beta)

    warnings = []
    if admissible(x_minus):
        x, branch = x_minus, "minus"
        # (M + sqrt Q) / (4 beta), rewritten for M < 0
        mq = M + sqrtQ if M >= 0 else (extra / (sqrtQ - M) if sqrtQ - M > 0 else 0.0)
        n = mq / (4.0 * beta)
    elif admissible(x_plus):
        x, branch = x_plus, "plus"
        n = energy_law_n(x)
        warnings.append(f"{label} root: literal branch N={x_minus * Nth:.6g} outside [-N0, Nth); "
                        f"took the other branch N={x_plus * Nth:.6g}")
        logger.warning("⚠️ %s", warnings[-1])
    else:
        return QuadraticRoot(N=x_minus * Nth, n=energy_law_n(x_minus), branch="minus", admissible=False,
                             root_error=root_error(x_minus),
                             warnings=[f"{label} quadratic has no root in [-N0, Nth) at P={P}"])
    return QuadraticRoot(N=x * Nth, n=max(n, 0.0), branch=branch, admissible=True,
                         root_error=root_error(x), warnings=warnings)


def power_form_low(gamma_c: float, spont_factor: float, W_out: float) -> float:
    """gamma_c^2 * spont_factor / W_out, with W_out = 2 kappa n in photon-energy units"""
    if not W_out > 0:
        raise PhysicsDomainError("linewidth undefined: no output power (n = 0)")
    return gamma_c ** 2 * spont_factor / W_out


def power_form_high(gamma_c: float, spont_factor: float, W_out: float) -> float:
    """High-excitation power form, half of power_form_low at equal arguments"""
    return 0.5 * power_form_low(gamma_c, spont_factor, W_out)


def exact_linewidth(kappa: float, gamma_perp: float, r: float) -> float:
    """Closed-form FWHM of the no-fluctuation spectrum (half the central value when split)"""
    if r <= 0:
        return 0.0
    brace = r - 1.0 + math.hypot(r - 1.0, r)
    return (2.0 * kappa + gamma_perp) / math.sqrt(2.0) * math.sqrt(brace)


class NoFluctSolver:
    """
    Stationary solution of the linearized field/polarization equations with a
    frozen inversion.

    Args:
        params: working parameters; params.P is the pump used by solve()
    """

    def __init__(self, params: LaserParams):
        self.params = params.validate()
        self.derived: DerivedParams = derive(params)

    def at_pump(self, P: float) -> "NoFluctSolver":
        return NoFluctSolver(self.params.with_pump(P))

    # --- populations ---

    def populations(self, N: float):
        """(Ne, Ng) for inversion N"""
        Ne = 0.5 * (N + self.params.N0)
        return Ne, self.params.N0 - Ne

    def _check_below_threshold(self, N: float) -> None:
        if not N < self.derived.Nth:
            raise PhysicsDomainError(
                f"no stationary no-fluctuation spectrum at/above threshold (N={N:.6g} >= Nth={self.derived.Nth:.6g})"
            )

    def r_parameter(self, N: float) -> float:
        p = self.params
        return 4.0 * p.kappa * p.gamma_perp / (2.0 * p.kappa + p.gamma_perp) ** 2 * (1.0 - N / self.derived.Nth)

    def is_split(self, N: float) -> bool:
        d = self.derived
        return d.Nc < self.params.N0 and N < -d.Nc

    # --- stationary inversion ---

    def solve_N(self) -> NoFluctState:
        """Stationary inversion from the no-fluctuation quadratic"""
        p, d = self.params, self.derived
        root = quadratic_inversion(p.P, p.N0, d.Nth, d.beta_tilde, d.beta_tilde_c,
                                   inversion_gain=1.0, source=float(p.N0))
        if not root.admissible:
            raise SolverError(f"internal inconsistency: {root.warnings[0]}")
        N = max(root.N, -float(p.N0))
        Ne, Ng = self.populations(N)
        n = 0.0 if Ne == 0.0 else root.n
        state = NoFluctState(
            P=p.P, N=N, Ne=Ne, Ng=Ng, n=n,
            two_peak=self.is_split(N),
            diagnostics={"branch": root.branch, "root_error": root.root_error, "warnings": list(root.warnings)},
        )
        logger.info("✅ No-fluctuation state at P=%.4g: N=%.6g, n=%.6g", p.P, N, n)
        return state

    # --- spectrum ---

    def density(self, omega, N: float):
        """Spectral density n(omega) at inversion N (vectorized over omega)"""
        p, d = self.params, self.derived
        self._check_below_threshold(N)
        Ne, _ = self.populations(N)
        A = (1.0 - N / d.Nth) * p.kappa * p.gamma_perp / 2.0
        B = p.kappa + p.gamma_perp / 2.0
        w2 = np.square(omega)
        return (p.kappa * p.gamma_perp ** 2 / 2.0) * (Ne / d.Nth) / ((A - w2) ** 2 + B * B * w2)

    def spectrum(self, N: float, grid: Optional[np.ndarray] = None, grid_spec: Optional[GridSpec] = None) -> Spectrum:
        p = self.params
        self._check_below_threshold(N)
        if grid is None:
            grid = composite_grid(p.kappa, p.gamma_perp, spec=grid_spec)
        meta = {"kind": "nofluct", "P": p.P, "N": N, "params": p.to_dict()}
        return Spectrum("nofluct", grid, self.density(grid, N), meta)

    def photon_number(self, N: float) -> float:
        """gamma_perp Ne / ((2 kappa + gamma_perp)(Nth - N))"""
        p, d = self.params, self.derived
        self._check_below_threshold(N)
        Ne, _ = self.populations(N)
        return p.gamma_perp * Ne / ((2.0 * p.kappa + p.gamma_perp) * (d.Nth - N))

    # --- linewidth ---

    def linewidth(self, N: float, method: str = "exact", allow_split: bool = False,
                  n: Optional[float] = None) -> LinewidthResult:
        """
        FWHM of the no-fluctuation spectrum at inversion N.

        exact and first_order need a single-peaked line (N >= -Nc) unless
        allow_split is set, in which case exact returns the width at half the
        central value. The power forms use n (default: the no-fluctuation
        photon number at N) for the output power.
        """
        if method not in LINEWIDTH_METHODS:
            raise ValueError(f"unknown linewidth method {method!r}; valid: {', '.join(LINEWIDTH_METHODS)}")
        p, d = self.params, self.derived
        if N > d.Nth:
            raise PhysicsDomainError(f"linewidth undefined above threshold inversion (N={N:.6g})")
        r = self.r_parameter(N)
        split = self.is_split(N)
        if method in ("exact", "first_order") and split and not allow_split:
            raise PhysicsDomainError(f"FWHM undefined for split spectrum (N={N:.6g} < -Nc={-d.Nc:.6g})")
        if method == "exact":
            return LinewidthResult(exact_linewidth(p.kappa, p.gamma_perp, r), r, method, split, N, n)
        if method == "first_order":
            if r > 1.0:
                logger.warning("⚠️ first-order linewidth used at r=%.3g > 1", r)
            return LinewidthResult(d.gamma_c * (1.0 - N / d.Nth), r, method, split, N, n)

        if n is None:
            n = self.photon_number(N)
        W_out = 2.0 * p.kappa * n
        if method == "power_form_low":
            Ne, _ = self.populations(N)
            gamma = power_form_low(d.gamma_c, Ne / d.Nth, W_out)
        else:
            gamma = power_form_high(d.gamma_c, spontaneous_factor(p.N0, d.Nth), W_out)
        return LinewidthResult(gamma, r, method, split, N, n)

    # --- splitting boundary ---

    def solve_Pc(self, max_doublings: int = 60) -> Optional[float]:
        """Pump at which N(P) = -Nc; None when Nc >= N0 (no splitting regime)"""
        p, d = self.params, self.derived
        if d.Nc >= p.N0:
            logger.info("ℹ️ Nc=%.4g >= N0=%s: no splitting regime", d.Nc, p.N0)
            return None

        def gap(P: float) -> float:
            return self.at_pump(P).solve_N().N + d.Nc

        low, high = 0.0, max(d.Pth, 1.0)
        for _ in range(max_doublings):
            if gap(high) > 0:
                break
            low, high = high, 2.0 * high
        else:
            raise SolverError(f"splitting boundary not bracketed below P={high:.6g}")
        Pc = find_root(gap, (low, high), tol=1e-12 * max(1.0, high))
        logger.info("✅ Splitting boundary Pc=%.6g (Pth=%.6g)", Pc, d.Pth)
        return Pc

    # --- diagnostics ---

    def commutator_defect(self, n: float) -> float:
        """Field commutator under the truncated polarization diffusion; 1 at n = 0"""
        if n < 0:
            raise PhysicsDomainError(f"photon number must be >= 0 (got {n})")
        p, d = self.params, self.derived
        return 1.0 - 4.0 * p.kappa * n / (p.gamma_perp * (d.Nth + p.N0)) * (
            2.0 * n + 1.0 / (1.0 + 2.0 * p.kappa / p.gamma_perp)
        )


def spontaneous_factor(N0: float, Nth: float) -> float:
    """Nsp = (N0 + Nth) / (2 Nth)"""
    return (N0 + Nth) / (2.0 * Nth)
