"""
Numeric kernel shared by the solvers: spectral quadrature with an analytic
1/omega^2 tail, bracketed root refinement, numeric FWHM and peak finding.
"""

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate, optimize, signal

from errors import PhysicsDomainError, SolverError
from spectrum import Spectrum

logger = logging.getLogger(__name__)

ArrayOrFloat = Union[float, np.ndarray]

QUAD_EPSREL = 1e-10
WINDOW_FACTOR = 200.0
RESOLVED_PROMINENCE = 0.1


def default_window(kappa: float, gamma_perp: float, omega_ro: float = 0.0) -> float:
    return WINDOW_FACTOR * (2.0 * kappa + gamma_perp + omega_ro)


def panel_points(window: float, decades: int = 10, per_decade: int = 3) -> List[float]:
    """Geometric breakpoints inside (0, window) so narrow central lines are never stepped over"""
    edges = np.geomspace(window * 10.0 ** (-decades), window, decades * per_decade + 1)
    return [float(x) for x in edges[:-1]]


def integrate_spectrum(evaluator: Callable[[float], ArrayOrFloat],
                       tail_coefficient: ArrayOrFloat,
                       window: float,
                       points: Optional[Sequence[float]] = None,
                       epsrel: float = QUAD_EPSREL) -> ArrayOrFloat:
    """
    (1/2pi) * integral of an even spectral density over the whole real line.

    The density is integrated adaptively on |omega| <= window; beyond the window
    it is replaced by its leading tail c/omega^2, contributing c/window per side.
    The evaluator may return an array (one density per component), in which case
    tail_coefficient broadcasts against it.

    Raises:
        SolverError: adaptive refinement did not converge
    """
    if not window > 0:
        raise SolverError(f"integration window must be > 0 (got {window})")
    breaks = sorted(set(panel_points(window)) | {float(x) for x in (points or []) if 0.0 < x < window})
    result, error, info = integrate.quad_vec(
        evaluator, 0.0, window, epsrel=epsrel, norm="max", points=breaks, full_output=True
    )
    if info.status != 0:
        raise SolverError(
            f"spectral quadrature did not converge (status {info.status}, "
            f"{len(info.intervals)} panels, {info.neval} evaluations, error estimate {np.max(error):.3g})"
        )
    total = 2.0 * np.asarray(result) + 2.0 * np.asarray(tail_coefficient) / window
    total = total / (2.0 * math.pi)
    return float(total) if np.ndim(total) == 0 else total


def find_root(f: Callable[[float], float], bracket: Tuple[float, float], tol: float = 1e-12,
              maxiter: int = 200) -> float:
    """Brent refinement of a sign change on bracket"""
    a, b = bracket
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return float(a)
    if fb == 0.0:
        return float(b)
    if np.sign(fa) == np.sign(fb):
        raise SolverError(f"no sign change on [{a:.6g}, {b:.6g}]: f(a)={fa:.6g}, f(b)={fb:.6g}")
    root, info = optimize.brentq(f, a, b, xtol=tol, rtol=4 * np.finfo(float).eps,
                                 maxiter=maxiter, full_output=True, disp=False)
    if not info.converged:
        raise SolverError(f"root refinement stopped after {info.iterations} iterations: {info.flag}")
    return float(root)


def _sample(evaluator, grid: np.ndarray) -> np.ndarray:
    return np.asarray(evaluator(grid), dtype=float) * np.ones_like(grid)


def fwhm(evaluator: Callable[[ArrayOrFloat], ArrayOrFloat], peak_at_zero: bool = True,
         scale: float = 1.0, n_samples: int = 2000) -> float:
    """
    Full width at half maximum of an even, vectorized spectral density.

    With peak_at_zero the maximum must sit at omega=0; an off-center global
    maximum means the line is split and the width is undefined. Without it the
    width is measured around the largest off-center maximum.
    """
    w = abs(scale) or 1.0
    for _ in range(200):
        grid = np.union1d(np.geomspace(w * 1e-8, w, n_samples // 2), np.linspace(0.0, w, n_samples // 2))
        values = _sample(evaluator, grid)
        peak = 0 if peak_at_zero else int(np.argmax(values))
        if values[peak] <= 0:
            raise PhysicsDomainError("spectral density is not positive; no half maximum")
        if values[-1] < values[peak] / 2.0:
            break
        w *= 2.0
    else:
        raise SolverError("half maximum not reached while expanding the search window")

    if peak_at_zero and values.max() > values[0] * (1.0 + 1e-9):
        raise PhysicsDomainError(
            f"split spectrum: global maximum at omega={grid[int(np.argmax(values))]:.6g}, FWHM undefined"
        )
    half_top = values[peak] / 2.0

    def crossing(indices) -> float:
        previous = peak
        for i in indices:
            if values[i] <= half_top:
                return find_root(lambda x: float(evaluator(x)) - half_top, (grid[previous], grid[i]))
            previous = i
        raise PhysicsDomainError("half maximum not crossed on this side of the peak")

    right = crossing(range(peak + 1, len(grid)))
    if peak == 0:
        return 2.0 * right
    left = crossing(range(peak - 1, -1, -1))
    return right - left


def peak_finder(spectrum: Union[Spectrum, Tuple[np.ndarray, np.ndarray]]) -> List[Tuple[float, float]]:
    """Strict local maxima at omega >= 0 (symmetric pairs reported once)"""
    if isinstance(spectrum, Spectrum):
        grid, values = spectrum.grid, spectrum.values
    else:
        grid, values = (np.asarray(x, dtype=float) for x in spectrum)
    mask = grid >= 0
    omega, v = grid[mask], values[mask]
    peaks = []
    if len(v) >= 2 and v[0] > v[1]:
        # omega=0 neighbours the mirrored point on the other side
        peaks.append((float(omega[0]), float(v[0])))
    inner = np.where((v[1:-1] > v[:-2]) & (v[1:-1] > v[2:]))[0] + 1
    peaks.extend((float(omega[i]), float(v[i])) for i in inner)
    return peaks


def off_center_peaks(spectrum: Spectrum, min_prominence: float = 0.0) -> List[Tuple[float, float]]:
    """
    Local maxima at omega > 0 whose prominence is at least min_prominence of their own height.
    Shoulders on the flank of the central line have a small relative prominence.
    """
    peaks = [(w, v) for w, v in peak_finder(spectrum) if w > 0]
    if not peaks or min_prominence <= 0:
        return peaks
    mask = spectrum.grid >= 0
    omega, values = spectrum.grid[mask], spectrum.values[mask]
    indices = np.searchsorted(omega, [w for w, _ in peaks])
    prominence = signal.peak_prominences(values, indices)[0] / values[indices]
    return [peak for peak, rel in zip(peaks, prominence) if rel >= min_prominence]
