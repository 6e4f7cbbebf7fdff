"""
Spectrum container and frequency grids
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
import pandas as pd

from errors import ConfigError

logger = logging.getLogger(__name__)

SPECTRUM_KINDS = ("nofluct", "A", "S", "AS", "full", "rf", "population")
NONNEGATIVE_KINDS = ("nofluct", "A", "S", "rf", "population")


@dataclass(frozen=True)
class GridSpec:
    """
    Composite frequency grid: logarithmic points from w_min to w_max joined to
    a uniform grid on [0, w_max], mirrored to negative frequencies with 0 included.
    w_max=None means 4*max(gamma_perp, 2*kappa, 2*omega_ro).
    """
    w_min: float = 1e-4
    w_max: Optional[float] = None
    n_log: int = 400
    n_lin: int = 801

    def validate(self) -> "GridSpec":
        if not self.w_min > 0:
            raise ConfigError(f"grid w_min must be > 0 (got {self.w_min})")
        if self.w_max is not None and not self.w_max > self.w_min:
            raise ConfigError(f"grid w_max must exceed w_min (got {self.w_max})")
        if self.n_log < 2 or self.n_lin < 3:
            raise ConfigError(f"grid needs n_log >= 2 and n_lin >= 3 (got {self.n_log}, {self.n_lin})")
        return self

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse 'WMIN:WMAX:NLOG:NLIN'; blank fields keep their defaults"""
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError(f"grid spec must look like WMIN:WMAX:NLOG:NLIN (got {text!r})")
        base = cls()
        try:
            return cls(
                w_min=float(parts[0]) if parts[0] else base.w_min,
                w_max=float(parts[1]) if parts[1] else base.w_max,
                n_log=int(parts[2]) if parts[2] else base.n_log,
                n_lin=int(parts[3]) if parts[3] else base.n_lin,
            ).validate()
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid grid spec {text!r}: {exc}") from exc


def composite_grid(kappa: float, gamma_perp: float, omega_ro: float = 0.0,
                   spec: Optional[GridSpec] = None) -> np.ndarray:
    """Symmetric, strictly increasing grid resolving narrow lines on a wide background"""
    spec = (spec or GridSpec()).validate()
    w_max = spec.w_max or 4.0 * max(gamma_perp, 2.0 * kappa, 2.0 * omega_ro)
    w_min = min(spec.w_min, w_max / 10.0)
    positive = np.union1d(np.geomspace(w_min, w_max, spec.n_log),
                          np.linspace(0.0, w_max, spec.n_lin)[1:])
    # merge points that coincide to rounding
    keep = np.concatenate([[True], np.diff(positive) > 1e-12 * w_max])
    positive = positive[keep]
    return np.concatenate([-positive[::-1], [0.0], positive])


@dataclass
class Spectrum:
    """Spectral density on a frequency grid, with provenance metadata"""
    kind: str
    grid: np.ndarray
    values: np.ndarray
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.kind not in SPECTRUM_KINDS:
            raise ConfigError(f"unknown spectrum kind {self.kind!r}; valid kinds: {', '.join(SPECTRUM_KINDS)}")
        if self.grid.shape != self.values.shape:
            raise ValueError("grid and values must have the same shape")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("spectrum grid must be strictly increasing")
        if not np.allclose(self.grid, -self.grid[::-1], rtol=0.0, atol=1e-12 * max(1.0, np.abs(self.grid).max())):
            raise ValueError("spectrum grid must be symmetric about 0")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"{self.kind} spectrum has non-finite values")
        if self.kind in NONNEGATIVE_KINDS and np.any(self.values < 0):
            raise ValueError(f"{self.kind} spectrum must be nonnegative")

    @property
    def max_negativity(self) -> float:
        """Largest negative excursion relative to the peak value (0 when nonnegative)"""
        peak = float(np.max(np.abs(self.values))) or 1.0
        return float(max(0.0, -np.min(self.values)) / peak)

    def value_at_zero(self) -> float:
        return float(self.values[np.argmin(np.abs(self.grid))])

    def scaled(self, factor: float, kind: Optional[str] = None) -> "Spectrum":
        return Spectrum(kind or self.kind, self.grid.copy(), self.values * factor, dict(self.meta))

    def to_frame(self, column: Optional[str] = None) -> pd.DataFrame:
        return pd.DataFrame({"omega": self.grid, column or self.kind: self.values})
