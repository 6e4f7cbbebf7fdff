"""
Stationary semiclassical laser solution (no Langevin forces)
"""

import logging
from dataclasses import dataclass, asdict
from typing import Dict

from laser_params import DerivedParams, LaserParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SemiclassicalState:
    n: float
    N: float
    Ne: float
    Ng: float
    lasing: bool
    lasing_possible: bool

    def to_dict(self) -> Dict:
        return asdict(self)


def semiclassical_state(p: LaserParams, d: DerivedParams) -> SemiclassicalState:
    """
    Above threshold the inversion is clamped at Nth and the photon number follows
    from energy conservation, 2 kappa n = gamma_par (P Ng - Ne). Below threshold
    n = 0 and the inversion is the pump balance N0 (P-1)/(P+1).
    """
    lasing_possible = d.lasing_possible
    if not lasing_possible:
        logger.info("⚠️ N0=%s <= Nth=%.4g: no semiclassical lasing possible", p.N0, d.Nth)
    lasing = lasing_possible and p.P > d.Pth
    if lasing:
        N = d.Nth
        Ne = 0.5 * (N + p.N0)
        Ng = p.N0 - Ne
        n = p.gamma_par * (p.P * Ng - Ne) / (2.0 * p.kappa)
    else:
        N = p.N0 * (p.P - 1.0) / (p.P + 1.0)
        Ne = 0.5 * (N + p.N0)
        Ng = p.N0 - Ne
        n = 0.0
    return SemiclassicalState(n=n, N=N, Ne=Ne, Ng=Ng, lasing=lasing, lasing_possible=lasing_possible)


def semiclassical_photon_number(p: LaserParams, d: DerivedParams) -> float:
    """(gamma_par/4 kappa)(N0+Nth)(P/Pth-1) above threshold, 0 below"""
    if not d.lasing_possible or p.P <= d.Pth:
        return 0.0
    return p.gamma_par / (4.0 * p.kappa) * (p.N0 + d.Nth) * (p.P / d.Pth - 1.0)
