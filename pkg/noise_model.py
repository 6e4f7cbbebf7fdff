"""
Diffusion coefficients 2D_ab of the Langevin forces.

One table, consumed by the analytic spectra and by the Monte-Carlo integrator.
Quadrature combinations a_S, a_A mix a and a+ with phases exp(-+i pi/4), so
their coefficients follow from the operator coefficients through the bilinear
combination rule below.
"""

import cmath
import logging
import math
from dataclasses import dataclass, asdict
from typing import Dict

from errors import PhysicsDomainError
from laser_params import DerivedParams, LaserParams

logger = logging.getLogger(__name__)

S_PHASE = -math.pi / 4.0
A_PHASE = math.pi / 4.0


@dataclass(frozen=True)
class NoiseModel:
    D_aa_plus: float        # 2D_{a a+} = 2 kappa
    D_vpv_nofluct: float    # 2D_{v+ v} with populations frozen: f gamma_perp Ne
    D_vpv_full: float       # 2D_{v+ v} = f [gamma_perp Ne + gamma_par (P Ng - Ne)]
    D_vv_plus: float        # 2D_{v v+} = f [gamma_perp Ng - gamma_par (P Ng - Ne)], may be negative
    D_aA: float
    D_aS: float
    D_vA: float
    D_vS: float
    D_NeNe: float           # gamma_par (P Ng + Ne)
    cross_vNe: float = 0.0
    cross_SA: float = 0.0

    def to_dict(self) -> Dict:
        return asdict(self)

    def s_channels(self):
        """Diffusion of (a_S, v_S, dNe), mutually independent"""
        return (self.D_aS, self.D_vS, self.D_NeNe)

    def a_channels(self):
        return (self.D_aA, self.D_vA)


def combine(d_a1a2: complex, d_a1b2: complex, d_b1a2: complex, d_b1b2: complex) -> complex:
    """2D for Q_g1 = Q_a1 + Q_b1 and Q_g2 = Q_a2 + Q_b2"""
    return d_a1a2 + d_a1b2 + d_b1a2 + d_b1b2


def quadrature_coefficient(d_xx: complex, d_xxp: complex, d_xpx: complex, d_xpxp: complex,
                           phase1: float, phase2: float) -> complex:
    """
    2D between the quadratures (x e^{i phase} + x+ e^{-i phase})/2 taken at
    phase1 and phase2, given the four operator coefficients of x and x+.
    """
    e1, e2 = cmath.exp(1j * phase1), cmath.exp(1j * phase2)
    return combine(
        0.25 * d_xx * e1 * e2,
        0.25 * d_xxp * e1 / e2,
        0.25 * d_xpx * e2 / e1,
        0.25 * d_xpxp / (e1 * e2),
    )


def noise_model(p: LaserParams, d: DerivedParams, Ne: float) -> NoiseModel:
    """Diffusion table at upper-level population Ne"""
    if not (0.0 <= Ne <= p.N0):
        raise PhysicsDomainError(f"Ne must lie in [0, N0={p.N0}] (got {Ne})")
    Ng = p.N0 - Ne
    pump_balance = p.gamma_par * (p.P * Ng - Ne)
    D_aa_plus = 2.0 * p.kappa
    D_vpv_full = p.f * (p.gamma_perp * Ne + pump_balance)
    D_vv_plus = p.f * (p.gamma_perp * Ng - pump_balance)
    field_s = quadrature_coefficient(0.0, D_aa_plus, 0.0, 0.0, S_PHASE, S_PHASE)
    field_a = quadrature_coefficient(0.0, D_aa_plus, 0.0, 0.0, A_PHASE, A_PHASE)
    pol_s = quadrature_coefficient(0.0, D_vv_plus, D_vpv_full, 0.0, S_PHASE, S_PHASE)
    pol_a = quadrature_coefficient(0.0, D_vv_plus, D_vpv_full, 0.0, A_PHASE, A_PHASE)
    # S-A cross terms are purely imaginary and cancel in the symmetrized real noise
    cross = quadrature_coefficient(0.0, D_aa_plus, 0.0, 0.0, S_PHASE, A_PHASE)
    cross_sym = cross + quadrature_coefficient(0.0, D_aa_plus, 0.0, 0.0, A_PHASE, S_PHASE)
    return NoiseModel(
        D_aa_plus=D_aa_plus,
        D_vpv_nofluct=p.f * p.gamma_perp * Ne,
        D_vpv_full=D_vpv_full,
        D_vv_plus=D_vv_plus,
        D_aA=field_a.real,
        D_aS=field_s.real,
        D_vA=pol_a.real,
        D_vS=pol_s.real,
        D_NeNe=p.gamma_par * (p.P * Ng + Ne),
        cross_vNe=0.0,
        cross_SA=0.5 * cross_sym.real,
    )
