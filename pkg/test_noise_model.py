"""
Tests for the Langevin diffusion table
"""

import math

import pytest

from errors import PhysicsDomainError
from laser_params import LaserParams, derive
from noise_model import A_PHASE, S_PHASE, combine, noise_model, quadrature_coefficient


def laser(P=2.0, gamma_perp=50.0):
    return LaserParams(kappa=50.0, gamma_perp=gamma_perp, omega_rabi=34.0, f=0.5, N0=100, P=P).validate()


@pytest.mark.parametrize("Ne", [0.0, 30.0, 51.0, 100.0])
def test_quadrature_coefficients(Ne):
    p = laser()
    noise = noise_model(p, derive(p), Ne)
    assert noise.D_aS == pytest.approx(p.kappa / 2.0)
    assert noise.D_aA == pytest.approx(p.kappa / 2.0)
    # polarization noise in either combination does not depend on Ne
    assert noise.D_vS == pytest.approx(p.f * p.gamma_perp * p.N0 / 4.0)
    assert noise.D_vA == pytest.approx(p.f * p.gamma_perp * p.N0 / 4.0)
    assert noise.cross_SA == pytest.approx(0.0, abs=1e-12)
    assert noise.cross_vNe == 0.0


def test_operator_coefficients():
    p = laser(P=3.0)
    noise = noise_model(p, derive(p), 40.0)
    assert noise.D_aa_plus == pytest.approx(2.0 * p.kappa)
    assert noise.D_vpv_nofluct == pytest.approx(p.f * p.gamma_perp * 40.0)
    assert noise.D_vpv_full == pytest.approx(p.f * (p.gamma_perp * 40.0 + 3.0 * 60.0 - 40.0))
    assert noise.D_vpv_full + noise.D_vv_plus == pytest.approx(p.f * p.gamma_perp * p.N0)
    assert noise.D_NeNe == pytest.approx(3.0 * 60.0 + 40.0)
    assert noise.s_channels() == (noise.D_aS, noise.D_vS, noise.D_NeNe)
    assert noise.a_channels() == (noise.D_aA, noise.D_vA)


def test_vv_plus_turns_negative_at_high_pump():
    p = laser(P=200.0)
    noise = noise_model(p, derive(p), 51.08)
    assert noise.D_vv_plus < 0


@pytest.mark.parametrize("Ne", [-1.0, 100.5])
def test_population_out_of_range(Ne):
    p = laser()
    with pytest.raises(PhysicsDomainError, match="Ne must lie"):
        noise_model(p, derive(p), Ne)


def test_combination_rule():
    assert combine(1, 2, 3, 4) == 10
    # at zero phase the quadrature is the Hermitian part, a quarter of each operator pair
    assert quadrature_coefficient(1.0, 2.0, 3.0, 4.0, 0.0, 0.0) == pytest.approx(2.5)
    value = quadrature_coefficient(0.0, 1.0, 0.0, 0.0, S_PHASE, A_PHASE)
    assert value == pytest.approx(0.25 * complex(math.cos(-math.pi / 2), math.sin(-math.pi / 2)))


if __name__ == "__main__":
    print("🧪 Testing noise model")
    test_operator_coefficients()
    test_combination_rule()
    print("✅ Noise model checks passed")
