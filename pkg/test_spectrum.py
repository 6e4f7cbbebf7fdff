"""
Tests for the spectrum container and the composite frequency grid
"""

import numpy as np
import pytest

from errors import ConfigError
from spectrum import GridSpec, Spectrum, composite_grid


def test_composite_grid_shape():
    grid = composite_grid(50.0, 700.0)
    assert np.all(np.diff(grid) > 0)
    np.testing.assert_allclose(grid, -grid[::-1])
    assert 0.0 in grid
    assert grid.max() == pytest.approx(4.0 * 700.0)
    assert np.min(np.abs(grid[grid != 0])) == pytest.approx(1e-4)


def test_grid_extends_past_relaxation_oscillations():
    grid = composite_grid(50.0, 50.0, omega_ro=300.0)
    assert grid.max() == pytest.approx(2400.0)


def test_grid_spec_parse():
    spec = GridSpec.parse("1e-3::200:")
    assert spec == GridSpec(w_min=1e-3, w_max=None, n_log=200, n_lin=801)
    grid = composite_grid(1.0, 1.0, spec=GridSpec.parse("::10:11"))
    assert len(grid) <= 2 * (10 + 10) + 1


@pytest.mark.parametrize("text", ["1:2:3", "a:b:c:d", "0:::", "1:0.5::", "::1:"])
def test_grid_spec_rejects(text):
    with pytest.raises(ConfigError):
        GridSpec.parse(text)


def test_spectrum_validation():
    grid = np.array([-1.0, 0.0, 1.0])
    with pytest.raises(ConfigError, match="unknown spectrum kind"):
        Spectrum("X", grid, np.ones(3))
    with pytest.raises(ValueError, match="nonnegative"):
        Spectrum("A", grid, np.array([1.0, -1.0, 1.0]))
    with pytest.raises(ValueError, match="symmetric"):
        Spectrum("A", np.array([-1.0, 0.0, 2.0]), np.ones(3))
    with pytest.raises(ValueError, match="increasing"):
        Spectrum("A", np.array([1.0, 0.0, -1.0]), np.ones(3))


def test_signed_kinds_report_negativity():
    s = Spectrum("full", np.array([-1.0, 0.0, 1.0]), np.array([-0.5, 2.0, -0.5]))
    assert s.max_negativity == pytest.approx(0.25)
    assert s.value_at_zero() == 2.0
    frame = s.scaled(2.0).to_frame("full_x2")
    assert list(frame.columns) == ["omega", "full_x2"]
    assert frame["full_x2"].tolist() == [-1.0, 4.0, -1.0]


if __name__ == "__main__":
    print("🧪 Testing spectrum container")
    test_composite_grid_shape()
    test_spectrum_validation()
    print("✅ Spectrum checks passed")
