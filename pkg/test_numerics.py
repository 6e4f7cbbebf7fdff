"""
Tests for the numeric kernel: quadrature with tail, roots, FWHM and peaks
"""

import math

import numpy as np
import pytest

from errors import PhysicsDomainError, SolverError
from numerics import (RESOLVED_PROMINENCE, WINDOW_FACTOR, default_window, find_root, fwhm, integrate_spectrum, off_center_peaks,
                      panel_points, peak_finder)
from spectrum import Spectrum


@pytest.mark.parametrize("width", [1e-3, 1.0, 250.0])
def test_lorentzian_integral_with_tail(width):
    c = 3.0
    total = integrate_spectrum(lambda w: c / (w * w + width * width), c, 1000.0 * width)
    assert total == pytest.approx(c / (2.0 * width), rel=1e-8)


def test_vector_evaluator():
    widths = np.array([0.5, 2.0, 40.0])
    total = integrate_spectrum(lambda w: 1.0 / (w * w + widths ** 2), np.ones(3), 1000.0 * widths.max())
    np.testing.assert_allclose(total, 1.0 / (2.0 * widths), rtol=1e-6)


def test_window_must_be_positive():
    with pytest.raises(SolverError):
        integrate_spectrum(lambda w: 1.0, 0.0, 0.0)


def test_default_window_and_panels():
    assert default_window(50.0, 50.0, 10.0) == pytest.approx(WINDOW_FACTOR * 160.0)
    points = panel_points(100.0)
    assert len(points) == 30
    assert all(0 < x < 100.0 for x in points)
    assert points == sorted(points)


def test_find_root():
    assert find_root(math.cos, (0.0, 3.0)) == pytest.approx(math.pi / 2, abs=1e-12)
    assert find_root(lambda x: x, (0.0, 1.0)) == 0.0
    with pytest.raises(SolverError, match="no sign change"):
        find_root(lambda x: x * x + 1.0, (-1.0, 1.0))


def test_fwhm_of_lorentzian():
    assert fwhm(lambda w: 1.0 / (np.square(w) + 4.0), scale=2.0) == pytest.approx(4.0, rel=1e-9)


def test_fwhm_rejects_split_line():
    def split(w):
        w2 = np.square(w)
        return 1.0 / ((9.0 - w2) ** 2 + w2)
    with pytest.raises(PhysicsDomainError, match="split"):
        fwhm(split, scale=3.0)
    assert fwhm(split, peak_at_zero=False, scale=3.0) > 0


def test_peak_finder():
    grid = np.linspace(-10.0, 10.0, 401)
    values = np.exp(-(grid - 4.0) ** 2) + np.exp(-(grid + 4.0) ** 2)
    spectrum = Spectrum("A", grid, values)
    peaks = peak_finder(spectrum)
    assert len(peaks) == 1
    assert peaks[0][0] == pytest.approx(4.0)
    assert off_center_peaks(spectrum) == peaks

    single = Spectrum("A", grid, 1.0 / (1.0 + grid ** 2))
    peaks = peak_finder(single)
    assert len(peaks) == 1
    assert peaks[0] == pytest.approx((0.0, 1.0))
    assert off_center_peaks(single) == []


@pytest.mark.parametrize("c", [1e-6, 1e6])
def test_width_and_peaks_ignore_value_scale(c):
    def split(w):
        w2 = np.square(w)
        return 1.0 / ((9.0 - w2) ** 2 + w2)
    lorentzian = lambda w: 1.0 / (np.square(w) + 4.0)
    assert fwhm(lambda w: c * lorentzian(w), scale=2.0) == pytest.approx(fwhm(lorentzian, scale=2.0), rel=1e-9)
    assert fwhm(lambda w: c * split(w), peak_at_zero=False, scale=3.0) == pytest.approx(
        fwhm(split, peak_at_zero=False, scale=3.0), rel=1e-9)

    grid = np.linspace(-10.0, 10.0, 401)
    reference = peak_finder(Spectrum("A", grid, split(grid)))
    scaled = peak_finder(Spectrum("A", grid, c * split(grid)))
    assert [w for w, _ in scaled] == [w for w, _ in reference]
    np.testing.assert_allclose([v for _, v in scaled], [c * v for _, v in reference], rtol=1e-12)


def test_shoulder_is_not_a_resolved_peak():
    grid = np.linspace(-10.0, 10.0, 401)
    bump = np.exp(-(np.abs(grid) - 4.0) ** 2)
    shoulder = Spectrum("A", grid, 1.0 / (1.0 + grid ** 2 / 4.0) + 0.2 * bump)
    assert len(off_center_peaks(shoulder)) == 1
    assert off_center_peaks(shoulder, min_prominence=RESOLVED_PROMINENCE) == []

    sideband = Spectrum("A", grid, 1.0 / (1.0 + grid ** 2) + bump)
    peaks = off_center_peaks(sideband, min_prominence=RESOLVED_PROMINENCE)
    assert len(peaks) == 1
    assert peaks[0][0] == pytest.approx(4.0, abs=0.1)


if __name__ == "__main__":
    print("🧪 Testing numeric kernel")
    test_lorentzian_integral_with_tail(1.0)
    test_find_root()
    test_fwhm_of_lorentzian()
    print("✅ Numeric kernel checks passed")
