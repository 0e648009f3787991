"""Gaussian-band absorbance models and Beer-Lambert transmittance."""

import math

import numpy as np
import pytest

from pairspec.sample import (
    AbsorbanceBand,
    AbsorbanceModel,
    absorbance,
    neodymium_glass,
    transmittance,
)


def test_band_and_model_validation():
    with pytest.raises(ValueError):
        AbsorbanceBand(600.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        AbsorbanceBand(600.0, 25.0, -0.5)
    with pytest.raises(ValueError):
        AbsorbanceModel(baseline=-0.1)
    with pytest.raises(ValueError):
        AbsorbanceModel(thickness_scale=-1.0)
    # bare tuples coerce to bands
    model = AbsorbanceModel(bands=((600.0, 25.0, 1.0),))
    assert model.bands[0] == AbsorbanceBand(600.0, 25.0, 1.0)


def test_empty_model_is_fully_transparent():
    model = AbsorbanceModel()
    lam = np.linspace(500.0, 1000.0, 11)
    assert np.all(absorbance(model, lam) == 0.0)
    assert np.all(transmittance(model, lam) == 1.0)


def test_single_band_peak_and_half_maximum():
    model = AbsorbanceModel(bands=(AbsorbanceBand(800.0, 30.0, 1.2),), baseline=0.05)
    assert absorbance(model, 800.0) == pytest.approx(1.25, rel=1e-12)
    # band contribution halves at center +- fwhm/2
    for lam in (785.0, 815.0):
        assert absorbance(model, lam) == pytest.approx(0.05 + 0.6, rel=1e-12)
    # far wings decay to the baseline
    assert absorbance(model, 1200.0) == pytest.approx(0.05, abs=1e-9)


def test_thickness_scale_multiplies_absorbance():
    base = AbsorbanceModel(bands=(AbsorbanceBand(800.0, 30.0, 1.0),))
    double = AbsorbanceModel(bands=base.bands, thickness_scale=2.0)
    lam = np.linspace(700.0, 900.0, 21)
    assert np.allclose(absorbance(double, lam), 2.0 * absorbance(base, lam), rtol=1e-13)


def test_transmittance_decadic_law_and_roundtrip():
    model = neodymium_glass()
    for a_set, t_expect in ((0.0, 1.0), (1.0, 0.1), (2.0, 0.01)):
        flat = AbsorbanceModel(baseline=a_set)
        assert transmittance(flat, 700.0) == pytest.approx(t_expect, rel=1e-14)
    lam = np.linspace(500.0, 1000.0, 501)
    t = transmittance(model, lam)
    assert np.all((t > 0.0) & (t <= 1.0))
    assert np.allclose(-np.log10(t), absorbance(model, lam), atol=1e-12)


def test_neodymium_preset_band_positions():
    model = neodymium_glass()
    centers = [band.center_nm for band in model.bands]
    assert centers == [580.0, 750.0, 810.0, 870.0]
    assert model.baseline == 0.0
    # strongest absorption sits on the 870 nm line
    assert absorbance(model, 870.0) > absorbance(model, 810.0) > absorbance(model, 750.0)


def test_absorbance_is_smooth_on_fine_grid():
    model = neodymium_glass()
    lam = np.arange(500.0, 1000.0, 0.25)
    a = absorbance(model, lam)
    # second difference bounded by the analytic curvature of the widest band
    second = np.diff(a, 2) / 0.25**2
    curvature_bound = max(
        8.0 * math.log(2.0) * b.peak_absorbance / b.fwhm_nm**2 for b in model.bands
    )
    assert np.max(np.abs(second)) < 2.0 * curvature_bound


def test_nonpositive_wavelength_rejected():
    with pytest.raises(ValueError):
        absorbance(neodymium_glass(), 0.0)
    with pytest.raises(ValueError):
        absorbance(neodymium_glass(), np.array([600.0, -5.0]))
