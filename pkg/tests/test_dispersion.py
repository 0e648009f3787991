"""Sellmeier dispersion, angle tuning, phase mismatch, and cut-angle calibration."""

import dataclasses
import math

import numpy as np
import pytest

from pairspec import units
from pairspec.dispersion import (
    BBO_EXTRAORDINARY,
    BBO_ORDINARY,
    CALIBRATED_CUT_ANGLE_DEG,
    CALIBRATION_TOLERANCE,
    CrystalConfig,
    NoPhaseMatchError,
    SellmeierSet,
    WavelengthRangeError,
    bbo_type_ii,
    calibrate_cut_angle,
    delta_k,
    index_extraordinary_angled,
    index_ordinary,
    phase_match_sinc,
    wave_number,
)

# Constant-index medium: identical o and e branches make delta_k vanish
# identically once energy is conserved.
CONST_INDEX = SellmeierSet("constant", (2.25,), (0.1, 10.0))


def test_principal_indices_at_sodium_d_line():
    assert index_ordinary(0.5893, BBO_ORDINARY) == pytest.approx(
        1.6696961087253648, rel=1e-12
    )
    crystal = bbo_type_ii()
    assert index_extraordinary_angled(0.5893, 90.0, crystal) == pytest.approx(
        1.5516368987034594, rel=1e-12
    )


def test_normal_dispersion_in_transparency_window():
    lam = np.linspace(0.4, 1.2, 50)
    for sellmeier in (BBO_ORDINARY, BBO_EXTRAORDINARY):
        n = index_ordinary(lam, sellmeier)
        assert np.all(np.diff(n) < 0.0)
        assert np.all(n > 1.0)


def test_wavelength_outside_validity_raises():
    with pytest.raises(WavelengthRangeError):
        index_ordinary(0.1, BBO_ORDINARY)
    with pytest.raises(WavelengthRangeError):
        index_ordinary(6.0, BBO_ORDINARY)
    # one bad element in an array is enough
    with pytest.raises(WavelengthRangeError) as err:
        index_ordinary(np.array([0.5, 5.9]), BBO_ORDINARY)
    assert "5.9" in str(err.value)


def test_angle_tuned_index_limits_and_monotonicity():
    crystal = bbo_type_ii()
    n_o = index_ordinary(0.8, BBO_ORDINARY)
    n_e = index_ordinary(0.8, BBO_EXTRAORDINARY)
    assert index_extraordinary_angled(0.8, 0.0, crystal) == pytest.approx(n_o, rel=1e-14)
    assert index_extraordinary_angled(0.8, 90.0, crystal) == pytest.approx(n_e, rel=1e-14)
    angles = np.linspace(0.0, 90.0, 19)
    n = np.array([index_extraordinary_angled(0.8, a, crystal) for a in angles])
    # negative uniaxial: index falls from n_o to n_e as theta grows
    assert np.all(np.diff(n) < 0.0)
    assert np.all((n >= n_e - 1e-12) & (n <= n_o + 1e-12))


def test_wave_number_matches_index_times_vacuum_wavenumber():
    crystal = bbo_type_ii()
    omega = units.omega_from_nm(883.0)
    k = wave_number(omega, "o", crystal)
    n = index_ordinary(883.0e-3, BBO_ORDINARY)
    assert k == pytest.approx(n * omega / units.C_VACUUM, rel=1e-14)
    with pytest.raises(ValueError):
        wave_number(0.0, "o", crystal)
    with pytest.raises(ValueError):
        wave_number(-1.0e15, "e", crystal)


def test_delta_k_is_collinear_wavenumber_balance():
    crystal = bbo_type_ii()
    omega_s = units.omega_from_nm(883.0)
    omega_i = units.omega_from_nm(837.0286785793074)
    omega_p = omega_s + omega_i
    k_s = wave_number(omega_s, crystal.signal_polarization, crystal, "signal")
    k_i = wave_number(omega_i, crystal.idler_polarization, crystal, "idler")
    k_p = wave_number(omega_p, crystal.pump_polarization, crystal, "pump")
    assert delta_k(omega_s, omega_i, crystal) == pytest.approx(
        k_s + k_i - k_p, abs=1e-9
    )


def test_sinc_envelope_peak_series_and_first_zero():
    length = 1.0e-3
    assert phase_match_sinc(0.0, length) == 1.0
    # series and direct branches agree across the switchover
    x_cut = 1e-4
    for factor in (0.5, 0.99, 1.01, 2.0):
        x = factor * x_cut
        dk = 2.0 * x / length
        direct = math.sin(x) / x
        assert phase_match_sinc(dk, length) == pytest.approx(direct, rel=1e-12)
    # first zero at delta_k * L / 2 = pi
    dk_zero = 2.0 * math.pi / length
    assert abs(phase_match_sinc(dk_zero, length)) < 1e-15
    with pytest.raises(ValueError):
        phase_match_sinc(1.0, 0.0)


def test_calibrated_angle_reproduces_frozen_constant():
    crystal = bbo_type_ii()
    theta = calibrate_cut_angle(crystal, 883.0, 429.7)
    assert theta == pytest.approx(CALIBRATED_CUT_ANGLE_DEG, abs=1e-9)
    # calibration is deterministic
    assert calibrate_cut_angle(crystal, 883.0, 429.7) == theta
    # the solved angle really nulls the collinear mismatch
    solved = dataclasses.replace(crystal, cut_angle_deg=theta)
    omega_s = units.omega_from_nm(883.0)
    omega_i = units.omega_from_nm(1.0 / (1.0 / 429.7 - 1.0 / 883.0))
    assert abs(delta_k(omega_s, omega_i, solved)) < CALIBRATION_TOLERANCE


def test_calibration_rejects_unreachable_targets():
    crystal = bbo_type_ii()
    # far-infrared signal: mismatch never changes sign on [0, 90] deg
    with pytest.raises(NoPhaseMatchError):
        calibrate_cut_angle(crystal, 4000.0, 429.7)
    # signal at or below the pump cannot conserve energy
    with pytest.raises(NoPhaseMatchError):
        calibrate_cut_angle(crystal, 429.7, 429.7)
    with pytest.raises(NoPhaseMatchError):
        calibrate_cut_angle(crystal, 400.0, 429.7)
    # near-pump signal pushes the conjugate idler beyond the dispersion data
    with pytest.raises(WavelengthRangeError):
        calibrate_cut_angle(crystal, 450.0, 429.7)


def test_calibration_degenerate_when_dispersionless():
    crystal = CrystalConfig(sellmeier_o=CONST_INDEX, sellmeier_e=CONST_INDEX)
    assert calibrate_cut_angle(crystal, 883.0, 429.7) == 45.0


def test_crystal_config_validation():
    with pytest.raises(ValueError):
        CrystalConfig(thickness_mm=0.0)
    with pytest.raises(ValueError):
        CrystalConfig(cut_angle_deg=91.0)
    with pytest.raises(ValueError):
        CrystalConfig(signal_polarization="x")
    crystal = bbo_type_ii(thickness_mm=0.5)
    assert crystal.thickness_m == pytest.approx(0.5e-3, rel=1e-15)
    assert crystal.polarizations == {"pump": "e", "signal": "o", "idler": "e"}


def test_sellmeier_set_validation():
    with pytest.raises(ValueError):
        SellmeierSet("bad", (1.0, 0.5), (0.2, 2.0))  # dangling resonance term
    with pytest.raises(ValueError):
        SellmeierSet("bad", (1.0,), (2.0, 0.2))  # inverted validity range
