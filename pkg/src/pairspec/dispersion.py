"""Refractive indices, phase mismatch, and the sinc phase-matching envelope
for a uniaxial nonlinear crystal.

Index data is a configurable resonance expansion evaluated with the
wavelength in micrometers,

    n^2(lam) = A + sum_i B_i lam^2 / (lam^2 - C_i),

the form most published crystal dispersion fits use (coefficients stored as
the flat list ``[A, B1, C1, B2, C2, ...]``). Beta-barium borate coefficients
from Tamosauskas et al., Opt. Mater. Express 8, 1410 (2018) ship as the
default material; any other uniaxial crystal can be configured by supplying
its own coefficient sets.

The extraordinary wave propagating at angle theta to the optic axis sees the
usual index-ellipsoid mix  1/n(theta)^2 = cos^2(theta)/n_o^2 +
sin^2(theta)/n_e^2.  Collinear plane-wave propagation is assumed
throughout; transverse structure and walk-off are not modeled.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import units

ORDINARY = "o"
EXTRAORDINARY = "e"

# |Delta_k| ceiling accepted by calibrate_cut_angle, rad/m
CALIBRATION_TOLERANCE = 1e-3

# switch to the series expansion of sin(x)/x below this |x|
_SINC_SERIES_CUTOFF = 1e-4


class WavelengthRangeError(ValueError):
    """Wavelength outside the validity range of a Sellmeier coefficient set."""

    def __init__(self, wavelength_um, sellmeier, wave="wave"):
        self.wavelength_um = wavelength_um
        self.wave = wave
        lo, hi = sellmeier.valid_um
        super().__init__(
            f"{wave} wavelength {wavelength_um} um outside validity range "
            f"[{lo}, {hi}] um of {sellmeier.name!r}"
        )


class NoPhaseMatchError(ValueError):
    """No cut angle in [0, 90] deg phase-matches the requested wavelengths."""


@dataclass(frozen=True)
class SellmeierSet:
    """One principal index: named coefficient list plus validity range.

    ``coefficients`` is ``[A, B1, C1, B2, C2, ...]`` for
    n^2 = A + sum_i B_i lam^2/(lam^2 - C_i) with lam in um and C_i in um^2.
    An empty resonance list (just ``[A]``) gives a dispersionless constant
    index sqrt(A), which is occasionally useful for testing.
    """

    name: str
    coefficients: tuple
    valid_um: tuple

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "valid_um", tuple(float(v) for v in self.valid_um))
        if len(self.coefficients) < 1 or len(self.coefficients) % 2 != 1:
            raise ValueError(
                f"{self.name!r}: coefficients must be [A, B1, C1, ...] "
                f"(odd length), got {len(self.coefficients)}"
            )
        lo, hi = self.valid_um
        if not (0.0 < lo < hi):
            raise ValueError(f"{self.name!r}: invalid validity range [{lo}, {hi}] um")

    def n_squared(self, wavelength_um):
        lam2 = np.asarray(wavelength_um, dtype=float) ** 2
        nsq = np.full_like(lam2, self.coefficients[0])
        for i in range(1, len(self.coefficients), 2):
            b, c = self.coefficients[i], self.coefficients[i + 1]
            nsq = nsq + b * lam2 / (lam2 - c)
        return nsq


BBO_ORDINARY = SellmeierSet(
    name="BBO ordinary (Tamosauskas 2018)",
    coefficients=(1.0, 0.90291, 0.003926, 0.83155, 0.018786, 0.76536, 60.01),
    valid_um=(0.188, 5.2),
)

BBO_EXTRAORDINARY = SellmeierSet(
    name="BBO extraordinary (Tamosauskas 2018)",
    coefficients=(1.0, 1.151075, 0.007142, 0.21803, 0.02259, 0.656, 263.0),
    valid_um=(0.188, 5.2),
)

# Cut angle solved by calibrate_cut_angle for the default type-II preset at
# signal 883 nm / pump 429.7 nm; regenerate with ``pairspec calibrate``.
CALIBRATED_CUT_ANGLE_DEG = 39.73884075984645


@dataclass(frozen=True)
class CrystalConfig:
    """Uniaxial crystal: thickness, cut angle, dispersion, wave polarizations.

    The type-II preset assigns the signal and idler orthogonal polarizations
    (signal ordinary, idler extraordinary, pump extraordinary); any other
    assignment can be configured.
    """

    thickness_mm: float = 1.0
    cut_angle_deg: float = CALIBRATED_CUT_ANGLE_DEG
    sellmeier_o: SellmeierSet = BBO_ORDINARY
    sellmeier_e: SellmeierSet = BBO_EXTRAORDINARY
    pump_polarization: str = EXTRAORDINARY
    signal_polarization: str = ORDINARY
    idler_polarization: str = EXTRAORDINARY

    def __post_init__(self):
        if not self.thickness_mm > 0.0:
            raise ValueError(f"crystal thickness must be > 0 mm, got {self.thickness_mm}")
        if not 0.0 <= self.cut_angle_deg <= 90.0:
            raise ValueError(f"cut angle must lie in [0, 90] deg, got {self.cut_angle_deg}")
        for wave, pol in self.polarizations.items():
            if pol not in (ORDINARY, EXTRAORDINARY):
                raise ValueError(f"{wave} polarization must be 'o' or 'e', got {pol!r}")

    @property
    def thickness_m(self):
        return self.thickness_mm * 1e-3

    @property
    def polarizations(self):
        return {
            "pump": self.pump_polarization,
            "signal": self.signal_polarization,
            "idler": self.idler_polarization,
        }


def bbo_type_ii(thickness_mm=1.0, cut_angle_deg=CALIBRATED_CUT_ANGLE_DEG):
    """Default 1-mm type-II BBO crystal at the calibrated cut angle."""
    return CrystalConfig(thickness_mm=thickness_mm, cut_angle_deg=cut_angle_deg)


def _check_range(wavelength_um, sellmeier, wave):
    lam = np.asarray(wavelength_um, dtype=float)
    lo, hi = sellmeier.valid_um
    if np.any(lam < lo) or np.any(lam > hi):
        bad = lam[(lam < lo) | (lam > hi)]
        offender = float(bad.flat[0]) if bad.size else float(lam)
        raise WavelengthRangeError(offender, sellmeier, wave)
    return lam


def index_ordinary(wavelength_um, sellmeier, wave="wave"):
    """Ordinary refractive index n_o at a vacuum wavelength in micrometers."""
    lam = _check_range(wavelength_um, sellmeier, wave)
    nsq = sellmeier.n_squared(lam)
    if np.any(nsq <= 1.0):
        raise ValueError(
            f"{sellmeier.name!r} gives non-physical n^2 <= 1 at {wavelength_um} um"
        )
    return np.sqrt(nsq)


def index_extraordinary_angled(wavelength_um, theta_deg, config, wave="wave"):
    """Extraordinary index for propagation at ``theta_deg`` to the optic axis.

    theta = 0 recovers n_o; theta = 90 deg recovers the principal n_e.
    """
    if not 0.0 <= theta_deg <= 90.0:
        raise ValueError(f"propagation angle must lie in [0, 90] deg, got {theta_deg}")
    n_o = index_ordinary(wavelength_um, config.sellmeier_o, wave)
    n_e = index_ordinary(wavelength_um, config.sellmeier_e, wave)
    theta = np.radians(theta_deg)
    inv_sq = np.cos(theta) ** 2 / n_o**2 + np.sin(theta) ** 2 / n_e**2
    return 1.0 / np.sqrt(inv_sq)


def _index(wavelength_um, polarization, config, wave):
    if polarization == ORDINARY:
        return index_ordinary(wavelength_um, config.sellmeier_o, wave)
    return index_extraordinary_angled(wavelength_um, config.cut_angle_deg, config, wave)


def wave_number(omega_rad_s, polarization, config, wave="wave"):
    """k = n(lam, pol, theta) * omega / c in rad/m."""
    omega = np.asarray(omega_rad_s, dtype=float)
    if np.any(omega <= 0.0):
        raise ValueError(f"{wave} angular frequency must be positive")
    lam_um = units.um_from_nm(units.nm_from_omega(omega))
    n = _index(lam_um, polarization, config, wave)
    return n * omega / units.C_VACUUM


def delta_k(omega_s, omega_i, config):
    """Collinear phase mismatch k_s + k_i - k_p with omega_p = omega_s + omega_i.

    Symmetric under exchanging the signal and idler roles together with
    their polarization tags.
    """
    omega_s = np.asarray(omega_s, dtype=float)
    omega_i = np.asarray(omega_i, dtype=float)
    k_s = wave_number(omega_s, config.signal_polarization, config, "signal")
    k_i = wave_number(omega_i, config.idler_polarization, config, "idler")
    k_p = wave_number(omega_s + omega_i, config.pump_polarization, config, "pump")
    return k_s + k_i - k_p


def phase_match_sinc(delta_k_rad_m, length_m):
    """sinc envelope sin(x)/x at x = delta_k * L / 2.

    Evaluated by series expansion for |x| < 1e-4 so the envelope is exactly 1
    and continuous at the phase-matched point.
    """
    if not length_m > 0.0:
        raise ValueError(f"crystal length must be > 0, got {length_m}")
    x = np.asarray(delta_k_rad_m, dtype=float) * (0.5 * length_m)
    small = np.abs(x) < _SINC_SERIES_CUTOFF
    safe = np.where(small, 1.0, x)
    series = 1.0 - x * x / 6.0 + x**4 / 120.0
    return np.where(small, series, np.sin(safe) / safe)


def calibrate_cut_angle(config, lambda_s_target_nm, lambda_p_nm):
    """Cut angle (deg) that phase-matches the target signal/pump pair.

    The idler wavelength follows from energy conservation. The root of
    delta_k(theta) is bracketed on [0, 90] deg and solved to machine
    precision; the returned angle satisfies |delta_k| < CALIBRATION_TOLERANCE
    rad/m. If the crystal is dispersionless the mismatch vanishes for every
    angle and the bracket midpoint (45 deg) is returned.

    Raises NoPhaseMatchError when no angle can match the target (no sign
    change of delta_k, or a target that cannot conserve energy).
    """
    if not 0.0 < lambda_p_nm < lambda_s_target_nm:
        raise NoPhaseMatchError(
            f"signal target {lambda_s_target_nm} nm cannot conserve energy with "
            f"pump {lambda_p_nm} nm (need signal > pump > 0)"
        )
    lambda_i_nm = 1.0 / (1.0 / lambda_p_nm - 1.0 / lambda_s_target_nm)
    omega_s = units.omega_from_nm(lambda_s_target_nm)
    omega_i = units.omega_from_nm(lambda_i_nm)

    def mismatch(theta_deg):
        probe = dataclasses.replace(config, cut_angle_deg=float(theta_deg))
        return float(delta_k(omega_s, omega_i, probe))

    f_lo, f_hi = mismatch(0.0), mismatch(90.0)
    if (
        abs(f_lo) < CALIBRATION_TOLERANCE
        and abs(f_hi) < CALIBRATION_TOLERANCE
        and abs(mismatch(45.0)) < CALIBRATION_TOLERANCE
    ):
        return 45.0  # mismatch flat at zero: every angle works
    if np.sign(f_lo) == np.sign(f_hi):
        raise NoPhaseMatchError(
            f"delta_k does not change sign on [0, 90] deg for signal "
            f"{lambda_s_target_nm} nm / pump {lambda_p_nm} nm "
            f"(delta_k(0)={f_lo:.3e}, delta_k(90)={f_hi:.3e} rad/m)"
        )
    theta = brentq(mismatch, 0.0, 90.0, xtol=1e-12, rtol=8.9e-16)
    residual = mismatch(theta)
    if abs(residual) >= CALIBRATION_TOLERANCE:
        raise NoPhaseMatchError(
            f"root refinement left |delta_k| = {abs(residual):.3e} rad/m above "
            f"tolerance {CALIBRATION_TOLERANCE}"
        )
    return float(theta)
