"""Unit conventions and conversions used across the simulator.

All wavelengths are vacuum wavelengths. Angular frequencies are rad/s and
wave numbers rad/m. Every wavelength/frequency conversion routes through
this module so the convention lives in exactly one place.
"""

import numpy as np
from scipy.constants import c as C_VACUUM  # speed of light, m/s

TWO_PI_C = 2.0 * np.pi * C_VACUUM  # rad m / s


def omega_from_nm(wavelength_nm):
    """Angular frequency (rad/s) of a vacuum wavelength given in nm."""
    wavelength_nm = np.asarray(wavelength_nm, dtype=float)
    if np.any(wavelength_nm <= 0.0):
        raise ValueError("wavelength must be positive")
    return TWO_PI_C / (wavelength_nm * 1e-9)


def nm_from_omega(omega_rad_s):
    """Vacuum wavelength (nm) of an angular frequency given in rad/s."""
    omega_rad_s = np.asarray(omega_rad_s, dtype=float)
    if np.any(omega_rad_s <= 0.0):
        raise ValueError("angular frequency must be positive")
    return TWO_PI_C / omega_rad_s * 1e9


def um_from_nm(wavelength_nm):
    return np.asarray(wavelength_nm, dtype=float) * 1e-3
