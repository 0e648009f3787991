"""Grating spectrometer in the signal arm.

The grating angle is abstracted to a selected center wavelength; what the
instrument contributes quantitatively is its fiber-limited resolution

    d_lam = d_g * phi_f / (2 F)

(groove gap, fiber core diameter, collimating focal length) and a unit-peak
passband around each scan center. Absolute optical efficiency lives in the
detector model, where it cancels in the reconstruction ratio.
"""

from dataclasses import dataclass

import numpy as np

FOUR_LN2 = 4.0 * np.log(2.0)

TOPHAT = "tophat"
GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class ScanSetting:
    """One grating position: passband center and width, both nm."""

    center_nm: float
    passband_nm: float

    def __post_init__(self):
        if not self.center_nm > 0.0:
            raise ValueError(f"passband center must be > 0 nm, got {self.center_nm}")
        if not self.passband_nm > 0.0:
            raise ValueError(f"passband width must be > 0 nm, got {self.passband_nm}")


@dataclass(frozen=True)
class SpectrometerConfig:
    """Grating geometry plus passband shape.

    Defaults: 1400 grooves/mm grating, 125 um collection fiber core, 11 mm
    collimating lens, tophat passband.
    """

    groove_gap_mm: float = 1.0 / 1400.0
    fiber_diameter_um: float = 125.0
    lens_focal_mm: float = 11.0
    passband_shape: str = TOPHAT

    def __post_init__(self):
        for name in ("groove_gap_mm", "fiber_diameter_um", "lens_focal_mm"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.passband_shape not in (TOPHAT, GAUSSIAN):
            raise ValueError(
                f"passband shape must be '{TOPHAT}' or '{GAUSSIAN}', "
                f"got {self.passband_shape!r}"
            )


def resolution(config):
    """Wavelength resolution d_g * phi_f / (2 F) in nm."""
    d_g_nm = config.groove_gap_mm * 1e6
    phi_f_nm = config.fiber_diameter_um * 1e3
    f_nm = config.lens_focal_mm * 1e6
    return d_g_nm * phi_f_nm / (2.0 * f_nm)


def transmission(setting, wavelength_nm, shape=TOPHAT):
    """Unit-peak passband transmission probability at a wavelength.

    Tophat: 1 inside |lam - center| <= width/2, else 0 (boundary inclusive).
    Gaussian: width is the FWHM.
    """
    lam = np.asarray(wavelength_nm, dtype=float)
    detune = lam - setting.center_nm
    if shape == TOPHAT:
        out = np.where(np.abs(detune) <= 0.5 * setting.passband_nm, 1.0, 0.0)
    elif shape == GAUSSIAN:
        out = np.exp(-FOUR_LN2 * (detune / setting.passband_nm) ** 2)
    else:
        raise ValueError(f"unknown passband shape {shape!r}")
    return out if out.ndim else float(out)


def default_scan(config, start_nm, stop_nm, step_nm):
    """Scan settings from start to stop inclusive, width = resolution(config).

    A step larger than the range degenerates to the single start setting.
    """
    if not step_nm > 0.0:
        raise ValueError(f"scan step must be > 0 nm, got {step_nm}")
    if not start_nm < stop_nm:
        raise ValueError(f"scan range is empty: [{start_nm}, {stop_nm}] nm")
    width = resolution(config)
    count = int(np.floor((stop_nm - start_nm) / step_nm)) + 1
    centers = start_nm + step_nm * np.arange(count)
    return [ScanSetting(center_nm=float(c), passband_nm=width) for c in centers]
