"""Decadic absorbance model for the sample in the idler path.

Absorption bands are Gaussians in wavelength (inhomogeneous broadening of a
glass host), summed over a flat baseline:

    A(lam) = thickness_scale * (baseline + sum_b peak_b *
             exp(-4 ln2 (lam - center_b)^2 / fwhm_b^2))

and the transmission probability is T = 10^(-A). Surface and coupling
losses that are flat in wavelength belong in the baseline (or the detector
efficiency), not in the bands.
"""

from dataclasses import dataclass

import numpy as np

FOUR_LN2 = 4.0 * np.log(2.0)


@dataclass(frozen=True)
class AbsorbanceBand:
    center_nm: float
    fwhm_nm: float
    peak_absorbance: float

    def __post_init__(self):
        if not self.fwhm_nm > 0.0:
            raise ValueError(f"band fwhm must be > 0 nm, got {self.fwhm_nm}")
        if self.peak_absorbance < 0.0:
            raise ValueError(
                f"band peak absorbance must be >= 0, got {self.peak_absorbance}"
            )


@dataclass(frozen=True)
class AbsorbanceModel:
    """Sum-of-Gaussians decadic absorbance with baseline and thickness scale."""

    bands: tuple = ()
    baseline: float = 0.0
    thickness_scale: float = 1.0

    def __post_init__(self):
        bands = tuple(
            b if isinstance(b, AbsorbanceBand) else AbsorbanceBand(*b) for b in self.bands
        )
        object.__setattr__(self, "bands", bands)
        if self.baseline < 0.0:
            raise ValueError(f"baseline absorbance must be >= 0, got {self.baseline}")
        if self.thickness_scale < 0.0:
            raise ValueError(f"thickness scale must be >= 0, got {self.thickness_scale}")


def neodymium_glass():
    """Nd3+-doped glass preset: four near-IR/visible absorption bands.

    Band centers follow the known Nd3+ ground-state absorption lines near
    580, 750, 810, and 870 nm; widths and peak heights are preset choices
    (not a digitized measurement) that make the 860-880 nm region strongly
    absorbing.
    """
    return AbsorbanceModel(
        bands=(
            AbsorbanceBand(580.0, 25.0, 0.6),
            AbsorbanceBand(750.0, 25.0, 0.4),
            AbsorbanceBand(810.0, 25.0, 0.9),
            AbsorbanceBand(870.0, 25.0, 1.2),
        ),
        baseline=0.0,
    )


def absorbance(model, wavelength_nm):
    """Decadic absorbance A(lam) >= 0; scalar in, scalar out."""
    lam = np.asarray(wavelength_nm, dtype=float)
    if np.any(lam <= 0.0):
        raise ValueError("wavelength must be > 0 nm")
    total = np.full_like(lam, model.baseline)
    for band in model.bands:
        total = total + band.peak_absorbance * np.exp(
            -FOUR_LN2 * ((lam - band.center_nm) / band.fwhm_nm) ** 2
        )
    out = model.thickness_scale * total
    return out if out.ndim else float(out)


def transmittance(model, wavelength_nm):
    """Transmission probability 10^(-A), in (0, 1]."""
    out = 10.0 ** (-np.asarray(absorbance(model, wavelength_nm)))
    return out if out.ndim else float(out)
