"""Frequency-entangled pair source: joint spectral density under a cw pump
and sampling of (signal, idler) wavelength pairs on the energy-conservation
line.

With an ideal cw pump the sum frequency is pinned, so the two-photon state
is fully described by the signal-wavelength marginal density

    p(lam_s)  propto  sinc^2(delta_k L / 2) * (2 pi c / lam_s^2),

the second factor being the per-wavelength Jacobian |d omega / d lam|.
Pairs are drawn by inverting the tabulated marginal CDF and conjugating
through the pump line.
"""

from dataclasses import dataclass, field

import numpy as np

from . import dispersion, units

FOUR_LN2 = 4.0 * np.log(2.0)

# relative sum-frequency tolerance treated as "on the pump line" when the
# pump linewidth is zero; a 1 GHz detune is ~1e-6 relative and lands at 0
_CW_RELATIVE_TOLERANCE = 1e-9

_NORMALIZATION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PumpConfig:
    """cw pump line: center wavelength, linewidth (0 = ideal cw), power.

    Power scales the pair generation rate only; it never reshapes spectra.
    """

    center_wavelength_nm: float = 429.7
    linewidth_fwhm_hz: float = 0.0
    power_mw: float = 1.5

    def __post_init__(self):
        if not self.center_wavelength_nm > 0.0:
            raise ValueError(f"pump wavelength must be > 0 nm, got {self.center_wavelength_nm}")
        if self.linewidth_fwhm_hz < 0.0:
            raise ValueError(f"pump linewidth must be >= 0 Hz, got {self.linewidth_fwhm_hz}")
        if self.power_mw < 0.0:
            raise ValueError(f"pump power must be >= 0 mW, got {self.power_mw}")

    @property
    def omega_p(self):
        return units.omega_from_nm(self.center_wavelength_nm)


@dataclass(frozen=True)
class BiphotonSource:
    """Pump plus crystal plus a configured absolute pair generation rate.

    The absolute rate cannot be derived from the crystal model alone (it
    depends on nonlinear coefficient and focusing geometry), so it is a
    configuration input: pairs/s into the collection modes at
    ``reference_power_mw`` of pump power, scaled linearly with actual power.
    """

    pump: PumpConfig = PumpConfig()
    crystal: dispersion.CrystalConfig = dispersion.CrystalConfig()
    pair_generation_rate: float = 40000.0
    reference_power_mw: float = 1.5

    def __post_init__(self):
        if not self.pair_generation_rate > 0.0:
            raise ValueError(
                f"pair generation rate must be > 0 /s, got {self.pair_generation_rate}"
            )
        if not self.reference_power_mw > 0.0:
            raise ValueError(
                f"reference power must be > 0 mW, got {self.reference_power_mw}"
            )

    @property
    def pair_rate_hz(self):
        """Pairs per second at the configured pump power."""
        return self.pair_generation_rate * self.pump.power_mw / self.reference_power_mw


@dataclass(frozen=True)
class MarginalGrid:
    """Uniform signal-wavelength grid the marginal density is tabulated on."""

    min_nm: float = 700.0
    max_nm: float = 1000.0
    step_nm: float = 0.25

    def __post_init__(self):
        if not self.step_nm > 0.0:
            raise ValueError(f"grid step must be > 0 nm, got {self.step_nm}")
        if not self.min_nm < self.max_nm:
            raise ValueError(
                f"grid range is empty: [{self.min_nm}, {self.max_nm}] nm"
            )

    def wavelengths(self):
        count = int(np.floor((self.max_nm - self.min_nm) / self.step_nm)) + 1
        if count < 2:
            raise ValueError(
                f"grid [{self.min_nm}, {self.max_nm}] nm at step {self.step_nm} nm "
                f"has fewer than 2 points"
            )
        return self.min_nm + self.step_nm * np.arange(count)


@dataclass(frozen=True, eq=False)
class MarginalDensity:
    """Tabulated signal-wavelength density, trapezoid-normalized to 1.

    The cumulative distribution is precomputed as the running trapezoid
    integral, making the density piecewise linear between grid points; that
    same piecewise-linear law is what sampling inverts.
    """

    wavelengths_nm: np.ndarray
    density_per_nm: np.ndarray
    _cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lam = np.asarray(self.wavelengths_nm, dtype=float)
        rho = np.asarray(self.density_per_nm, dtype=float)
        if lam.ndim != 1 or rho.shape != lam.shape or lam.size < 2:
            raise ValueError("marginal needs matching 1-D arrays of >= 2 points")
        if not np.all(np.diff(lam) > 0.0):
            raise ValueError("marginal wavelength grid must be strictly increasing")
        if np.any(rho < 0.0):
            raise ValueError("marginal density must be nonnegative")
        total = float(np.trapezoid(rho, lam))
        if abs(total - 1.0) > _NORMALIZATION_TOLERANCE:
            raise ValueError(
                f"marginal density integrates to {total!r}, expected 1 within "
                f"{_NORMALIZATION_TOLERANCE}"
            )
        cdf = np.concatenate(
            ([0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(lam)))
        )
        cdf /= cdf[-1]
        object.__setattr__(self, "wavelengths_nm", lam)
        object.__setattr__(self, "density_per_nm", rho)
        object.__setattr__(self, "_cdf", cdf)

    def sample(self, rng, count):
        """Draw wavelengths by inverse CDF, linear interpolation within bins.

        A uniform draw landing exactly on a bin-boundary CDF value resolves
        to the lower edge of the upper bin, so ties go to the bin edge.
        """
        u = rng.random(int(count))
        j = np.searchsorted(self._cdf, u, side="right") - 1
        j = np.clip(j, 0, self.wavelengths_nm.size - 2)
        span = self._cdf[j + 1] - self._cdf[j]
        frac = np.where(span > 0.0, (u - self._cdf[j]) / np.where(span > 0.0, span, 1.0), 0.0)
        return self.wavelengths_nm[j] + frac * (
            self.wavelengths_nm[j + 1] - self.wavelengths_nm[j]
        )

    def bin_probabilities(self):
        """Probability mass per grid bin under the piecewise-linear CDF."""
        return np.diff(self._cdf)

    def argmax_nm(self):
        return float(self.wavelengths_nm[int(np.argmax(self.density_per_nm))])


def conjugate_wavelength(wavelength_nm, lambda_p_nm):
    """Partner wavelength under 1/lam_s + 1/lam_i = 1/lam_p.

    A strictly decreasing involution on (lam_p, inf); the degenerate point
    2*lam_p maps to itself.
    """
    lam = np.asarray(wavelength_nm, dtype=float)
    if not lambda_p_nm > 0.0:
        raise ValueError(f"pump wavelength must be > 0 nm, got {lambda_p_nm}")
    if np.any(lam <= lambda_p_nm):
        raise ValueError(
            f"wavelength must exceed the pump wavelength {lambda_p_nm} nm for the "
            f"partner frequency to be positive"
        )
    out = 1.0 / (1.0 / lambda_p_nm - 1.0 / lam)
    return out if out.ndim else float(out)


def _pump_envelope_sq(omega_sum, pump):
    detune = omega_sum - pump.omega_p
    if pump.linewidth_fwhm_hz == 0.0:
        return np.where(
            np.abs(detune) <= _CW_RELATIVE_TOLERANCE * pump.omega_p, 1.0, 0.0
        )
    width = 2.0 * np.pi * pump.linewidth_fwhm_hz
    return np.exp(-FOUR_LN2 * (detune / width) ** 2)


def joint_density(omega_s, omega_i, source):
    """Unnormalized joint spectral density |pump envelope * sinc envelope|^2.

    With zero pump linewidth this is nonzero only on the sum-frequency line;
    a finite linewidth relaxes the line to a Gaussian ridge.
    """
    omega_s = np.asarray(omega_s, dtype=float)
    omega_i = np.asarray(omega_i, dtype=float)
    envelope_sq = _pump_envelope_sq(omega_s + omega_i, source.pump)
    dk = dispersion.delta_k(omega_s, omega_i, source.crystal)
    sinc = dispersion.phase_match_sinc(dk, source.crystal.thickness_m)
    out = envelope_sq * sinc**2
    return out if out.ndim else float(out)


def signal_marginal(source, grid=MarginalGrid()):
    """Normalized signal-wavelength density on the energy-conservation line.

    Evaluates sinc^2(delta_k L/2) at (omega_s, omega_p - omega_s) across the
    grid, applies the 2 pi c / lam^2 Jacobian, and trapezoid-normalizes.
    Wavelength-range errors from either the signal or the conjugate idler
    propagate out.
    """
    lam_s = grid.wavelengths() if isinstance(grid, MarginalGrid) else np.asarray(grid, float)
    if lam_s.size < 2:
        raise ValueError("marginal grid needs at least 2 points")
    omega_s = units.omega_from_nm(lam_s)
    omega_i = source.pump.omega_p - omega_s
    if np.any(omega_i <= 0.0):
        raise ValueError(
            "grid extends past the pump frequency: conjugate idler undefined"
        )
    dk = dispersion.delta_k(omega_s, omega_i, source.crystal)
    sinc = dispersion.phase_match_sinc(dk, source.crystal.thickness_m)
    rho = sinc**2 * (units.TWO_PI_C / (lam_s * 1e-9) ** 2)
    total = np.trapezoid(rho, lam_s)
    if not total > 0.0:
        raise ValueError("marginal density vanishes on the whole grid")
    return MarginalDensity(wavelengths_nm=lam_s, density_per_nm=rho / total)


def sample_pair(source, marginal, rng):
    """One (lambda_s, lambda_i) draw; the idler follows by conjugation."""
    lam_s = float(marginal.sample(rng, 1)[0])
    lam_i = conjugate_wavelength(lam_s, source.pump.center_wavelength_nm)
    return lam_s, lam_i


def sample_pairs(source, marginal, rng, count):
    """Vectorized pair draws; same law as repeated sample_pair calls."""
    lam_s = marginal.sample(rng, count)
    lam_i = conjugate_wavelength(lam_s, source.pump.center_wavelength_nm)
    return lam_s, lam_i
