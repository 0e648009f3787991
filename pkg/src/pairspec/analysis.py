"""Reduction of coincidence histograms to spectra, and reconstruction of the
sample absorbance from the with-sample / no-sample coincidence ratio.

Counting analysis follows the windowed-integration recipe: sum counts over
the channels wholly inside the signal window, estimate the flat background
per channel from a wide band with the peak region excluded, subtract, and
propagate Poisson errors. The absorbance then follows pointwise as

    A = log10(R_reference / R_sample),

which is positive for an attenuating sample and inverts T = 10^(-A). The
signal-arm wavelength axis maps to the idler (sample) axis through the pump
conjugation, since selecting a signal wavelength heralds the conjugate
idler wavelength through the sample.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
from scipy.special import erf

from . import acquisition
from . import sample as sample_mod
from .biphoton import conjugate_wavelength

SIGNAL_ARM = "signal_arm"
IDLER_ARM = "idler_arm"


class EmptyWindowError(ValueError):
    """No histogram channel lies wholly inside the requested window."""


class GridMismatchError(ValueError):
    """Two spectra expected on the same wavelength grid differ."""


class NonpositiveReferenceError(ValueError):
    """Reference spectrum carries no usable (positive) counts."""


class NoPeakError(ValueError):
    """Spectrum has no unique interior maximum."""


class HalfMaximumError(ValueError):
    """Spectrum does not cross half maximum on both sides of its peak."""


@dataclass(frozen=True)
class WindowConfig:
    """Delay windows: signal integration window and background band.

    The background is averaged over channels inside ``background_band`` but
    outside ``exclusion``; the exclusion defaults to (and must cover) the
    signal window.
    """

    signal_window: tuple = (14.0, 22.0)
    background_band: tuple = (5.0, 45.0)
    exclusion: Optional[tuple] = None

    def __post_init__(self):
        sig_lo, sig_hi = self.signal_window
        bg_lo, bg_hi = self.background_band
        if not (sig_lo < sig_hi and bg_lo < bg_hi):
            raise ValueError("windows must be nonempty (lo, hi) intervals in ns")
        if not (bg_lo <= sig_lo and sig_hi <= bg_hi):
            raise ValueError(
                f"signal window {self.signal_window} must lie inside the "
                f"background band {self.background_band}"
            )
        exclusion = self.exclusion if self.exclusion is not None else self.signal_window
        ex_lo, ex_hi = exclusion
        if not (ex_lo <= sig_lo and sig_hi <= ex_hi):
            raise ValueError(
                f"exclusion {exclusion} must cover the signal window {self.signal_window}"
            )
        object.__setattr__(self, "signal_window", (float(sig_lo), float(sig_hi)))
        object.__setattr__(self, "background_band", (float(bg_lo), float(bg_hi)))
        object.__setattr__(self, "exclusion", (float(ex_lo), float(ex_hi)))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Wavelength-ordered values with standard errors and low-statistics flags."""

    wavelengths_nm: np.ndarray
    values: np.ndarray
    sigmas: np.ndarray
    low_stats: Optional[np.ndarray] = None
    axis: str = SIGNAL_ARM

    def __post_init__(self):
        lam = np.asarray(self.wavelengths_nm, dtype=float)
        values = np.asarray(self.values, dtype=float)
        sigmas = np.asarray(self.sigmas, dtype=float)
        flags = (
            np.zeros(lam.shape, dtype=bool)
            if self.low_stats is None
            else np.asarray(self.low_stats, dtype=bool)
        )
        if lam.ndim != 1 or not (lam.shape == values.shape == sigmas.shape == flags.shape):
            raise ValueError("spectrum arrays must be 1-D and of equal length")
        if not np.all(np.diff(lam) > 0.0):
            raise ValueError("spectrum wavelengths must be strictly increasing")
        if np.any(sigmas < 0.0):
            raise ValueError("spectrum sigmas must be nonnegative")
        if self.axis not in (SIGNAL_ARM, IDLER_ARM):
            raise ValueError(f"axis must be {SIGNAL_ARM!r} or {IDLER_ARM!r}, got {self.axis!r}")
        object.__setattr__(self, "wavelengths_nm", lam)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sigmas", sigmas)
        object.__setattr__(self, "low_stats", flags)

    def __len__(self):
        return self.wavelengths_nm.size


class BackgroundLevel(NamedTuple):
    mean_per_channel: float
    stderr: float
    channels: int


class NetCounts(NamedTuple):
    counts: float
    sigma: float


def _window_masks(edges, windows):
    edges = np.asarray(edges, dtype=float)
    sig_lo, sig_hi = windows.signal_window
    bg_lo, bg_hi = windows.background_band
    ex_lo, ex_hi = windows.exclusion
    in_signal = acquisition.channel_mask(edges, sig_lo, sig_hi)
    in_band = acquisition.channel_mask(edges, bg_lo, bg_hi)
    slack = 1e-9 * (edges[-1] - edges[0])
    outside_exclusion = (edges[1:] <= ex_lo + slack) | (edges[:-1] >= ex_hi - slack)
    return in_signal, in_band & outside_exclusion


def background_per_channel(hist, windows=WindowConfig()):
    """Mean background counts per channel, from channels wholly inside the
    background band and wholly outside the exclusion."""
    _, bg_mask = _window_masks(hist.edges_ns, windows)
    n = int(bg_mask.sum())
    if n < 1:
        raise EmptyWindowError(
            f"no channel lies wholly inside {windows.background_band} ns "
            f"outside {windows.exclusion} ns"
        )
    values = hist.counts[bg_mask].astype(float)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return BackgroundLevel(mean_per_channel=mean, stderr=stderr, channels=n)


def net_coincidences(hist, windows=WindowConfig()):
    """Background-subtracted counts in the signal window with Poisson error.

    net = gross - N_window * background_mean;
    sigma = sqrt(gross + N_window^2 * background_stderr^2).
    """
    sig_mask, _ = _window_masks(hist.edges_ns, windows)
    n_window = int(sig_mask.sum())
    if n_window < 1:
        raise EmptyWindowError(
            f"no channel lies wholly inside the signal window {windows.signal_window} ns"
        )
    background = background_per_channel(hist, windows)
    gross = float(hist.counts[sig_mask].sum())
    net = gross - n_window * background.mean_per_channel
    sigma = math.sqrt(gross + (n_window * background.stderr) ** 2)
    return NetCounts(counts=net, sigma=sigma)


def coincidence_spectrum(record, windows=WindowConfig()):
    """One (center wavelength, net counts, error) point per scan setting."""
    rows = []
    for hist in record.histograms:
        net = net_coincidences(hist, windows)
        rows.append((hist.setting.center_nm, net.counts, net.sigma))
    rows.sort(key=lambda r: r[0])
    lam, values, sigmas = (np.asarray(col, dtype=float) for col in zip(*rows))
    return Spectrum(wavelengths_nm=lam, values=values, sigmas=sigmas, axis=SIGNAL_ARM)


def to_idler_axis(spectrum, lambda_p_nm):
    """Map wavelengths through the pump conjugation and re-sort ascending.

    Values, sigmas, and flags ride along unchanged; the axis label toggles.
    Applying the map twice recovers the original spectrum.
    """
    mapped = conjugate_wavelength(spectrum.wavelengths_nm, lambda_p_nm)
    order = np.argsort(mapped)
    axis = IDLER_ARM if spectrum.axis == SIGNAL_ARM else SIGNAL_ARM
    return Spectrum(
        wavelengths_nm=mapped[order],
        values=spectrum.values[order],
        sigmas=spectrum.sigmas[order],
        low_stats=spectrum.low_stats[order],
        axis=axis,
    )


def reconstruct_absorbance(reference, with_sample, lambda_p_nm, min_counts=25.0):
    """Pointwise decadic absorbance log10(R_ref / R_sample) on the idler axis.

    Error propagation: sigma_A = (1/ln 10) sqrt((s_ref/R_ref)^2 +
    (s_sam/R_sam)^2). Points where either net count falls below
    ``min_counts`` are kept but flagged low-statistics; nonpositive net
    counts (possible after background subtraction of a weak setting) give
    flagged NaN points. A reference with no positive counts at all is
    unusable and raises.
    """
    for spec, name in ((reference, "reference"), (with_sample, "with_sample")):
        if spec.axis != SIGNAL_ARM:
            raise GridMismatchError(f"{name} spectrum must be on the signal-arm axis")
    if not np.array_equal(reference.wavelengths_nm, with_sample.wavelengths_nm):
        raise GridMismatchError("reference and with-sample scan grids differ")
    r_ref = reference.values
    r_sam = with_sample.values
    if not np.any(r_ref > 0.0):
        raise NonpositiveReferenceError("reference spectrum has no positive net counts")

    usable = (r_ref > 0.0) & (r_sam > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(usable, np.log10(np.where(usable, r_ref / r_sam, 1.0)), np.nan)
        rel_ref = np.where(usable, reference.sigmas / np.where(usable, r_ref, 1.0), np.nan)
        rel_sam = np.where(usable, with_sample.sigmas / np.where(usable, r_sam, 1.0), np.nan)
        sigmas = np.hypot(rel_ref, rel_sam) / math.log(10.0)
    flags = (~usable) | (r_ref < min_counts) | (r_sam < min_counts)
    signal_axis = Spectrum(
        wavelengths_nm=reference.wavelengths_nm,
        values=values,
        sigmas=sigmas,
        low_stats=flags,
        axis=SIGNAL_ARM,
    )
    return to_idler_axis(signal_axis, lambda_p_nm)


def fwhm_and_center(spectrum):
    """Peak center by 3-point parabolic refinement and FWHM by linear
    interpolation of the half-maximum crossings.

    Requires a unique maximum strictly inside the spectrum range with the
    values dropping below half maximum on both sides.
    """
    x = spectrum.wavelengths_nm
    v = spectrum.values
    k = int(np.argmax(v))
    vmax = v[k]
    if k == 0 or k == v.size - 1:
        raise NoPeakError("maximum sits on the spectrum boundary")
    if int((v == vmax).sum()) != 1:
        raise NoPeakError("spectrum maximum is not unique")

    x0, x1, x2 = x[k - 1], x[k], x[k + 1]
    v0, v1, v2 = v[k - 1], v[k], v[k + 1]
    # vertex of the parabola through the three points (nonuniform-safe)
    denom = (x1 - x0) * (v1 - v2) - (x1 - x2) * (v1 - v0)
    if denom == 0.0:
        center = float(x1)
    else:
        center = float(
            x1 - 0.5 * ((x1 - x0) ** 2 * (v1 - v2) - (x1 - x2) ** 2 * (v1 - v0)) / denom
        )

    half = 0.5 * vmax

    def crossing(indices):
        for i in indices:
            if v[i] <= half:
                step = i + 1 if i < k else i - 1
                if v[step] == v[i]:
                    return float(x[i])
                frac = (half - v[i]) / (v[step] - v[i])
                return float(x[i] + frac * (x[step] - x[i]))
        raise HalfMaximumError("spectrum does not cross half maximum on both sides")

    left = crossing(range(k - 1, -1, -1))
    right = crossing(range(k + 1, v.size))
    return center, float(right - left)


def expected_net_counts(setting, sample_present, apparatus, windows=WindowConfig()):
    """Analytic mean and standard deviation of net_coincidences.

    Oracle for the Monte Carlo acquisition: channel occupation is the
    Gaussian peak probability plus the uniform accidental floor, and the
    net-count estimator's moments follow from independent Poisson channels.
    """
    rates = acquisition.expected_rates(setting, sample_present, apparatus)
    timing = apparatus.timing
    edges = timing.channel_edges_ns()
    duration = timing.acquisition_time_s

    true_counts = rates.true_coincidence_hz * duration
    accidental_per_channel = rates.accidental_hz * duration / timing.channel_count
    peak_prob = _peak_channel_probability(
        edges, timing.electronic_delay_ns, apparatus.coincidence_jitter_sigma_ns
    )

    sig_mask, bg_mask = _window_masks(edges, windows)
    n_window = int(sig_mask.sum())
    n_background = int(bg_mask.sum())
    if n_window < 1 or n_background < 1:
        raise EmptyWindowError("windows leave no usable channels on this timing grid")

    expected_gross = true_counts * float(peak_prob[sig_mask].sum()) + accidental_per_channel * n_window
    expected_bg = accidental_per_channel + true_counts * float(peak_prob[bg_mask].mean())
    mean = expected_gross - n_window * expected_bg
    variance = expected_gross + n_window**2 * expected_bg / n_background
    return NetCounts(counts=float(mean), sigma=float(math.sqrt(variance)))


def expected_spectrum(scan, sample_present, apparatus, windows=WindowConfig()):
    """Noise-free spectrum of expected net counts (sigma = predicted MC std)."""
    rows = []
    for setting in scan:
        net = expected_net_counts(setting, sample_present, apparatus, windows)
        rows.append((setting.center_nm, net.counts, net.sigma))
    rows.sort(key=lambda r: r[0])
    lam, values, sigmas = (np.asarray(col, dtype=float) for col in zip(*rows))
    return Spectrum(wavelengths_nm=lam, values=values, sigmas=sigmas, axis=SIGNAL_ARM)


def _peak_channel_probability(edges, delay_ns, sigma_ns):
    if sigma_ns == 0.0:
        return ((edges[:-1] <= delay_ns) & (delay_ns < edges[1:])).astype(float)
    z = (edges - delay_ns) / (sigma_ns * math.sqrt(2.0))
    cdf = 0.5 * (1.0 + erf(z))
    return np.diff(cdf)


def absorbance_rms(spectrum, model):
    """RMS difference between an idler-axis absorbance spectrum and a model,
    over unflagged points."""
    if spectrum.axis != IDLER_ARM:
        raise ValueError("absorbance comparison expects an idler-axis spectrum")
    keep = ~spectrum.low_stats
    if not np.any(keep):
        raise ValueError("no unflagged points to compare")
    truth = sample_mod.absorbance(model, spectrum.wavelengths_nm[keep])
    return float(np.sqrt(np.mean((spectrum.values[keep] - truth) ** 2)))


def save_spectrum(spectrum, path):
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(("wavelength_nm", "value", "sigma", "flags"))
        for lam, value, sigma, flag in zip(
            spectrum.wavelengths_nm, spectrum.values, spectrum.sigmas, spectrum.low_stats
        ):
            writer.writerow((repr(float(lam)), repr(float(value)), repr(float(sigma)), int(flag)))
    return path


def load_spectrum(path, axis=SIGNAL_ARM):
    lam, values, sigmas, flags = [], [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            lam.append(float(row["wavelength_nm"]))
            values.append(float(row["value"]))
            sigmas.append(float(row["sigma"]))
            flags.append(bool(int(row["flags"])))
    return Spectrum(
        wavelengths_nm=np.asarray(lam),
        values=np.asarray(values),
        sigmas=np.asarray(sigmas),
        low_stats=np.asarray(flags, dtype=bool),
        axis=axis,
    )
