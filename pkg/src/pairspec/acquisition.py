"""Virtual photon-counting experiment.

Chain: pair source -> sample arm (idler) / grating arm (signal) ->
detectors -> electronic delay -> start-stop coincidence histogram.

Two modes share one rate model. ``expected_rates`` computes analytic
count rates (the oracle); ``run_acquisition`` realizes them as one Monte
Carlo histogram: true coincidences are Poisson in number and land at the
electronic delay plus Gaussian two-detector jitter, accidentals (including
dark-count pairings) form a homogeneous Poisson floor across the span.
Detector dead time, afterpulsing, and pile-up are not modeled; at the count
rates of interest they are second-order effects.

A RunRecord (one histogram per scan setting) serializes to a CSV bundle:
``manifest.csv`` (one row per setting), ``meta.csv``, ``config.yaml`` (the
configuration snapshot, stored verbatim), and one ``hist_NNNN.csv`` per
setting. Floats are written with ``repr`` so the round-trip is bit-exact.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from . import sample as sample_mod
from . import spectrometer as spectrometer_mod
from .biphoton import BiphotonSource, MarginalDensity, MarginalGrid, conjugate_wavelength, signal_marginal
from .spectrometer import ScanSetting, SpectrometerConfig

# relative slack when deciding whether a channel edge sits inside a window;
# absorbs linspace rounding of edge positions
_EDGE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class DetectorConfig:
    """Single-photon counter: efficiency, dark rate, Gaussian timing jitter."""

    quantum_efficiency: float = 0.6
    dark_rate_hz: float = 100.0
    timing_jitter_sigma_ns: float = 0.35

    def __post_init__(self):
        if not 0.0 <= self.quantum_efficiency <= 1.0:
            raise ValueError(
                f"quantum efficiency must lie in [0, 1], got {self.quantum_efficiency}"
            )
        if self.dark_rate_hz < 0.0:
            raise ValueError(f"dark rate must be >= 0 /s, got {self.dark_rate_hz}")
        if self.timing_jitter_sigma_ns < 0.0:
            raise ValueError(
                f"timing jitter must be >= 0 ns, got {self.timing_jitter_sigma_ns}"
            )


@dataclass(frozen=True)
class TimingConfig:
    """Delay electronics and histogram binning (start-stop converter model)."""

    electronic_delay_ns: float = 18.0
    span_start_ns: float = 0.0
    span_stop_ns: float = 50.0
    channel_count: int = 2048
    acquisition_time_s: float = 120.0

    def __post_init__(self):
        if int(self.channel_count) != self.channel_count or self.channel_count < 2:
            raise ValueError(f"channel count must be an integer >= 2, got {self.channel_count}")
        object.__setattr__(self, "channel_count", int(self.channel_count))
        if self.span_start_ns < 0.0 or not self.span_stop_ns > self.span_start_ns:
            raise ValueError(
                f"histogram span must satisfy 0 <= start < stop, got "
                f"[{self.span_start_ns}, {self.span_stop_ns}] ns"
            )
        if not self.span_start_ns <= self.electronic_delay_ns <= self.span_stop_ns:
            raise ValueError(
                f"electronic delay {self.electronic_delay_ns} ns outside the span "
                f"[{self.span_start_ns}, {self.span_stop_ns}] ns"
            )
        if not self.acquisition_time_s > 0.0:
            raise ValueError(
                f"acquisition time must be > 0 s, got {self.acquisition_time_s}"
            )

    @property
    def span_ns(self):
        return self.span_stop_ns - self.span_start_ns

    @property
    def channel_width_ns(self):
        return self.span_ns / self.channel_count

    def channel_edges_ns(self):
        return np.linspace(self.span_start_ns, self.span_stop_ns, self.channel_count + 1)


@dataclass(frozen=True, eq=False)
class CoincidenceHistogram:
    """Integer counts per delay channel for one scan setting."""

    edges_ns: np.ndarray
    counts: np.ndarray
    acquisition_time_s: float
    setting: ScanSetting
    sample_present: bool
    seed: int = 0

    def __post_init__(self):
        edges = np.asarray(self.edges_ns, dtype=float)
        counts = np.asarray(self.counts)
        if not np.issubdtype(counts.dtype, np.integer):
            rounded = np.rint(counts).astype(np.int64)
            if not np.array_equal(rounded, counts):
                raise ValueError("histogram counts must be integers")
            counts = rounded
        if np.any(counts < 0):
            raise ValueError("histogram counts must be nonnegative")
        if edges.ndim != 1 or not np.all(np.diff(edges) > 0.0):
            raise ValueError("channel edges must be strictly increasing")
        if counts.size != edges.size - 1:
            raise ValueError(
                f"{counts.size} channels do not match {edges.size} edges"
            )
        object.__setattr__(self, "edges_ns", edges)
        object.__setattr__(self, "counts", counts.astype(np.int64))


def histograms_equal(a, b):
    return (
        np.array_equal(a.edges_ns, b.edges_ns)
        and np.array_equal(a.counts, b.counts)
        and a.acquisition_time_s == b.acquisition_time_s
        and a.setting == b.setting
        and a.sample_present == b.sample_present
        and a.seed == b.seed
    )


@dataclass(frozen=True)
class RunRecord:
    """One scan's histograms plus the master seed and config snapshot."""

    histograms: tuple
    master_seed: int
    config_text: str = ""

    def __post_init__(self):
        object.__setattr__(self, "histograms", tuple(self.histograms))
        if not self.histograms:
            raise ValueError("run record must contain at least one histogram")


def records_equal(a, b):
    return (
        a.master_seed == b.master_seed
        and a.config_text == b.config_text
        and len(a.histograms) == len(b.histograms)
        and all(histograms_equal(x, y) for x, y in zip(a.histograms, b.histograms))
    )


@dataclass(frozen=True, eq=False)
class Apparatus:
    """Everything the virtual experiment needs, with the marginal precomputed.

    ``config_text`` is an opaque snapshot of the originating configuration
    file; it travels with every RunRecord but is never parsed here.
    """

    source: BiphotonSource
    marginal: MarginalDensity
    sample_model: Optional[sample_mod.AbsorbanceModel]
    spectrometer: SpectrometerConfig
    detector_s: DetectorConfig
    detector_i: DetectorConfig
    timing: TimingConfig
    config_text: str = ""

    @classmethod
    def build(
        cls,
        source=None,
        sample_model=None,
        spectrometer=None,
        detector_s=None,
        detector_i=None,
        timing=None,
        grid=None,
        config_text="",
    ):
        source = source if source is not None else BiphotonSource()
        return cls(
            source=source,
            marginal=signal_marginal(source, grid if grid is not None else MarginalGrid()),
            sample_model=sample_model if sample_model is not None else sample_mod.neodymium_glass(),
            spectrometer=spectrometer if spectrometer is not None else SpectrometerConfig(),
            detector_s=detector_s if detector_s is not None else DetectorConfig(),
            detector_i=detector_i if detector_i is not None else DetectorConfig(),
            timing=timing if timing is not None else TimingConfig(),
            config_text=config_text,
        )

    @property
    def coincidence_jitter_sigma_ns(self):
        return math.hypot(
            self.detector_s.timing_jitter_sigma_ns, self.detector_i.timing_jitter_sigma_ns
        )


class ExpectedRates(NamedTuple):
    true_coincidence_hz: float
    singles_s_hz: float
    singles_i_hz: float
    accidental_hz: float


def _integral_over_band(lam, values, lo, hi):
    """Integral of the piecewise-linear `values` over [lo, hi] clipped to the grid."""
    lo = max(lo, float(lam[0]))
    hi = min(hi, float(lam[-1]))
    if hi <= lo:
        return 0.0
    inner = (lam > lo) & (lam < hi)
    xs = np.concatenate(([lo], lam[inner], [hi]))
    ys = np.interp(xs, lam, values)
    return float(np.trapezoid(ys, xs))


def _sample_transmission(apparatus, sample_present, lam_s):
    if not sample_present:
        return np.ones_like(lam_s)
    if apparatus.sample_model is None:
        raise ValueError("sample_present requested but the apparatus has no sample model")
    lam_i = conjugate_wavelength(lam_s, apparatus.source.pump.center_wavelength_nm)
    return np.asarray(sample_mod.transmittance(apparatus.sample_model, lam_i))


def expected_rates(setting, sample_present, apparatus):
    """Analytic rates (true coincidences, both singles, accidentals), all /s.

    True rate folds the marginal with the passband, both efficiencies, and
    the sample transmission at the conjugate wavelength. Singles include
    dark counts. The accidental coincidence rate (uniform over the span) is
    singles_s * singles_i * span, treating the whole histogram span as the
    coincidence window.
    """
    lam = apparatus.marginal.wavelengths_nm
    rho = apparatus.marginal.density_per_nm
    t_sample = _sample_transmission(apparatus, sample_present, lam)
    eta_s = apparatus.detector_s.quantum_efficiency
    eta_i = apparatus.detector_i.quantum_efficiency
    rate = apparatus.source.pair_rate_hz

    shape = apparatus.spectrometer.passband_shape
    if shape == spectrometer_mod.TOPHAT:
        lo = setting.center_nm - 0.5 * setting.passband_nm
        hi = setting.center_nm + 0.5 * setting.passband_nm
        passed_pairs = _integral_over_band(lam, rho * t_sample, lo, hi)
        passed_signal = _integral_over_band(lam, rho, lo, hi)
    else:
        trans = spectrometer_mod.transmission(setting, lam, shape)
        passed_pairs = float(np.trapezoid(rho * t_sample * trans, lam))
        passed_signal = float(np.trapezoid(rho * trans, lam))

    true_rate = rate * eta_s * eta_i * passed_pairs
    singles_s = rate * eta_s * passed_signal + apparatus.detector_s.dark_rate_hz
    singles_i = (
        rate * eta_i * float(np.trapezoid(rho * t_sample, lam))
        + apparatus.detector_i.dark_rate_hz
    )
    accidental = singles_s * singles_i * apparatus.timing.span_ns * 1e-9
    return ExpectedRates(true_rate, singles_s, singles_i, accidental)


def run_acquisition(setting, sample_present, apparatus, seed):
    """One Monte Carlo coincidence histogram, deterministic given the seed.

    True coincidences: Poisson count at the expected rate, each at the
    electronic delay plus a Gaussian jitter of width
    sqrt(sigma_s^2 + sigma_i^2). Accidentals: Poisson count spread uniformly
    over the span. Events jittered outside the span fall off the histogram,
    as they would off a real converter's range.
    """
    rng = np.random.default_rng(seed)
    rates = expected_rates(setting, sample_present, apparatus)
    timing = apparatus.timing
    duration = timing.acquisition_time_s

    n_true = rng.poisson(rates.true_coincidence_hz * duration)
    true_times = timing.electronic_delay_ns + rng.normal(
        0.0, apparatus.coincidence_jitter_sigma_ns, n_true
    )
    n_accidental = rng.poisson(rates.accidental_hz * duration)
    accidental_times = rng.uniform(timing.span_start_ns, timing.span_stop_ns, n_accidental)

    edges = timing.channel_edges_ns()
    counts, _ = np.histogram(np.concatenate((true_times, accidental_times)), bins=edges)
    return CoincidenceHistogram(
        edges_ns=edges,
        counts=counts.astype(np.int64),
        acquisition_time_s=duration,
        setting=setting,
        sample_present=bool(sample_present),
        seed=int(seed),
    )


def setting_seed(master_seed, index):
    """Per-setting seed, independent of execution order and worker count."""
    stream = np.random.SeedSequence((int(master_seed), int(index)))
    return int(stream.generate_state(1, np.uint64)[0])


def run_scan(scan, sample_present, apparatus, master_seed):
    """One histogram per scan setting, in the given order.

    Each setting's seed comes from (master_seed, rank of the setting in
    center-wavelength order), so results depend on neither the list order
    nor any parallel scheduling: permuting the scan and sorting the output
    reproduces the in-order run.
    """
    scan = list(scan)
    if not scan:
        raise ValueError("scan must contain at least one setting")
    order = sorted(range(len(scan)), key=lambda i: (scan[i].center_nm, scan[i].passband_nm))
    rank = {position: r for r, position in enumerate(order)}
    histograms = [
        run_acquisition(setting, sample_present, apparatus, setting_seed(master_seed, rank[i]))
        for i, setting in enumerate(scan)
    ]
    return RunRecord(
        histograms=histograms, master_seed=int(master_seed), config_text=apparatus.config_text
    )


def channel_mask(edges_ns, lo_ns, hi_ns):
    """Boolean mask of channels lying wholly inside [lo, hi].

    Channels straddling a boundary are excluded; a relative tolerance
    absorbs floating-point fuzz in edge positions.
    """
    edges = np.asarray(edges_ns, dtype=float)
    slack = _EDGE_TOLERANCE * (edges[-1] - edges[0])
    return (edges[:-1] >= lo_ns - slack) & (edges[1:] <= hi_ns + slack)


# ---------------------------------------------------------------------------
# CSV bundle serialization

_MANIFEST_FIELDS = (
    "index",
    "center_nm",
    "passband_nm",
    "sample_present",
    "seed",
    "acquisition_s",
    "histogram_file",
)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def save_run(record, directory):
    """Write the CSV bundle; returns the manifest path.

    Output is a pure function of the record, so identical records produce
    byte-identical bundles.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, hist in enumerate(record.histograms):
        hist_name = f"hist_{i:04d}.csv"
        _write_csv(
            directory / hist_name,
            ("channel_start_ns", "channel_end_ns", "counts"),
            (
                (repr(float(lo)), repr(float(hi)), int(n))
                for lo, hi, n in zip(hist.edges_ns[:-1], hist.edges_ns[1:], hist.counts)
            ),
        )
        rows.append(
            (
                i,
                repr(float(hist.setting.center_nm)),
                repr(float(hist.setting.passband_nm)),
                int(hist.sample_present),
                hist.seed,
                repr(float(hist.acquisition_time_s)),
                hist_name,
            )
        )
    _write_csv(directory / "manifest.csv", _MANIFEST_FIELDS, rows)
    _write_csv(directory / "meta.csv", ("key", "value"), [("master_seed", record.master_seed)])
    (directory / "config.yaml").write_text(record.config_text, encoding="utf-8")
    return directory / "manifest.csv"


def load_run(directory):
    """Rebuild a RunRecord from a bundle written by save_run."""
    directory = Path(directory)
    with open(directory / "manifest.csv", newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames) != _MANIFEST_FIELDS:
            raise ValueError(
                f"unexpected manifest columns {reader.fieldnames} in {directory}"
            )
        manifest = list(reader)
    with open(directory / "meta.csv", newline="", encoding="utf-8") as fh:
        meta = {row["key"]: row["value"] for row in csv.DictReader(fh)}
    config_text = (directory / "config.yaml").read_text(encoding="utf-8")

    histograms = []
    for row in sorted(manifest, key=lambda r: int(r["index"])):
        starts, ends, counts = [], [], []
        with open(directory / row["histogram_file"], newline="", encoding="utf-8") as fh:
            for line in csv.DictReader(fh):
                starts.append(float(line["channel_start_ns"]))
                ends.append(float(line["channel_end_ns"]))
                counts.append(int(line["counts"]))
        edges = np.asarray(starts + [ends[-1]], dtype=float)
        histograms.append(
            CoincidenceHistogram(
                edges_ns=edges,
                counts=np.asarray(counts, dtype=np.int64),
                acquisition_time_s=float(row["acquisition_s"]),
                setting=ScanSetting(
                    center_nm=float(row["center_nm"]), passband_nm=float(row["passband_nm"])
                ),
                sample_present=bool(int(row["sample_present"])),
                seed=int(row["seed"]),
            )
        )
    return RunRecord(
        histograms=histograms,
        master_seed=int(meta["master_seed"]),
        config_text=config_text,
    )
