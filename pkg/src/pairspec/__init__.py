"""Virtual absorption spectroscopy with frequency-entangled photon pairs.

The package simulates the full measurement chain: a nonlinear-crystal pair
source, a sample in the idler path, a grating spectrometer in the signal
path, jittered single-photon detectors, and start-stop coincidence
histograms; the analysis side reduces scans of histograms to coincidence
spectra and recovers the sample's decadic absorbance from the
with-sample / no-sample ratio.
"""

from .acquisition import (
    Apparatus,
    CoincidenceHistogram,
    DetectorConfig,
    ExpectedRates,
    RunRecord,
    TimingConfig,
    expected_rates,
    load_run,
    run_acquisition,
    run_scan,
    save_run,
)
from .analysis import (
    Spectrum,
    WindowConfig,
    background_per_channel,
    coincidence_spectrum,
    expected_net_counts,
    expected_spectrum,
    fwhm_and_center,
    net_coincidences,
    reconstruct_absorbance,
    to_idler_axis,
)
from .biphoton import (
    BiphotonSource,
    MarginalDensity,
    MarginalGrid,
    PumpConfig,
    conjugate_wavelength,
    joint_density,
    sample_pair,
    sample_pairs,
    signal_marginal,
)
from .config import ConfigError, ExperimentConfig, ScanConfig, build_apparatus, load_config
from .dispersion import (
    BBO_EXTRAORDINARY,
    BBO_ORDINARY,
    CrystalConfig,
    NoPhaseMatchError,
    SellmeierSet,
    WavelengthRangeError,
    calibrate_cut_angle,
    delta_k,
    index_extraordinary_angled,
    index_ordinary,
    phase_match_sinc,
)
from .sample import AbsorbanceBand, AbsorbanceModel, absorbance, neodymium_glass, transmittance
from .spectrometer import ScanSetting, SpectrometerConfig, default_scan, resolution, transmission

__version__ = "0.1.0"

__all__ = [
    "AbsorbanceBand",
    "AbsorbanceModel",
    "Apparatus",
    "BBO_EXTRAORDINARY",
    "BBO_ORDINARY",
    "BiphotonSource",
    "CoincidenceHistogram",
    "ConfigError",
    "CrystalConfig",
    "DetectorConfig",
    "ExpectedRates",
    "ExperimentConfig",
    "MarginalDensity",
    "MarginalGrid",
    "NoPhaseMatchError",
    "PumpConfig",
    "RunRecord",
    "ScanConfig",
    "ScanSetting",
    "SellmeierSet",
    "Spectrum",
    "SpectrometerConfig",
    "TimingConfig",
    "WavelengthRangeError",
    "WindowConfig",
    "absorbance",
    "background_per_channel",
    "build_apparatus",
    "calibrate_cut_angle",
    "coincidence_spectrum",
    "conjugate_wavelength",
    "default_scan",
    "delta_k",
    "expected_net_counts",
    "expected_rates",
    "expected_spectrum",
    "fwhm_and_center",
    "index_extraordinary_angled",
    "index_ordinary",
    "joint_density",
    "load_config",
    "load_run",
    "neodymium_glass",
    "net_coincidences",
    "phase_match_sinc",
    "reconstruct_absorbance",
    "resolution",
    "run_acquisition",
    "run_scan",
    "sample_pair",
    "sample_pairs",
    "save_run",
    "signal_marginal",
    "to_idler_axis",
    "transmission",
    "transmittance",
]
