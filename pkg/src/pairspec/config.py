"""Experiment configuration: one YAML document with a section per module.

Loading validates every module invariant and rejects unknown keys, so a
config file is a complete, checked snapshot of an experiment. Scalar fields
can be overridden with dotted paths (``crystal.thickness_mm=0.5``), which
lands in the nested mapping before validation. Serialization emits a
canonical document that parses back to an equal configuration.
"""

import copy
from dataclasses import dataclass, replace

import yaml

from . import acquisition, dispersion, sample
from . import spectrometer as spectrometer_mod
from .biphoton import BiphotonSource, MarginalGrid, PumpConfig, signal_marginal

SAMPLE_PRESETS = {"neodymium_glass": sample.neodymium_glass}


class ConfigError(ValueError):
    """Malformed configuration: unknown key, bad value, or broken invariant."""


@dataclass(frozen=True)
class ScanConfig:
    """Grating scan grid: start/stop centers and step, all nm."""

    start_nm: float = 810.0
    stop_nm: float = 960.0
    step_nm: float = 2.0

    def __post_init__(self):
        if not self.step_nm > 0.0:
            raise ValueError(f"scan step must be > 0 nm, got {self.step_nm}")
        if not self.start_nm < self.stop_nm:
            raise ValueError(f"scan range is empty: [{self.start_nm}, {self.stop_nm}] nm")


@dataclass(frozen=True)
class ExperimentConfig:
    source: BiphotonSource = BiphotonSource()
    grid: MarginalGrid = MarginalGrid()
    sample_model: sample.AbsorbanceModel = sample.neodymium_glass()
    spectrometer: spectrometer_mod.SpectrometerConfig = spectrometer_mod.SpectrometerConfig()
    detector_s: acquisition.DetectorConfig = acquisition.DetectorConfig()
    detector_i: acquisition.DetectorConfig = acquisition.DetectorConfig()
    timing: acquisition.TimingConfig = acquisition.TimingConfig()
    scan: ScanConfig = ScanConfig()
    calibration_target_nm: float = 883.0
    seed: int = 12345
    output_dir: str = "out"


def _section(mapping, name, allowed):
    body = mapping.get(name, {})
    if body is None:
        body = {}
    if not isinstance(body, dict):
        raise ConfigError(f"section {name!r} must be a mapping, got {type(body).__name__}")
    unknown = set(body) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {', '.join(sorted(unknown))}")
    return body


def _build(factory, section, kwargs):
    try:
        return factory(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {section!r} configuration: {exc}") from exc


def _float_fields(body, names):
    out = {}
    for key in names:
        if key in body:
            try:
                out[key] = float(body[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"field {key!r} must be a number, got {body[key]!r}") from exc
    return out


def _parse_sellmeier(body, which):
    for key in ("name", "coefficients", "valid_um"):
        if key not in body:
            raise ConfigError(f"crystal.{which} requires key {key!r}")
    unknown = set(body) - {"name", "coefficients", "valid_um"}
    if unknown:
        raise ConfigError(f"unknown key(s) in crystal.{which}: {', '.join(sorted(unknown))}")
    try:
        coefficients = tuple(float(c) for c in body["coefficients"])
        valid_um = tuple(float(v) for v in body["valid_um"])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"crystal.{which} entries must be numbers: {exc}") from exc
    return _build(
        dispersion.SellmeierSet,
        f"crystal.{which}",
        dict(name=str(body["name"]), coefficients=coefficients, valid_um=valid_um),
    )


def _parse_sample(mapping):
    body = _section(mapping, "sample", ("preset", "bands", "baseline", "thickness_scale"))
    if "preset" in body and "bands" in body:
        raise ConfigError("sample: give either 'preset' or explicit 'bands', not both")
    if "bands" in body:
        raw = body["bands"] if body["bands"] is not None else ()
        try:
            bands = tuple(
                sample.AbsorbanceBand(float(b[0]), float(b[1]), float(b[2])) for b in raw
            )
        except (TypeError, IndexError, ValueError) as exc:
            raise ConfigError(
                f"sample.bands must be a list of [center_nm, fwhm_nm, peak] triples: {exc}"
            ) from exc
        extras = _float_fields(body, ("baseline", "thickness_scale"))
        baseline = extras.get("baseline", 0.0)
        thickness = extras.get("thickness_scale", 1.0)
    else:
        # no explicit bands: fall back to a preset, by default the Nd glass
        name = str(body.get("preset", "neodymium_glass"))
        if name not in SAMPLE_PRESETS:
            raise ConfigError(
                f"unknown sample preset {name!r}; available: {', '.join(sorted(SAMPLE_PRESETS))}"
            )
        model = SAMPLE_PRESETS[name]()
        bands = model.bands
        extras = _float_fields(body, ("baseline", "thickness_scale"))
        baseline = extras.get("baseline", model.baseline)
        thickness = extras.get("thickness_scale", model.thickness_scale)
    return _build(
        sample.AbsorbanceModel,
        "sample",
        dict(bands=bands, baseline=baseline, thickness_scale=thickness),
    )


_TOP_KEYS = (
    "pump",
    "crystal",
    "source",
    "marginal_grid",
    "sample",
    "spectrometer",
    "detectors",
    "timing",
    "scan",
    "calibration",
    "seed",
    "output_dir",
)


def parse_config(mapping):
    """Validated ExperimentConfig from a nested mapping (parsed YAML)."""
    if mapping is None:
        mapping = {}
    if not isinstance(mapping, dict):
        raise ConfigError(f"configuration root must be a mapping, got {type(mapping).__name__}")
    unknown = set(mapping) - set(_TOP_KEYS)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(sorted(unknown))}")

    pump_body = _section(mapping, "pump", ("center_wavelength_nm", "linewidth_fwhm_hz", "power_mw"))
    pump = _build(PumpConfig, "pump", _float_fields(pump_body, pump_body.keys()))

    crystal_body = _section(
        mapping,
        "crystal",
        (
            "thickness_mm",
            "cut_angle_deg",
            "pump_polarization",
            "signal_polarization",
            "idler_polarization",
            "sellmeier_o",
            "sellmeier_e",
        ),
    )
    crystal_kwargs = _float_fields(crystal_body, ("thickness_mm", "cut_angle_deg"))
    for key in ("pump_polarization", "signal_polarization", "idler_polarization"):
        if key in crystal_body:
            crystal_kwargs[key] = str(crystal_body[key])
    for key in ("sellmeier_o", "sellmeier_e"):
        if key in crystal_body:
            crystal_kwargs[key] = _parse_sellmeier(crystal_body[key], key)
    crystal = _build(dispersion.CrystalConfig, "crystal", crystal_kwargs)

    source_body = _section(mapping, "source", ("pair_generation_rate", "reference_power_mw"))
    source = _build(
        BiphotonSource,
        "source",
        dict(pump=pump, crystal=crystal, **_float_fields(source_body, source_body.keys())),
    )

    grid_body = _section(mapping, "marginal_grid", ("min_nm", "max_nm", "step_nm"))
    grid = _build(MarginalGrid, "marginal_grid", _float_fields(grid_body, grid_body.keys()))

    spect_body = _section(
        mapping,
        "spectrometer",
        ("groove_gap_mm", "fiber_diameter_um", "lens_focal_mm", "passband_shape"),
    )
    spect_kwargs = _float_fields(
        spect_body, ("groove_gap_mm", "fiber_diameter_um", "lens_focal_mm")
    )
    if "passband_shape" in spect_body:
        spect_kwargs["passband_shape"] = str(spect_body["passband_shape"])
    spect = _build(spectrometer_mod.SpectrometerConfig, "spectrometer", spect_kwargs)

    det_body = _section(mapping, "detectors", ("signal", "idler"))
    detector_fields = ("quantum_efficiency", "dark_rate_hz", "timing_jitter_sigma_ns")
    detectors = {}
    for arm in ("signal", "idler"):
        arm_body = _section(det_body, arm, detector_fields)
        detectors[arm] = _build(
            acquisition.DetectorConfig,
            f"detectors.{arm}",
            _float_fields(arm_body, arm_body.keys()),
        )

    timing_body = _section(
        mapping,
        "timing",
        (
            "electronic_delay_ns",
            "span_start_ns",
            "span_stop_ns",
            "channel_count",
            "acquisition_time_s",
        ),
    )
    timing_kwargs = _float_fields(
        timing_body,
        ("electronic_delay_ns", "span_start_ns", "span_stop_ns", "acquisition_time_s"),
    )
    if "channel_count" in timing_body:
        try:
            timing_kwargs["channel_count"] = int(timing_body["channel_count"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(
                f"timing.channel_count must be an integer, got {timing_body['channel_count']!r}"
            ) from exc
    timing = _build(acquisition.TimingConfig, "timing", timing_kwargs)

    scan_body = _section(mapping, "scan", ("start_nm", "stop_nm", "step_nm"))
    scan = _build(ScanConfig, "scan", _float_fields(scan_body, scan_body.keys()))

    cal_body = _section(mapping, "calibration", ("signal_target_nm",))
    target = _float_fields(cal_body, ("signal_target_nm",)).get("signal_target_nm", 883.0)
    if not target > 0.0:
        raise ConfigError(f"calibration.signal_target_nm must be > 0, got {target}")

    seed = mapping.get("seed", 12345)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"seed must be a nonnegative integer, got {seed!r}")

    return ExperimentConfig(
        source=source,
        grid=grid,
        sample_model=_parse_sample(mapping),
        spectrometer=spect,
        detector_s=detectors["signal"],
        detector_i=detectors["idler"],
        timing=timing,
        scan=scan,
        calibration_target_nm=target,
        seed=seed,
        output_dir=str(mapping.get("output_dir", "out")),
    )


def config_to_mapping(cfg):
    """Canonical nested mapping; parse_config inverts it."""
    crystal = cfg.source.crystal
    return {
        "pump": {
            "center_wavelength_nm": cfg.source.pump.center_wavelength_nm,
            "linewidth_fwhm_hz": cfg.source.pump.linewidth_fwhm_hz,
            "power_mw": cfg.source.pump.power_mw,
        },
        "crystal": {
            "thickness_mm": crystal.thickness_mm,
            "cut_angle_deg": crystal.cut_angle_deg,
            "pump_polarization": crystal.pump_polarization,
            "signal_polarization": crystal.signal_polarization,
            "idler_polarization": crystal.idler_polarization,
            "sellmeier_o": {
                "name": crystal.sellmeier_o.name,
                "coefficients": list(crystal.sellmeier_o.coefficients),
                "valid_um": list(crystal.sellmeier_o.valid_um),
            },
            "sellmeier_e": {
                "name": crystal.sellmeier_e.name,
                "coefficients": list(crystal.sellmeier_e.coefficients),
                "valid_um": list(crystal.sellmeier_e.valid_um),
            },
        },
        "source": {
            "pair_generation_rate": cfg.source.pair_generation_rate,
            "reference_power_mw": cfg.source.reference_power_mw,
        },
        "marginal_grid": {
            "min_nm": cfg.grid.min_nm,
            "max_nm": cfg.grid.max_nm,
            "step_nm": cfg.grid.step_nm,
        },
        "sample": {
            "bands": [
                [b.center_nm, b.fwhm_nm, b.peak_absorbance] for b in cfg.sample_model.bands
            ],
            "baseline": cfg.sample_model.baseline,
            "thickness_scale": cfg.sample_model.thickness_scale,
        },
        "spectrometer": {
            "groove_gap_mm": cfg.spectrometer.groove_gap_mm,
            "fiber_diameter_um": cfg.spectrometer.fiber_diameter_um,
            "lens_focal_mm": cfg.spectrometer.lens_focal_mm,
            "passband_shape": cfg.spectrometer.passband_shape,
        },
        "detectors": {
            "signal": {
                "quantum_efficiency": cfg.detector_s.quantum_efficiency,
                "dark_rate_hz": cfg.detector_s.dark_rate_hz,
                "timing_jitter_sigma_ns": cfg.detector_s.timing_jitter_sigma_ns,
            },
            "idler": {
                "quantum_efficiency": cfg.detector_i.quantum_efficiency,
                "dark_rate_hz": cfg.detector_i.dark_rate_hz,
                "timing_jitter_sigma_ns": cfg.detector_i.timing_jitter_sigma_ns,
            },
        },
        "timing": {
            "electronic_delay_ns": cfg.timing.electronic_delay_ns,
            "span_start_ns": cfg.timing.span_start_ns,
            "span_stop_ns": cfg.timing.span_stop_ns,
            "channel_count": cfg.timing.channel_count,
            "acquisition_time_s": cfg.timing.acquisition_time_s,
        },
        "scan": {
            "start_nm": cfg.scan.start_nm,
            "stop_nm": cfg.scan.stop_nm,
            "step_nm": cfg.scan.step_nm,
        },
        "calibration": {"signal_target_nm": cfg.calibration_target_nm},
        "seed": cfg.seed,
        "output_dir": cfg.output_dir,
    }


def serialize_config(cfg):
    return yaml.safe_dump(config_to_mapping(cfg), sort_keys=False, default_flow_style=False)


def apply_overrides(mapping, overrides):
    """New mapping with dotted-path assignments applied.

    Each override is ``dotted.path=value`` with the value parsed as a YAML
    scalar (so ``0.5``, ``true``, ``tophat``, and ``[1, 2]`` all work).
    """
    result = copy.deepcopy(mapping) if mapping else {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like dotted.path=value")
        path, raw = item.split("=", 1)
        keys = [k for k in path.strip().split(".") if k]
        if not keys:
            raise ConfigError(f"override {item!r} has an empty key path")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError:
            value = raw
        node = result
        for key in keys[:-1]:
            nxt = node.get(key)
            if nxt is None:
                nxt = {}
                node[key] = nxt
            elif not isinstance(nxt, dict):
                raise ConfigError(f"override {item!r} descends into non-mapping {key!r}")
            node = nxt
        node[keys[-1]] = value
    return result


def load_config(path=None, overrides=()):
    """ExperimentConfig from a YAML file (or the defaults) plus overrides."""
    if path is None:
        mapping = {}
    else:
        try:
            text = open(path, encoding="utf-8").read()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        try:
            mapping = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    return parse_config(apply_overrides(mapping, overrides))


def scan_settings(cfg):
    return spectrometer_mod.default_scan(
        cfg.spectrometer, cfg.scan.start_nm, cfg.scan.stop_nm, cfg.scan.step_nm
    )


def build_apparatus(cfg):
    """Assembled apparatus with the marginal density precomputed.

    Wavelength-range failures here mean the marginal grid (or its conjugate
    idler range) leaves the dispersion data's validity range, which is a
    configuration problem.
    """
    try:
        marginal = signal_marginal(cfg.source, cfg.grid)
    except dispersion.WavelengthRangeError as exc:
        raise ConfigError(f"marginal grid incompatible with dispersion data: {exc}") from exc
    return acquisition.Apparatus(
        source=cfg.source,
        marginal=marginal,
        sample_model=cfg.sample_model,
        spectrometer=cfg.spectrometer,
        detector_s=cfg.detector_s,
        detector_i=cfg.detector_i,
        timing=cfg.timing,
        config_text=serialize_config(cfg),
    )


def with_seed(cfg, seed):
    return replace(cfg, seed=int(seed))
