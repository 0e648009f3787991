"""Command-line driver.

Subcommands mirror the experiment's stages: ``jsa`` exports the source's
signal-arm marginal density, ``calibrate`` solves the crystal cut angle for
the configured operating point, ``simulate`` runs a scan and writes the
histogram bundle, ``reconstruct`` reduces two bundles (no-sample reference
and with-sample) to coincidence spectra and the recovered absorbance.

Exit codes: 0 success, 1 usage, 2 configuration or I/O, 3 calibration
failure, 4 data mismatch between bundles.
"""

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import acquisition, analysis, dispersion, units
from .biphoton import signal_marginal
from .config import (
    ConfigError,
    build_apparatus,
    load_config,
    scan_settings,
    serialize_config,
    with_seed,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_CALIBRATION = 3
EXIT_DATA_MISMATCH = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common_flags():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML configuration file")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config field by dotted path, e.g. crystal.thickness_mm=0.5",
    )
    common.add_argument("--plot", action="store_true", help="also write plot images")
    return common


def build_parser():
    common = _common_flags()
    parser = _Parser(prog="pairspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_jsa = sub.add_parser("jsa", parents=[common], help="export the signal marginal density")
    p_jsa.set_defaults(func=cmd_jsa)

    p_cal = sub.add_parser("calibrate", parents=[common], help="solve the crystal cut angle")
    p_cal.set_defaults(func=cmd_calibrate)

    p_sim = sub.add_parser("simulate", parents=[common], help="run a scan, write the bundle")
    p_sim.add_argument(
        "--with-sample", action="store_true", help="place the sample in the idler path"
    )
    p_sim.set_defaults(func=cmd_simulate)

    p_rec = sub.add_parser(
        "reconstruct", parents=[common], help="reduce two bundles to an absorbance spectrum"
    )
    p_rec.add_argument("reference_bundle", help="bundle directory of the no-sample run")
    p_rec.add_argument("sample_bundle", help="bundle directory of the with-sample run")
    p_rec.set_defaults(func=cmd_reconstruct)
    return parser


def _load(args):
    cfg = load_config(args.config, args.overrides)
    if args.seed is not None:
        cfg = with_seed(cfg, args.seed)
    out = Path(args.out if args.out is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, out


def _write_rows(path, header, rows):
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def cmd_jsa(args):
    cfg, out = _load(args)
    try:
        marginal = signal_marginal(cfg.source, cfg.grid)
    except dispersion.WavelengthRangeError as exc:
        raise ConfigError(f"marginal grid incompatible with dispersion data: {exc}") from exc
    path = out / "marginal.csv"
    _write_rows(
        path,
        ("wavelength_nm", "density_per_nm"),
        (
            (repr(float(lam)), repr(float(rho)))
            for lam, rho in zip(marginal.wavelengths_nm, marginal.density_per_nm)
        ),
    )
    peak = marginal.argmax_nm()
    print(f"marginal written to {path}")
    print(f"peak {peak:.2f} nm over grid [{cfg.grid.min_nm}, {cfg.grid.max_nm}] nm")
    if args.plot:
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(marginal.wavelengths_nm, marginal.density_per_nm)
        ax.set_xlabel("signal wavelength (nm)")
        ax.set_ylabel("density (1/nm)")
        fig.tight_layout()
        fig.savefig(out / "marginal.png", dpi=150)
        plt.close(fig)
    return EXIT_OK


def cmd_calibrate(args):
    cfg, out = _load(args)
    crystal = cfg.source.crystal
    angle = dispersion.calibrate_cut_angle(
        crystal, cfg.calibration_target_nm, cfg.source.pump.center_wavelength_nm
    )
    solved = dataclasses.replace(crystal, cut_angle_deg=angle)
    omega_s = units.omega_from_nm(cfg.calibration_target_nm)
    omega_i = cfg.source.pump.omega_p - omega_s
    residual = float(dispersion.delta_k(omega_s, omega_i, solved))

    new_cfg = dataclasses.replace(
        cfg, source=dataclasses.replace(cfg.source, crystal=solved)
    )
    config_path = out / "config_calibrated.yaml"
    config_path.write_text(serialize_config(new_cfg), encoding="utf-8")
    _write_rows(
        out / "calibration_report.csv",
        ("key", "value"),
        (
            ("signal_target_nm", repr(float(cfg.calibration_target_nm))),
            ("pump_nm", repr(float(cfg.source.pump.center_wavelength_nm))),
            ("cut_angle_deg", repr(float(angle))),
            ("delta_k_residual_rad_m", repr(residual)),
        ),
    )
    print(f"cut angle {angle!r} deg (delta_k residual {residual:.3e} rad/m)")
    print(f"calibrated config written to {config_path}")
    return EXIT_OK


def cmd_simulate(args):
    cfg, out = _load(args)
    apparatus = build_apparatus(cfg)
    scan = scan_settings(cfg)
    record = acquisition.run_scan(scan, args.with_sample, apparatus, cfg.seed)
    acquisition.save_run(record, out)
    spectrum = analysis.coincidence_spectrum(record)
    label = "with sample" if args.with_sample else "reference"
    print(f"{label} scan: {len(scan)} settings, seed {cfg.seed}, bundle in {out}")
    for lam, value, sigma in zip(spectrum.wavelengths_nm, spectrum.values, spectrum.sigmas):
        print(f"  {lam:8.2f} nm  net {value:12.1f} +- {sigma:.1f}")
    return EXIT_OK


def cmd_reconstruct(args):
    cfg, out = _load(args)
    reference = acquisition.load_run(args.reference_bundle)
    with_sample = acquisition.load_run(args.sample_bundle)

    spec_ref = analysis.coincidence_spectrum(reference)
    spec_sam = analysis.coincidence_spectrum(with_sample)
    analysis.save_spectrum(spec_ref, out / "spectrum_reference.csv")
    analysis.save_spectrum(spec_sam, out / "spectrum_sample.csv")

    lambda_p = cfg.source.pump.center_wavelength_nm
    recon = analysis.reconstruct_absorbance(spec_ref, spec_sam, lambda_p)
    truth = np.asarray(
        [float(v) for v in _model_absorbance(cfg, recon.wavelengths_nm)], dtype=float
    )
    _write_rows(
        out / "absorbance.csv",
        ("wavelength_nm", "value", "sigma", "flags", "model_absorbance"),
        (
            (repr(float(lam)), repr(float(val)), repr(float(sig)), int(flag), repr(float(tr)))
            for lam, val, sig, flag, tr in zip(
                recon.wavelengths_nm, recon.values, recon.sigmas, recon.low_stats, truth
            )
        ),
    )
    rms = analysis.absorbance_rms(recon, cfg.sample_model)
    flagged = int(recon.low_stats.sum())
    print(f"absorbance written to {out / 'absorbance.csv'}")
    print(
        f"rms error vs configured model over {len(recon) - flagged} unflagged points: {rms:.4f}"
        f" ({flagged} flagged low-statistics)"
    )
    if args.plot:
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(6, 4))
        keep = ~recon.low_stats
        ax.errorbar(
            recon.wavelengths_nm[keep],
            recon.values[keep],
            yerr=recon.sigmas[keep],
            fmt="o",
            ms=3,
            label="reconstructed",
        )
        ax.plot(recon.wavelengths_nm, truth, label="configured model")
        ax.set_xlabel("idler wavelength (nm)")
        ax.set_ylabel("decadic absorbance")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out / "absorbance.png", dpi=150)
        plt.close(fig)
    return EXIT_OK


def _model_absorbance(cfg, wavelengths_nm):
    from . import sample as sample_mod

    return np.asarray(sample_mod.absorbance(cfg.sample_model, wavelengths_nm))


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except dispersion.NoPhaseMatchError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except analysis.GridMismatchError as exc:
        print(f"data mismatch: {exc}", file=sys.stderr)
        return EXIT_DATA_MISMATCH
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
