"""Command-line interface: simulate | analyze | fit | sweep-loss | plan-wdm.

Global flags: --config PATH, --seed N, --out DIR, --threads N. Each flag
can also be set through the environment as OPAHD_CONFIG, OPAHD_SEED,
OPAHD_OUT, OPAHD_THREADS (command line wins).

Exit codes: 0 success, 2 validation/usage error, 3 numeric failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analysis as ana
from . import traceio, wdm
from .config import ConfigError, ExperimentConfig
from .fitting import FitConvergenceError
from .signal_chain import model_variance, psd_model, synthesize_frames

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

ENV_PREFIX = "OPAHD_"


def _env_default(name: str, fallback=None):
    return os.environ.get(ENV_PREFIX + name, fallback)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opahd",
        description="Simulator and analysis toolkit for OPA-assisted broadband "
                    "homodyne measurement of squeezed light.")
    parser.add_argument("--config", default=_env_default("CONFIG"),
                        help="experiment config JSON (default: built-in defaults)")
    parser.add_argument("--seed", type=int, default=_env_default("SEED"),
                        help="master seed override")
    parser.add_argument("--out", default=_env_default("OUT", "."),
                        help="output directory")
    parser.add_argument("--threads", type=int,
                        default=int(_env_default("THREADS", "1")),
                        help="worker threads for frame synthesis")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", help="synthesize signal and shot-noise trace files")

    p_an = sub.add_parser("analyze", help="spectra, levels and histograms from traces")
    p_an.add_argument("traces", help="signal trace file")
    p_an.add_argument("shot", help="shot-noise reference trace file")

    p_fit = sub.add_parser("fit", help="fit the pump-power noise curve")
    p_fit.add_argument("levels_csv",
                       help="CSV with columns pump_mw, level_db, branch (+1/-1)")

    p_sw = sub.add_parser("sweep-loss", help="squeezing level vs loss added after the amplifier")
    p_sw.add_argument("--added-loss", default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9",
                      help="comma-separated added-loss fractions")
    p_sw.add_argument("--gains-db", default="0,35", help="comma-separated gains (dB)")
    p_sw.add_argument("--monte-carlo", action="store_true",
                      help="also estimate each point from synthesized traces")
    p_sw.add_argument("--mc-frames", type=int, default=256)

    p_wdm = sub.add_parser("plan-wdm", help="plan symmetric sideband channel pairs")
    p_wdm.add_argument("--carrier-thz", type=float, default=194.0)
    p_wdm.add_argument("--spacing-ghz", type=float, default=100.0)
    p_wdm.add_argument("--width-ghz", type=float, default=None)
    p_wdm.add_argument("--bandwidth-thz", type=float, default=6.0)
    p_wdm.add_argument("--guard-ghz", type=float, default=0.0)
    p_wdm.add_argument("--grid-aligned", action="store_true")
    return parser


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        from dataclasses import replace
        cfg = replace(cfg, seed=int(args.seed))
    return cfg


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    for label, chain, seed in (
            ("signal", cfg.chain, cfg.seed),
            ("shot", cfg.chain.without_squeezing(), cfg.seed + 1)):
        frames = synthesize_frames(chain, cfg.response, cfg.acquisition,
                                   master_seed=seed, threads=args.threads)
        path = out / f"{label}.trace"
        traceio.write_traces(path, frames)
        empirical = float(np.mean([np.var(fr.samples) for fr in frames]))
        results[label] = {
            "file": path.name,
            "frames": len(frames),
            "samples_per_frame": cfg.acquisition.samples_per_frame,
            "master_seed": seed,
            "analytic_variance": model_variance(chain, cfg.response, cfg.acquisition),
            "empirical_variance": empirical,
        }
    summary = {"schema_version": 1, "master_seed": cfg.seed,
               "config": cfg.to_dict(), "traces": results}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"wrote {out / 'signal.trace'}, {out / 'shot.trace'}, {out / 'summary.json'}")
    return EXIT_OK


def _records(path, cfg):
    data, meta = traceio.read_traces(path)
    return traceio.records_from_array(data, meta)


def cmd_analyze(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    signal = _records(args.traces, cfg)
    shot = _records(args.shot, cfg)

    spec_sig = ana.averaged_fft(signal, window=cfg.analysis.window)
    spec_shot = ana.averaged_fft(shot, window=cfg.analysis.window)
    rel = ana.relative_level(spec_sig, spec_shot)
    with open(out / "spectrum.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["freq_hz", "power_rel", "power_db"])
        for f, p in zip(rel.freqs, rel.power):
            writer.writerow([f"{f:.6e}", f"{p:.9e}", f"{10 * math.log10(p):.6f}"])

    level_db, err_db = ana.variance_level(signal, shot)
    mask = ana.artifact_mask(rel.freqs, cfg.analysis.mask_center_ghz * 1e9,
                             cfg.analysis.mask_width_ghz * 1e9)
    in_band = mask & (rel.freqs <= cfg.response.detector_f3db)
    plateau = rel.power_db()[in_band]
    report = {
        "schema_version": 1,
        "frames": len(signal),
        "level_db": level_db,
        "level_err_db": err_db,
        "plateau_mean_db": float(plateau.mean()),
        "plateau_std_db": float(plateau.std()),
        "plateau_band_hz": [0.0, cfg.response.detector_f3db],
        "artifact_mask_center_hz": cfg.analysis.mask_center_ghz * 1e9,
        "artifact_mask_width_hz": cfg.analysis.mask_width_ghz * 1e9,
    }
    (out / "levels.json").write_text(json.dumps(report, indent=2) + "\n")

    edges, counts = ana.histogram(signal, bins=cfg.analysis.histogram_bins)
    with open(out / "histogram.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "count"])
        for left, right, c in zip(edges[:-1], edges[1:], counts):
            writer.writerow([f"{left:.9e}", f"{right:.9e}", int(c)])

    print(f"level: {level_db:+.2f} dB +/- {err_db:.2f} dB "
          f"(plateau mean {plateau.mean():+.2f} dB)")
    return EXIT_OK


def _read_levels_csv(path) -> list[tuple[float, float, int]]:
    points = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {
                "pump_mw", "level_db", "branch"} <= set(reader.fieldnames):
            raise ConfigError(
                f"{path}: expected CSV header pump_mw,level_db,branch")
        for row in reader:
            pump_w = float(row["pump_mw"]) * 1e-3
            level = 10.0 ** (float(row["level_db"]) / 10.0)
            branch = int(row["branch"])
            points.append((pump_w, level, branch))
    if not points:
        raise ConfigError(f"{path}: no data rows")
    return points


def cmd_fit(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    points = _read_levels_csv(args.levels_csv)
    result = ana.fit_pump_curve(points)
    report = {
        "schema_version": 1,
        "loss_fraction": result.big_l,
        "gain_coefficient_per_w": result.a_coeff,
        "squeezing_floor_db": -10.0 * math.log10(result.big_l) if result.big_l > 0 else None,
        "covariance": result.covariance.tolist(),
        "residuals_squeeze": result.residuals_squeeze.tolist(),
        "residuals_antisqueeze": result.residuals_antisqueeze.tolist(),
        "cost": result.cost,
        "iterations": result.n_iter,
    }
    (out / "fit.json").write_text(json.dumps(report, indent=2) + "\n")
    floor = report["squeezing_floor_db"]
    floor_txt = f"{floor:.2f} dB floor" if floor is not None else "lossless"
    print(f"loss fraction L = {result.big_l:.4f} ({floor_txt}), "
          f"a = {result.a_coeff:.4f} /W")
    return EXIT_OK


def cmd_sweep_loss(args) -> int:
    cfg = _load_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = [float(x) for x in args.added_loss.split(",") if x.strip()]
    gains = [float(x) for x in args.gains_db.split(",") if x.strip()]
    rows = ana.loss_sweep(cfg.chain, grid, tuple(gains),
                          monte_carlo=args.monte_carlo,
                          resp=cfg.response, acq=cfg.acquisition,
                          mc_frames=args.mc_frames, master_seed=cfg.seed)
    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gain_db", "added_loss", "squeezing_db_oracle", "squeezing_db_mc"])
        for row in rows:
            mc = "" if row.squeezing_db_mc is None else f"{row.squeezing_db_mc:.6f}"
            writer.writerow([row.gain_db, row.added_loss,
                             f"{row.squeezing_db_oracle:.6f}", mc])
    print(f"wrote {out / 'sweep.csv'} ({len(rows)} rows)")
    return EXIT_OK


def cmd_plan_wdm(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    plan = wdm.plan_bands(
        carrier_f=args.carrier_thz * 1e12,
        channel_spacing=args.spacing_ghz * 1e9,
        channel_width=None if args.width_ghz is None else args.width_ghz * 1e9,
        source_bandwidth=args.bandwidth_thz * 1e12,
        guard=args.guard_ghz * 1e9,
        grid_aligned=args.grid_aligned,
    )
    wdm.write_plan_json(out / "plan.json", plan)
    wdm.write_plan_csv(out / "plan.csv", plan)
    if plan.pairs:
        print(f"{len(plan.pairs)} channel pairs, usable clock "
              f"{plan.usable_clock_hz / 1e9:.0f} GHz per pair")
    else:
        print(f"empty plan: {plan.diagnostic}")
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "fit": cmd_fit,
    "sweep-loss": cmd_sweep_loss,
    "plan-wdm": cmd_plan_wdm,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, traceio.TraceFormatError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (FitConvergenceError, FloatingPointError, ArithmeticError) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
