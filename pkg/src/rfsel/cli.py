"""Command-line entry point: ``rfsel {sweep,pareto,ee,oracle,scene-dump}``."""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import numpy as np

from .errors import CapacityError, ConfigError, ModelError
from .harness import (
    ExperimentConfig,
    load_config,
    oracle_check,
    run_pareto,
    run_sweep,
    trial_seed,
    validate_config,
    write_csv,
    write_manifest,
    write_plot_data,
)
from .scene import dump_scene, generate_scene

EXIT_OK, EXIT_CONFIG, EXIT_ORACLE, EXIT_CAPACITY = 0, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="flat JSON experiment config")
    common.add_argument("--seed", type=int, help="override the config seed (unsigned 64-bit)")
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for trials")
    common.add_argument("--plot-data", action="store_true",
                        help="also write whitespace-delimited plot data and PNG figures")
    common.add_argument("--no-timing", action="store_true",
                        help="write 0 in the ms column so reruns are byte-identical")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rfsel", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)
    sub.add_parser("sweep", parents=[common], help="SNR or K sweep of the weighted objective")
    sub.add_parser("pareto", parents=[common], help="communication/sensing trade-off over weights")
    sub.add_parser("ee", parents=[common], help="energy efficiency against active chains")
    sub.add_parser("oracle", parents=[common], help="cross-check fast updates against recomputation")
    dump = sub.add_parser("scene-dump", parents=[common], help="write one trial's scene as JSON")
    dump.add_argument("--trial", type=int, default=0)
    return parser


def _configure(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.no_timing:
        cfg = dataclasses.replace(cfg, record_timing=False)
    if args.verb == "ee" and cfg.sweep not in ("k", "ee"):
        raise ConfigError("the ee verb needs a 'k' or 'ee' sweep")
    if args.verb == "sweep" and cfg.sweep == "pareto":
        raise ConfigError("use the pareto verb for a pareto config")
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    validate_config(cfg)
    return cfg


def _report(args, cfg: ExperimentConfig, records, kind: str) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = [f"{kind}.csv"]
    write_csv(records, out / files[0])
    if args.plot_data:
        from .plotting import plot_records

        write_plot_data(records, kind, out / f"{kind}.dat")
        plot_records(records, kind, out / f"{kind}.png")
        files += [f"{kind}.dat", f"{kind}.png"]
    write_manifest(cfg, files, out / f"{kind}_manifest.json")
    for r in records:
        print(f"{r.method:<10s} {r.point:>8g}  obj={r.objective_mean:.4f}±{r.objective_se:.4f}  "
              f"Ic/T={r.ic_mean:.3f}  Is/Ns={r.is_mean:.3f}  ee={r.ee_mean:.3f}")


def _run(args) -> int:
    cfg = _configure(args)
    if args.verb == "sweep":
        _report(args, cfg, run_sweep(cfg, args.threads), cfg.sweep)
    elif args.verb == "ee":
        _report(args, cfg, run_sweep(cfg, args.threads), "ee")
    elif args.verb == "pareto":
        _report(args, cfg, run_pareto(cfg, args.threads), "pareto")
    elif args.verb == "oracle":
        report = oracle_check(cfg)
        print(report.summary())
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_manifest(cfg, [], out / "oracle_manifest.json", {
            "oracle": {"passed": report.passed, "worst": report.worst,
                       "greedy_ratio": report.greedy_ratio,
                       "failures": [dataclasses.asdict(f) for f in report.failures]},
        })
        return EXIT_OK if report.passed else EXIT_ORACLE
    elif args.verb == "scene-dump":
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        scene = generate_scene(cfg.geometry, np.random.default_rng(trial_seed(cfg.seed, args.trial)))
        dump_scene(scene, out / f"scene_{args.trial}.json")
        print(out / f"scene_{args.trial}.json")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
