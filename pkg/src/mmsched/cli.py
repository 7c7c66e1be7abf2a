"""Command-line entry point: ``mmsched {run,sweep,validate-analysis,sweep-params}``."""
from __future__ import annotations

import argparse
import dataclasses
import math
import sys
import time

import numpy as np

from .config import FULL_SCALE, ConfigError, SystemConfig, coerce_field, config_from_mapping, load_config
from .experiment import (ALGORITHMS, AXES, manifest, report_csv, rows_csv, run_experiment, sweep,
                         sweep_params, validate_propositions, validation_csv, write_manifest)


def _csv_list(text: str) -> list[str]:
    return [t for t in text.replace(",", " ").split() if t]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="flat YAML key: value file")
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--out", metavar="PATH", help="CSV output (stdout if omitted)")
    p.add_argument("--manifest", metavar="PATH", help="JSON run manifest")
    p.add_argument("--algorithms", default=",".join(ALGORITHMS))
    p.add_argument("--snr-db", type=float, dest="snr_db", help="SNR in dB (overrides rho)")
    p.add_argument("--full-scale", action="store_true", help="M=128, N=40, K=200, S=12")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $MMSCHED_WORKERS or all cores)")
    for f in dataclasses.fields(SystemConfig):
        p.add_argument(f"--{f.name}", dest=f"cfg_{f.name}", default=None, metavar="VALUE")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmsched", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one operating point")
    _add_common(p)

    p = sub.add_parser("sweep", help="sweep SNR, ADC bits or RF chains")
    _add_common(p)
    p.add_argument("--axis", choices=AXES, required=True)
    p.add_argument("--values", required=True, help="comma/space separated axis values")

    p = sub.add_parser("validate-analysis", help="closed-form ergodic rates vs Monte Carlo")
    _add_common(p)
    p.add_argument("--snr-db-list", default="0,5")
    p.add_argument("--bits-list", default="1,2,3")
    p.add_argument("--scenarios", default="aligned,arbitrary")

    p = sub.add_parser("sweep-params", help="grid search over scheduler thresholds")
    _add_common(p)
    p.add_argument("--css-eps-list", default="0.2,0.35,0.5,0.7")
    p.add_argument("--css-n-ol-list", default="0,1,2")
    p.add_argument("--d-th-list", default="0.5,0.7,0.8,0.9")
    return parser


def resolve_config(args) -> SystemConfig:
    cfg = SystemConfig()
    if args.full_scale:
        cfg = cfg.replace(**FULL_SCALE)
    if args.config:
        cfg = load_config(args.config, cfg)
    overrides = {}
    for f in dataclasses.fields(SystemConfig):
        v = getattr(args, f"cfg_{f.name}")
        if v is not None:
            overrides[f.name] = v
    if args.snr_db is not None:
        overrides["snr_db"] = args.snr_db
    return config_from_mapping(overrides, cfg) if overrides else cfg


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _axis_value(axis: str, v: str):
    if axis == "bits":
        return math.inf if v.lower() in ("inf", "infinite") else int(v)
    if axis == "rf_chains":
        return int(v)
    return float(v)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        algorithms = _csv_list(args.algorithms)
        t0 = time.perf_counter()
        extra = {}
        if args.command == "run":
            rep = run_experiment(cfg, algorithms, args.trials, workers=args.workers,
                                 axis="snr_db", value=cfg.snr_db)
            text = report_csv(rep)
            extra = dict(algorithms=algorithms, trials=args.trials, flags=rep.flags)
        elif args.command == "sweep":
            values = [_axis_value(args.axis, v) for v in _csv_list(args.values)]
            rep = sweep(cfg, args.axis, values, algorithms, args.trials, workers=args.workers)
            text = report_csv(rep)
            extra = dict(axis=args.axis, values=values, algorithms=algorithms, trials=args.trials,
                         flags=rep.flags)
        elif args.command == "validate-analysis":
            snrs = [float(v) for v in _csv_list(args.snr_db_list)]
            bits = [coerce_field("bits", v) for v in _csv_list(args.bits_list)]
            rows = validate_propositions(cfg, snrs, bits, args.trials, _csv_list(args.scenarios))
            text = validation_csv(rows)
            extra = dict(snr_db=snrs, bits=bits, trials=args.trials)
        else:
            grid = {
                "css_eps": [float(v) for v in _csv_list(args.css_eps_list)],
                "css_n_ol": [int(v) for v in _csv_list(args.css_n_ol_list)],
            }
            css_rows = []
            if any(a != "chordal" for a in algorithms):
                css_rows = sweep_params(cfg, grid, [a for a in algorithms if a in ("css",)] or ["css"],
                                        args.trials, args.workers)
            chordal_rows = sweep_params(
                cfg, {"chordal_d_th": [float(v) for v in _csv_list(args.d_th_list)]},
                ["chordal"], args.trials, args.workers) if "chordal" in algorithms else []
            text = rows_csv(css_rows + chordal_rows)
            extra = dict(grid=grid, trials=args.trials)
        _emit(text, args.out)
        if args.manifest:
            write_manifest(args.manifest, manifest(cfg, args.command, time.perf_counter() - t0, **extra))
    except (ConfigError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"mmsched: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
