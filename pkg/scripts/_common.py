"""Shared argument handling for the experiment scripts."""
import argparse
import math
import time
from pathlib import Path

from mmsched.config import FULL_SCALE, SystemConfig
from mmsched.experiment import manifest, write_manifest


def parser(description: str, trials: int) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--trials", type=int, default=trials)
    p.add_argument("--full-scale", action="store_true", help="M=128, N=40, K=200, S=12")
    p.add_argument("--seed", type=int, default=2018)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    return p


def base_config(args, **overrides) -> SystemConfig:
    cfg = SystemConfig(seed=args.seed)
    if args.full_scale:
        cfg = cfg.replace(**FULL_SCALE)
    return cfg.replace(**overrides) if overrides else cfg


def save(args, name: str, text: str, cfg: SystemConfig, t0: float, **extra) -> None:
    args.out_dir.mkdir(parents=True, exist_ok=True)
    (args.out_dir / f"{name}.csv").write_text(text)
    write_manifest(args.out_dir / f"{name}.json",
                   manifest(cfg, name, time.perf_counter() - t0, trials=args.trials, **extra))
    print(text, end="")
    print(f"wrote {args.out_dir / name}.csv ({time.perf_counter() - t0:.1f}s)")


INF = math.inf
