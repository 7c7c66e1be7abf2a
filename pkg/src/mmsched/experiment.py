"""Seeded, paired Monte Carlo experiments.

Every random draw is keyed by ``(seed, point, trial, purpose)`` through
``numpy.random.SeedSequence`` spawn keys, so results do not depend on trial
order or on how trials are split across worker processes.
"""
from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy

from . import __version__
from .analysis import ergodic_rate_aligned, ergodic_rate_leakage_lb
from .channel import build_dft_combiner, draw_user_channels, select_combiner
from .config import ConfigError, SystemConfig
from .quantization import aqnm_params
from .rates import SingularChannelError, _rates_from_w, sum_rate, zf_combiner
from .schedulers import (schedule_chordal, schedule_css, schedule_greedy, schedule_mbas,
                         schedule_random, schedule_sus)

ALGORITHMS = ("css", "greedy", "chordal", "sus", "mbas", "random")
AXES = ("snr_db", "bits", "rf_chains")
PURPOSES = {"channel": 0, "chordal": 1, "random": 2}
CSV_COLUMNS = ("axis_value", "algorithm", "mean_sum_rate", "std_err", "trials", "invalid_trials")

WORKERS_ENV = "MMSCHED_WORKERS"
DEBUG_ENV = "MMSCHED_DEBUG"


def stream(seed: int, point: int, trial: int, purpose: str) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(point), int(trial), PURPOSES[purpose]))
    return np.random.default_rng(ss)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class TrialSetup:
    users: list
    H: np.ndarray
    H_b: np.ndarray
    grid: np.ndarray
    path_counts: np.ndarray


def setup_trial(config: SystemConfig, point: int, trial: int) -> TrialSetup:
    users, H = draw_user_channels(config, stream(config.seed, point, trial, "channel"))
    bank = build_dft_combiner(config.M)
    comb = select_combiner(bank, H, config.N, config.combiner_policy, config.fixed_indices)
    H_b = comb.A_tilde.conj().T @ H
    return TrialSetup(users, H, H_b, comb.selected_grid, np.array([u.L for u in users]))


def schedule(name: str, setup: TrialSetup, config: SystemConfig, point: int, trial: int):
    if name == "css":
        return schedule_css(setup.H_b, config, setup.path_counts)
    if name == "greedy":
        return schedule_greedy(setup.H_b, config)
    if name == "sus":
        return schedule_sus(setup.H_b, config)
    if name == "mbas":
        return schedule_mbas(setup.H_b, config, setup.path_counts)
    if name == "chordal":
        return schedule_chordal([u.aoa_spatial for u in setup.users], setup.grid, config,
                                stream(config.seed, point, trial, "chordal"))
    if name == "random":
        return schedule_random(config.K, config.S, stream(config.seed, point, trial, "random"))
    raise ConfigError(f"unknown algorithm {name!r}; choose from {ALGORITHMS}")


def _digest(a: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(a).tobytes()).hexdigest()


def run_trial(config: SystemConfig, algorithms: Sequence[str], point: int, trial: int) -> dict[str, float]:
    """Sum rate per algorithm on one shared channel realization (NaN if ZF failed)."""
    setup = setup_trial(config, point, trial)
    alpha = aqnm_params(config.bits).alpha
    debug = bool(os.environ.get(DEBUG_ENV))
    ref = _digest(setup.H_b) if debug else None
    out = {}
    for name in algorithms:
        sched = schedule(name, setup, config, point, trial).scheduled
        if debug and _digest(setup.H_b) != ref:
            raise AssertionError(f"{name} modified the shared channel realization")
        if not sched:
            out[name] = 0.0
            continue
        try:
            out[name] = sum_rate(setup.H_b[:, sched], config.rho, alpha).sum
        except SingularChannelError:
            out[name] = math.nan
    return out


def _run_chunk(args):
    config, algorithms, point, trials = args
    return [(t, run_trial(config, algorithms, point, t)) for t in trials]


def run_trials(config: SystemConfig, algorithms: Sequence[str], trials: int, point: int = 0,
               workers: int | None = None) -> dict[str, np.ndarray]:
    """Per-trial sum rates, ``{algorithm: array(trials)}`` in trial order."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    for a in algorithms:
        if a not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {a!r}; choose from {ALGORITHMS}")
    workers = default_workers() if workers is None else workers
    idx = list(range(trials))
    if workers <= 1 or trials < 2 * workers:
        results = _run_chunk((config, algorithms, point, idx))
    else:
        chunks = [idx[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(itertools.chain.from_iterable(
                pool.map(_run_chunk, [(config, algorithms, point, c) for c in chunks])))
    results.sort(key=lambda r: r[0])
    return {a: np.array([r[1][a] for r in results]) for a in algorithms}


@dataclass
class RateReport:
    axis: str
    values: list
    algorithms: list[str]
    mean: dict[str, list[float]]
    std_err: dict[str, list[float]]
    trials: int
    invalid: dict[str, list[int]]
    config: dict
    wall_time: float = 0.0
    flags: dict = field(default_factory=dict)

    def rows(self):
        for i, v in enumerate(self.values):
            for a in self.algorithms:
                yield (v, a, self.mean[a][i], self.std_err[a][i], self.trials, self.invalid[a][i])

    def point(self, algorithm: str, i: int = 0) -> tuple[float, float]:
        return self.mean[algorithm][i], self.std_err[algorithm][i]


def summarize(samples: np.ndarray) -> tuple[float, float, int]:
    """Mean, standard error (sample std / sqrt(n)) and invalid count, ignoring NaNs."""
    valid = samples[~np.isnan(samples)]
    n = valid.size
    if n == 0:
        return math.nan, math.nan, int(samples.size)
    se = float(np.std(valid, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return float(np.mean(valid)), se, int(samples.size - n)


def _flags(algorithms, config: SystemConfig) -> dict:
    flags = {}
    if "mbas" in algorithms:
        flags["mbas"] = "baseline-approximate reconstruction"
    if "css" in algorithms and config.infinite_resolution:
        flags["css"] = "alpha=1: unquantized SINR fallback"
    policy = config.combiner_policy
    if policy == "auto":
        policy = "full-dft" if config.N == config.M else "strongest-beams"
    flags["combiner_policy"] = policy
    return flags


def run_experiment(config: SystemConfig, algorithms: Sequence[str], trials: int, point: int = 0,
                   workers: int | None = None, axis: str = "point", value=None) -> RateReport:
    t0 = time.perf_counter()
    samples = run_trials(config, algorithms, trials, point, workers)
    mean, se, inv = {}, {}, {}
    for a in algorithms:
        m, s, n_bad = summarize(samples[a])
        mean[a], se[a], inv[a] = [m], [s], [n_bad]
    return RateReport(axis=axis, values=[value], algorithms=list(algorithms), mean=mean, std_err=se,
                      trials=trials, invalid=inv, config=config.to_dict(),
                      wall_time=time.perf_counter() - t0, flags=_flags(algorithms, config))


def config_at(config: SystemConfig, axis: str, value) -> SystemConfig:
    if axis == "snr_db":
        return config.replace(rho=10.0 ** (float(value) / 10.0))
    if axis == "bits":
        v = value if isinstance(value, (int, float)) else str(value)
        if isinstance(v, str):
            v = math.inf if v.lower() in ("inf", "infinite") else int(v)
        return config.replace(bits=v)
    if axis == "rf_chains":
        return config.replace(N=int(value))
    raise ConfigError(f"axis must be one of {AXES}, got {axis!r}")


def sweep(config: SystemConfig, axis: str, values: Iterable, algorithms: Sequence[str], trials: int,
          workers: int | None = None) -> RateReport:
    """One :func:`run_experiment` per axis value; point ``p`` draws from its own seed stream."""
    values = list(values)
    t0 = time.perf_counter()
    reports = [run_experiment(config_at(config, axis, v), algorithms, trials, point=p, workers=workers)
               for p, v in enumerate(values)]
    return RateReport(
        axis=axis, values=values, algorithms=list(algorithms),
        mean={a: [r.mean[a][0] for r in reports] for a in algorithms},
        std_err={a: [r.std_err[a][0] for r in reports] for a in algorithms},
        trials=trials,
        invalid={a: [r.invalid[a][0] for r in reports] for a in algorithms},
        config=config.to_dict(), wall_time=time.perf_counter() - t0,
        flags=_flags(algorithms, config),
    )


# --- analysis validation ---------------------------------------------------

@dataclass
class ValidationRow:
    scenario: str
    snr_db: float
    bits: float
    closed_form: float
    mc_mean: float
    mc_std_err: float
    kind: str

    @property
    def rel_gap(self) -> float:
        return (self.mc_mean - self.closed_form) / self.mc_mean


def validate_propositions(config: SystemConfig, snr_db: Sequence[float], bits: Sequence,
                          trials: int, scenarios: Sequence[str] = ("aligned", "arbitrary")
                          ) -> list[ValidationRow]:
    """Closed-form ergodic rates next to chordal-scheduling Monte Carlo.

    Forces single-path users and ``N = M``.  The channels and the schedule do
    not depend on SNR or resolution, so each trial is scheduled once and its
    rate evaluated at every ``(snr, bits)`` pair.
    """
    base = config.replace(N=config.M, fixed_paths=1, combiner_policy="full-dft")
    pairs = [(float(s), b) for s in snr_db for b in bits]
    alphas = [aqnm_params(b).alpha for _, b in pairs]
    rows = []
    for p, scen in enumerate(scenarios):
        cfg = base.replace(scenario=scen)
        acc = np.full((trials, len(pairs)), np.nan)
        for t in range(trials):
            setup = setup_trial(cfg, p, t)
            sched = schedule("chordal", setup, cfg, p, t).scheduled
            H = setup.H_b[:, sched]
            try:
                W = zf_combiner(H)
            except SingularChannelError:
                continue
            for j, ((s_db, _), a) in enumerate(zip(pairs, alphas)):
                acc[t, j] = np.sum(np.log2(1.0 + _rates_from_w(W, H, 10 ** (s_db / 10), a)))
        for j, ((s_db, b), a) in enumerate(zip(pairs, alphas)):
            rho = 10 ** (s_db / 10)
            if scen == "aligned":
                cf = ergodic_rate_aligned(cfg.S, cfg.M, rho, a)
            else:
                cf = ergodic_rate_leakage_lb(cfg.S, cfg.M, rho, a)
            m, se, _ = summarize(acc[:, j])
            rows.append(ValidationRow(scen, s_db, b, cf.total, m, se, cf.kind))
    return rows


def sweep_params(config: SystemConfig, grid: dict[str, Sequence], algorithms: Sequence[str],
                 trials: int, workers: int | None = None) -> list[dict]:
    """Mean sum rate for every combination of the scheduler knobs in ``grid``.

    All combinations reuse point 0, so they are compared on identical channels.
    """
    keys = list(grid)
    rows = []
    for combo in itertools.product(*(grid[k] for k in keys)):
        cfg = config.replace(**dict(zip(keys, combo)))
        rep = run_experiment(cfg, algorithms, trials, point=0, workers=workers)
        for a in algorithms:
            rows.append({**dict(zip(keys, combo)), "algorithm": a,
                         "mean_sum_rate": rep.mean[a][0], "std_err": rep.std_err[a][0]})
    return rows


# --- serialization ---------------------------------------------------------

def fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def report_csv(report: RateReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in report.rows():
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def rows_csv(rows: list[dict]) -> str:
    """One header over the union of keys (first-seen order); missing cells stay empty."""
    buf = io.StringIO()
    if rows:
        keys = list(dict.fromkeys(k for r in rows for k in r))
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for r in rows:
            w.writerow([fmt(r[k]) if k in r else "" for k in keys])
    return buf.getvalue()


def validation_csv(rows: list[ValidationRow]) -> str:
    return rows_csv([dict(scenario=r.scenario, snr_db=r.snr_db, bits=r.bits, kind=r.kind,
                          closed_form=r.closed_form, mc_mean=r.mc_mean, mc_std_err=r.mc_std_err,
                          rel_gap=r.rel_gap) for r in rows])


def manifest(config: SystemConfig, command: str, wall_time: float, **extra) -> dict:
    return dict(
        command=command,
        config=config.to_dict(),
        seed=config.seed,
        wall_time_s=wall_time,
        versions=dict(mmsched=__version__, python=platform.python_version(),
                      numpy=np.__version__, scipy=scipy.__version__),
        **extra,
    )


def write_manifest(path, data: dict) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, default=str)
        fh.write("\n")
