"""Scenario configuration."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

SCENARIOS = ("aligned", "arbitrary")
COMBINER_POLICIES = ("auto", "full-dft", "strongest-beams", "fixed-indices")


class ConfigError(ValueError):
    """Invalid or inconsistent scenario parameters."""


@dataclass
class SystemConfig:
    # array / RF chains / users
    M: int = 32
    N: int = 16
    K: int = 50
    S: int = 4
    rho: float = 10 ** 0.6  # linear SNR (6 dB)
    lambda_L: float = 3.0
    fixed_paths: int | None = None  # overrides the Poisson path count when set
    bits: float = 3  # math.inf for an ideal ADC
    scenario: str = "arbitrary"
    combiner_policy: str = "auto"
    fixed_indices: tuple[int, ...] | None = None
    seed: int = 2018

    # scheduler knobs
    css_eps: float = 0.35
    css_n_ol: int = 1
    css_n_b: int | None = None  # None -> per-user path count L_k
    mbas_n_ol: int = 0
    chordal_d_th: float = 0.8
    sus_eps: float = 0.35

    def __post_init__(self):
        if self.fixed_indices is not None:
            self.fixed_indices = tuple(int(i) for i in self.fixed_indices)
        if isinstance(self.bits, str):
            self.bits = parse_bits(self.bits)
        self.validate()

    @property
    def snr_db(self) -> float:
        return 10.0 * math.log10(self.rho)

    @property
    def infinite_resolution(self) -> bool:
        return math.isinf(self.bits)

    def validate(self) -> None:
        if not (1 <= self.S <= self.N <= self.M):
            raise ConfigError(f"need 1 <= S <= N <= M, got S={self.S}, N={self.N}, M={self.M}")
        if self.K < self.S:
            raise ConfigError(f"need K >= S, got K={self.K}, S={self.S}")
        if not self.rho > 0:
            raise ConfigError(f"rho must be positive, got {self.rho}")
        if not self.lambda_L > 0:
            raise ConfigError(f"lambda_L must be positive, got {self.lambda_L}")
        if self.fixed_paths is not None and self.fixed_paths < 1:
            raise ConfigError("fixed_paths must be >= 1")
        if not (math.isinf(self.bits) or (self.bits == int(self.bits) and self.bits >= 1)):
            raise ConfigError(f"bits must be a positive integer or inf, got {self.bits}")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.combiner_policy not in COMBINER_POLICIES:
            raise ConfigError(
                f"combiner_policy must be one of {COMBINER_POLICIES}, got {self.combiner_policy!r}"
            )
        if self.combiner_policy == "full-dft" and self.N != self.M:
            raise ConfigError("combiner_policy 'full-dft' requires N == M")
        if self.combiner_policy == "fixed-indices":
            idx = self.fixed_indices
            if idx is None or len(idx) != self.N:
                raise ConfigError("fixed-indices policy needs exactly N fixed_indices")
            if len(set(idx)) != len(idx):
                raise ConfigError(f"duplicate fixed_indices: {idx}")
            if min(idx) < 0 or max(idx) >= self.M:
                raise ConfigError("fixed_indices out of range [0, M)")
        if not (0 < self.css_eps <= 1) or not (0 < self.sus_eps <= 1):
            raise ConfigError("css_eps and sus_eps must lie in (0, 1]")
        if self.css_n_ol < 0 or self.mbas_n_ol < 0:
            raise ConfigError("overlap thresholds must be >= 0")
        if self.css_n_b is not None and self.css_n_b < 1:
            raise ConfigError("css_n_b must be >= 1")
        if not (0 < self.chordal_d_th < 1):
            raise ConfigError("chordal_d_th must lie in (0, 1)")
        if self.scenario == "aligned" and self.fixed_paths is not None and self.fixed_paths > self.M:
            raise ConfigError("aligned scenario cannot place more than M distinct grid AoAs")

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["bits"] = "inf" if math.isinf(self.bits) else int(self.bits)
        if d["fixed_indices"] is not None:
            d["fixed_indices"] = list(d["fixed_indices"])
        return d


FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SystemConfig)}


def parse_bits(value) -> float:
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("inf", "infinite", "none"):
            return math.inf
        return int(v)
    if value is None:
        return math.inf
    return value


def coerce_field(name: str, value):
    """Convert a text/YAML value to the type of ``SystemConfig.<name>``."""
    if name not in FIELD_TYPES:
        raise ConfigError(f"unknown config key {name!r}")
    if name == "bits":
        return parse_bits(value)
    if name == "fixed_indices":
        if value is None:
            return None
        if isinstance(value, str):
            value = [v for v in value.replace(",", " ").split() if v]
        return tuple(int(v) for v in value)
    if name in ("fixed_paths", "css_n_b"):
        if value is None or (isinstance(value, str) and value.lower() in ("none", "")):
            return None
        return int(value)
    if name in ("scenario", "combiner_policy"):
        return str(value)
    if name in ("M", "N", "K", "S", "seed", "css_n_ol", "mbas_n_ol"):
        return int(value)
    return float(value)


def config_from_mapping(data: dict[str, Any], base: SystemConfig | None = None) -> SystemConfig:
    """Build a config from flat key/value pairs.  ``snr_db`` is accepted as an alias for ``rho``."""
    base = base or SystemConfig()
    changes = {}
    for key, value in data.items():
        if key == "snr_db":
            changes["rho"] = 10.0 ** (float(value) / 10.0)
            continue
        changes[key] = coerce_field(key, value)
    try:
        return dataclasses.replace(base, **changes)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path, base: SystemConfig | None = None) -> SystemConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from exc
    if not isinstance(data, dict) or any(isinstance(v, dict) for v in data.values()):
        raise ConfigError(f"{path}: config must be a flat key-value mapping")
    return config_from_mapping(data, base)


FULL_SCALE = dict(M=128, N=40, K=200, S=12)
