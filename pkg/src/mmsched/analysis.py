"""Closed-form ergodic sum rates for chordal scheduling with single-path users (N = M)."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

from .numerics import FejerMoments, exp_scaled_gamma0, fejer_moments

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class ErgodicRateResult:
    total: float
    r_inf: float | None = None
    r_loss: float | None = None
    inputs: dict = field(default_factory=dict)
    kind: str = "exact"


def _eg(z: float) -> float:
    # e^z Gamma(0, z), with z = inf contributing nothing
    return 0.0 if math.isinf(z) else exp_scaled_gamma0(z)


def ergodic_rate_inf(S: int, M: int, rho: float) -> float:
    """Unquantized ergodic sum rate of ``S`` orthogonal single-path users."""
    return S / _LN2 * _eg(1.0 / (rho * M))


def ergodic_rate_aligned(S: int, M: int, rho: float, alpha: float) -> ErgodicRateResult:
    """Ergodic sum rate when every AoA sits on a DFT beam, split into ideal rate and quantization loss."""
    if S < 1 or M < 1 or not rho > 0 or not (0 < alpha <= 1):
        raise ValueError("need S >= 1, M >= 1, rho > 0, alpha in (0, 1]")
    r_inf = ergodic_rate_inf(S, M, rho)
    if alpha >= 1.0:
        r_loss = 0.0
    else:
        r_loss = -S / _LN2 * _eg(1.0 / (rho * (1.0 - alpha) * M))
    return ErgodicRateResult(total=r_inf + r_loss, r_inf=r_inf, r_loss=r_loss,
                             inputs=dict(S=S, M=M, rho=rho, alpha=alpha))


_moment_cache: dict[int, FejerMoments] = {}
_moment_lock = threading.Lock()


def cached_fejer_moments(M: int) -> FejerMoments:
    m = _moment_cache.get(M)
    if m is None:
        m = fejer_moments(M, 32 * M)
        with _moment_lock:
            _moment_cache.setdefault(M, m)
    return _moment_cache[M]


def ergodic_rate_leakage_lb(S: int, M: int, rho: float, alpha: float) -> ErgodicRateResult:
    """Approximate lower bound on the ergodic sum rate for arbitrary (off-grid) AoAs.

    Reported with ``kind="approximate lower bound"``.  At ``alpha == 1`` the
    bound collapses to the unquantized rate.
    """
    if S < 1 or M < 1 or not rho > 0 or not (0 < alpha <= 1):
        raise ValueError("need S >= 1, M >= 1, rho > 0, alpha in (0, 1]")
    inputs = dict(S=S, M=M, rho=rho, alpha=alpha)
    if alpha >= 1.0:
        r = ergodic_rate_inf(S, M, rho)
        return ErgodicRateResult(total=r, r_inf=r, r_loss=0.0, inputs=inputs,
                                 kind="approximate lower bound")
    fm = cached_fejer_moments(M)
    c1 = M * alpha * rho
    c2 = M * M * rho * (1.0 - alpha) * fm.f1
    c3 = M * M * rho * (1.0 - alpha) * (S - 1) * fm.f2
    total = S / _LN2 * (_eg((1.0 + c3) / (c1 + c2)) - _eg((1.0 + c3) / c2))
    return ErgodicRateResult(total=total, inputs=inputs, kind="approximate lower bound")
