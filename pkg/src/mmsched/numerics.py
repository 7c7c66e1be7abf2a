"""Special functions and quantizer-design numerics.

Everything here is pure and deterministic.  The exponential integral
``Gamma(0, z)`` and the Lloyd-Max tables are the two places where the
closed-form rate analysis touches floating point, so both are written to a
tolerance well below Monte Carlo noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtr

EULER_GAMMA = 0.57721566490153286061

# e^{-z} underflows to 0.0 in double precision beyond this.
_UNDERFLOW_Z = 745.2

#: Sentinel for an ideal (unquantized) ADC.
INFINITE_BITS = math.inf


def _e1_series(z: float) -> float:
    # E1(z) = -gamma - ln z - sum_{n>=1} (-z)^n / (n n!)
    total = 0.0
    term = 1.0
    n = 1
    while True:
        term *= -z / n
        contrib = term / n
        total += contrib
        if abs(contrib) < 1e-17 * max(abs(total), 1e-300):
            break
        n += 1
        if n > 500:
            break
    return -EULER_GAMMA - math.log(z) - total


def _e1_scaled_cf(z: float) -> float:
    # e^z E1(z) by modified Lentz on the continued fraction
    # 1/(z+1- 1/(z+3- 4/(z+5- ...))).
    tiny = 1e-300
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10_000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h


def exp_integral_gamma0(z: float) -> float:
    """Upper incomplete gamma ``Gamma(0, z) = int_z^inf e^{-t}/t dt``.

    Series for ``z < 1``, continued fraction otherwise.  Returns 0.0 once
    ``e^{-z}`` underflows.
    """
    z = float(z)
    if not z > 0.0:
        raise ValueError(f"Gamma(0, z) requires z > 0, got {z!r}")
    if z < 1.0:
        return _e1_series(z)
    if z > _UNDERFLOW_Z:
        return 0.0
    return math.exp(-z) * _e1_scaled_cf(z)


def exp_scaled_gamma0(z: float) -> float:
    """``e^z * Gamma(0, z)``, finite for every ``z > 0`` (tends to ``1/z``)."""
    z = float(z)
    if not z > 0.0:
        raise ValueError(f"Gamma(0, z) requires z > 0, got {z!r}")
    if math.isinf(z):
        return 0.0
    if z < 1.0:
        return math.exp(z) * _e1_series(z)
    return _e1_scaled_cf(z)


def fejer_kernel(delta, M: int):
    """Normalized steering-vector overlap ``|a(x)^H a(x + delta)|`` for an M-element ULA.

    Equals ``|sin(M pi delta / 2)| / (M |sin(pi delta / 2)|)`` with the
    removable singularities at even integers set to 1.  Accepts scalars or
    arrays.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    d = np.asarray(delta, dtype=float)
    half = 0.5 * np.pi * d
    den = M * np.sin(half)
    num = np.sin(M * half)
    # Near delta = 2k, use the ratio's limit through its Taylor expansion.
    near = np.abs(den) < 1e-9 * M
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.abs(np.where(near, 1.0, num / np.where(near, 1.0, den)))
    if near.any():
        # residual offset from the nearest even integer
        r = d - 2.0 * np.round(d / 2.0)
        corr = 1.0 - (M * M - 1) * (np.pi * r) ** 2 / 24.0
        out = np.where(near, np.abs(corr), out)
    out = np.minimum(out, 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class FejerMoments:
    """Moments of the overlap kernel over ``delta ~ Unif[0, 1]``.

    ``m1 = int F^2``, ``f1 = int F^4``, ``f2 = m1**2``.
    """

    M: int
    m1: float
    f1: float
    f2: float


def fejer_moments(M: int, grid_points: int | None = None) -> FejerMoments:
    """Integrate ``F^2`` and ``F^4`` over ``[0, 1]`` on a uniform grid.

    ``F^2`` is a trigonometric polynomial of degree ``M - 1`` in ``pi*delta``,
    and it is even with period 2, so the trapezoid rule on ``[0, 1]`` is the
    periodic trapezoid rule on ``[-1, 1]`` and is exact once the grid resolves
    the main lobe.  ``grid_points`` counts sub-intervals.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if grid_points is None:
        grid_points = 16 * M
    if grid_points < 10 * M:
        raise ValueError(
            f"grid_points={grid_points} does not resolve the main lobe of width 2/M; "
            f"need at least {10 * M}"
        )
    delta = np.linspace(0.0, 1.0, grid_points + 1)
    F2 = fejer_kernel(delta, M) ** 2
    w = np.full(grid_points + 1, 1.0 / grid_points)
    w[0] = w[-1] = 0.5 / grid_points
    m1 = float(w @ F2)
    f1 = float(w @ (F2 * F2))
    return FejerMoments(M=M, m1=m1, f1=f1, f2=m1 * m1)


@lru_cache(maxsize=None)
def lloyd_max_codebook(bits: int, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """MMSE scalar quantizer for a standard Gaussian.

    Returns ``(thresholds, levels)``: ``2**bits - 1`` interior decision
    thresholds and ``2**bits`` reconstruction levels, both ascending.
    Iterates nearest-neighbour / centroid updates until the largest level
    moves by less than ``tol``.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    n = 2**bits
    # uniform start spanning roughly +-3 sigma
    step = 6.0 / n
    levels = (np.arange(n) - (n - 1) / 2.0) * step
    sqrt2pi = math.sqrt(2.0 * math.pi)
    for _ in range(200_000):
        t = 0.5 * (levels[1:] + levels[:-1])
        edges = np.concatenate(([-np.inf], t, [np.inf]))
        pdf = np.exp(-0.5 * np.where(np.isfinite(edges), edges, 0.0) ** 2) / sqrt2pi
        pdf[~np.isfinite(edges)] = 0.0
        cdf = ndtr(edges)
        mass = np.diff(cdf)
        new = (pdf[:-1] - pdf[1:]) / mass
        moved = np.max(np.abs(new - levels))
        levels = new
        if moved < tol:
            break
    t = 0.5 * (levels[1:] + levels[:-1])
    levels.setflags(write=False)
    t.setflags(write=False)
    return t, levels


def lloyd_max_distortion(bits: int) -> float:
    """Normalized MSE of the Lloyd-Max quantizer for a unit-variance Gaussian."""
    t, levels = lloyd_max_codebook(bits)
    edges = np.concatenate(([-np.inf], t, [np.inf]))
    mass = np.diff(ndtr(edges))
    # centroid condition: E[X Q(X)] = E[Q(X)^2], so D = 1 - E[Q^2]
    return float(1.0 - np.sum(mass * levels**2))


def lloyd_max_beta(bits) -> float:
    """Distortion factor ``beta`` for a ``bits``-per-dimension ADC.

    Lloyd iteration for ``bits <= 5``, ``(pi sqrt(3) / 2) 2^{-2b}`` above,
    and 0 for :data:`INFINITE_BITS` (or ``None``).
    """
    if bits is None or (isinstance(bits, float) and math.isinf(bits) and bits > 0):
        return 0.0
    if bits != int(bits):
        raise ValueError(f"bits must be an integer, got {bits!r}")
    b = int(bits)
    if b <= 0:
        raise ValueError(f"bits must be >= 1, got {bits!r}")
    if b <= 5:
        return _lloyd_beta_cached(b)
    return math.pi * math.sqrt(3.0) / 2.0 * 2.0 ** (-2 * b)


@lru_cache(maxsize=None)
def _lloyd_beta_cached(b: int) -> float:
    return lloyd_max_distortion(b)
