"""Zero-forcing combining and achievable rates under the AQNM.

All rate functions take beamspace channels ``H_b`` with one column per
scheduled user.  ``alpha == 1`` (ideal ADC) is handled explicitly rather than
as a limit, since several expressions divide by ``1 - alpha``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quantization import quant_noise_cov

COND_LIMIT = 1e10


class SingularChannelError(np.linalg.LinAlgError):
    """The scheduled channel matrix is (numerically) rank deficient."""

    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


@dataclass
class RateBreakdown:
    per_user: list[tuple[int, float]]
    sum: float
    sinr: list[float] = field(default_factory=list)


def _worst_pair(H: np.ndarray) -> tuple[int, int]:
    norms = np.linalg.norm(H, axis=0)
    if np.any(norms == 0):
        k = int(np.flatnonzero(norms == 0)[0])
        return (k, k)
    G = np.abs(H.conj().T @ H) / np.outer(norms, norms)
    np.fill_diagonal(G, -1.0)
    i, j = np.unravel_index(int(np.argmax(G)), G.shape)
    return (int(min(i, j)), int(max(i, j)))


def zf_combiners_batch(Hs: np.ndarray, cond_limit: float = COND_LIMIT):
    """Batched ``W = H (H^H H)^{-1}`` computed as ``Q R^{-H}``.

    ``Hs`` has shape ``(B, N, S)``.  Returns ``(W, ok)`` where ``ok[b]`` is
    False for rank-deficient or ill-conditioned members (their ``W`` is
    zero-filled).
    """
    Hs = np.asarray(Hs, dtype=complex)
    B, N, S = Hs.shape
    if S > N:
        raise ValueError(f"cannot zero-force {S} users with {N} RF chains")
    Q, R = np.linalg.qr(Hs)
    sv = np.linalg.svd(R, compute_uv=False)
    smax = sv[:, 0]
    smin = sv[:, -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        ok = (smin > 0) & (smax / np.where(smin > 0, smin, 1.0) <= cond_limit) & np.isfinite(smax)
    W = np.zeros_like(Hs)
    if ok.any():
        Rinv = np.linalg.inv(R[ok])
        W[ok] = Q[ok] @ np.conj(np.swapaxes(Rinv, -1, -2))
    return W, ok


def zf_combiner(H_b_sched: np.ndarray) -> np.ndarray:
    H = np.asarray(H_b_sched, dtype=complex)
    if H.ndim == 1:
        H = H[:, None]
    W, ok = zf_combiners_batch(H[None])
    if not ok[0]:
        pair = _worst_pair(H)
        raise SingularChannelError(
            f"channel matrix is singular or has condition number > {COND_LIMIT:g}; "
            f"most collinear columns: {pair}", pair)
    return W[0]


def _rates_from_w(W: np.ndarray, H: np.ndarray, rho: float, alpha: float) -> np.ndarray:
    # W, H: (..., N, S)
    wnorm2 = np.sum(np.abs(W) ** 2, axis=-2)
    if alpha >= 1.0:
        sinr = rho / wnorm2
    else:
        rq = alpha * (1.0 - alpha) * (rho * np.sum(np.abs(H) ** 2, axis=-1) + 1.0)  # (..., N)
        quant = np.sum(rq[..., :, None] * np.abs(W) ** 2, axis=-2)
        sinr = alpha**2 * rho / (quant + alpha**2 * wnorm2)
    return sinr


def user_sinrs(H_b_sched: np.ndarray, rho: float, alpha: float) -> np.ndarray:
    H = np.asarray(H_b_sched, dtype=complex)
    if H.ndim == 1:
        H = H[:, None]
    W = zf_combiner(H)
    return _rates_from_w(W, H, rho, alpha)


def user_rates(H_b_sched: np.ndarray, rho: float, alpha: float) -> np.ndarray:
    """Per-user ZF rates ``log2(1 + alpha^2 rho / (w^H R_qq w + alpha^2 ||w||^2))``."""
    return np.log2(1.0 + user_sinrs(H_b_sched, rho, alpha))


def user_rate(H_b_sched: np.ndarray, k: int, rho: float, alpha: float) -> float:
    return float(user_rates(H_b_sched, rho, alpha)[k])


def batch_sum_rates(Hs: np.ndarray, rho: float, alpha: float):
    """Sum rates for a stack ``(B, N, S)`` of candidate channel matrices.

    Returns ``(sum_rates, ok)``; singular members get ``-inf``.
    """
    W, ok = zf_combiners_batch(Hs)
    out = np.full(Hs.shape[0], -np.inf)
    if ok.any():
        sinr = _rates_from_w(W[ok], Hs[ok], rho, alpha)
        out[ok] = np.sum(np.log2(1.0 + sinr), axis=-1)
    return out, ok


def sum_rate(H_b_sched: np.ndarray, rho: float, alpha: float, user_ids=None) -> RateBreakdown:
    H = np.asarray(H_b_sched, dtype=complex)
    if H.ndim == 1:
        H = H[:, None]
    ids = list(range(H.shape[1])) if user_ids is None else [int(u) for u in user_ids]
    total, ok = batch_sum_rates(H[None], rho, alpha)
    if not ok[0]:
        zf_combiner(H)  # raises with the offending pair
    sinr = user_sinrs(H, rho, alpha)
    rates = np.log2(1.0 + sinr)
    return RateBreakdown(
        per_user=list(zip(ids, rates.tolist())),
        sum=float(total[0]),
        sinr=sinr.tolist(),
    )


def single_user_rate(h_b: np.ndarray, rho: float, alpha: float) -> float:
    """Single-user rate written out through the beamspace entries of ``h_b``."""
    p = np.abs(np.asarray(h_b)) ** 2
    g = float(np.sum(p))
    if g == 0.0:
        raise ValueError("single_user_rate needs a non-zero channel")
    sinr = alpha * rho * g * g / (rho * (1.0 - alpha) * float(np.sum(p * p)) + g)
    return math.log2(1.0 + sinr)


def single_user_max_rate(gamma: float, L: int, rho: float, alpha: float) -> float:
    """Rate of an ``L``-path user with channel power ``gamma`` spread evenly."""
    if gamma <= 0 or L < 1:
        raise ValueError("need gamma > 0 and L >= 1")
    return math.log2(1.0 + alpha * rho / (rho * (1.0 - alpha) / L + 1.0 / gamma))


def single_user_rate_limit(L: int, alpha: float) -> float:
    """High-gain saturation ``log2(1 + alpha L / (1 - alpha))``; ``inf`` for an ideal ADC."""
    if alpha >= 1.0:
        return math.inf
    if not alpha > 0:
        raise ValueError("alpha must lie in (0, 1]")
    return math.log2(1.0 + alpha * L / (1.0 - alpha))


def approx_sinr(H_b_union: np.ndarray, k: int, rho: float, alpha: float) -> float:
    """Inversion-free SINR of column ``k`` given every column of ``H_b_union``.

    ``alpha rho ||h||^4 / ((1 - alpha) h^H D h)`` with
    ``D = diag(rho H H^H + I / (1 - alpha))``; an ideal ADC falls back to
    ``rho ||h||^2``.
    """
    H = np.asarray(H_b_union)
    h = H[:, k]
    p = np.abs(h) ** 2
    g = float(np.sum(p))
    if g == 0.0:
        raise ValueError("approx_sinr needs a non-zero channel")
    if alpha >= 1.0:
        return rho * g
    row = np.sum(np.abs(H) ** 2, axis=1)
    return float(alpha * rho * g * g / ((1.0 - alpha) * np.sum(p * (rho * row + 1.0 / (1.0 - alpha)))))


def approx_sinr_candidates(H_b: np.ndarray, scheduled, candidates, rho: float, alpha: float) -> np.ndarray:
    """:func:`approx_sinr` for each candidate ``k`` on ``scheduled + [k]``, vectorized."""
    Hc = H_b[:, candidates]
    pc = np.abs(Hc) ** 2
    g = np.sum(pc, axis=0)
    if alpha >= 1.0:
        return rho * g
    row_s = np.sum(np.abs(H_b[:, list(scheduled)]) ** 2, axis=1) if len(scheduled) else np.zeros(H_b.shape[0])
    D = rho * (row_s[:, None] + pc) + 1.0 / (1.0 - alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        return alpha * rho * g * g / ((1.0 - alpha) * np.sum(pc * D, axis=0))
