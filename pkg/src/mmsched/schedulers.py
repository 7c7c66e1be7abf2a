"""User scheduling algorithms.

Full-CSI schedulers take the beamspace matrix of the whole candidate pool
(``N x K``, column ``k`` is user ``k``).  The chordal scheduler only sees the
AoAs.  Ties are always broken towards the lowest user id.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .channel import steering_vector
from .config import SystemConfig
from .quantization import aqnm_params
from .rates import approx_sinr_candidates, batch_sum_rates

ZERO_TOL = 1e-12
RANK_TOL = 1e-8


@dataclass
class ScheduleResult:
    scheduled: list[int]
    algorithm: str
    iterations: list[dict[str, Any]] = field(default_factory=list)
    params: dict[str, Any] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)
    flags: dict[str, Any] = field(default_factory=dict)


@dataclass
class BeamSupport:
    user_id: int
    indices: np.ndarray  # ordered by |h_b,i| descending

    def overlap(self, other: "BeamSupport") -> int:
        return len(np.intersect1d(self.indices, other.indices))


@dataclass
class AoaSubspace:
    user_id: int
    V: np.ndarray  # indices of AoAs inside the combiner's angular range
    Q: np.ndarray  # (M, rank) orthonormal basis

    @property
    def rank(self) -> int:
        return self.Q.shape[1]


def _resolve_alpha(config: SystemConfig, alpha: float | None) -> float:
    return aqnm_params(config.bits).alpha if alpha is None else alpha


def _nonzero_users(H_b: np.ndarray, result: ScheduleResult) -> list[int]:
    norms = np.linalg.norm(H_b, axis=0)
    scale = max(float(norms.max(initial=0.0)), 1.0)
    keep = []
    for k, n in enumerate(norms):
        if n <= ZERO_TOL * scale:
            result.diagnostics.append(f"user {k}: zero beamspace channel, excluded")
        else:
            keep.append(k)
    return keep


def gram_schmidt_component(h: np.ndarray, basis: Sequence[np.ndarray]) -> np.ndarray:
    """Component of ``h`` orthogonal to the (mutually orthogonal) ``basis`` vectors."""
    f = np.array(h, dtype=complex, copy=True)
    for b in basis:
        nb = np.vdot(b, b).real
        if nb > 0:
            f -= (np.vdot(b, f) / nb) * b
    return f


def dominant_beams(h_b: np.ndarray, N_b: int, user_id: int = 0) -> BeamSupport:
    """Indices of the ``N_b`` largest-magnitude beamspace entries."""
    mag = np.abs(np.asarray(h_b))
    n = min(max(int(N_b), 1), len(mag))
    return BeamSupport(user_id, np.argsort(-mag, kind="stable")[:n])


def _beam_supports(H_b, config: SystemConfig, path_counts) -> list[BeamSupport]:
    K = H_b.shape[1]
    if config.css_n_b is not None:
        nb = np.full(K, config.css_n_b)
    elif path_counts is not None:
        nb = np.asarray(path_counts)
    else:
        raise ValueError("css_n_b is per-user L_k but no path counts were supplied")
    return [dominant_beams(H_b[:, k], nb[k], k) for k in range(K)]


def _correlation(f: np.ndarray, H: np.ndarray) -> np.ndarray:
    nf = np.linalg.norm(f)
    nh = np.linalg.norm(H, axis=0)
    return np.abs(f.conj() @ H) / (nf * nh)


def schedule_css(H_b_all: np.ndarray, config: SystemConfig, path_counts=None, *,
                 rho: float | None = None, alpha: float | None = None) -> ScheduleResult:
    """Channel-structure-based scheduling.

    Each step picks the candidate with the largest inversion-free SINR, then
    keeps only candidates that are semi-orthogonal to the new user's
    orthogonal component and share at most ``css_n_ol`` dominant beams with it.
    """
    rho = config.rho if rho is None else rho
    alpha = _resolve_alpha(config, alpha)
    H = np.asarray(H_b_all)
    res = ScheduleResult([], "css", params=dict(
        eps=config.css_eps, n_ol=config.css_n_ol, n_b=config.css_n_b, rho=rho, alpha=alpha))
    if alpha >= 1.0:
        res.flags["alpha_one_fallback"] = "unquantized SINR rho*||h||^2"
    supports = _beam_supports(H, config, path_counts)
    cand = _nonzero_users(H, res)
    fs: list[np.ndarray] = []
    while len(res.scheduled) < config.S and cand:
        metric = approx_sinr_candidates(H, res.scheduled, cand, rho, alpha)
        j = int(np.argmax(metric))
        sel = cand[j]
        res.iterations.append(dict(step=len(res.scheduled) + 1, candidates=len(cand),
                                   selected=sel, metric=float(metric[j])))
        res.scheduled.append(sel)
        f = gram_schmidt_component(H[:, sel], fs)
        fs.append(f)
        rest = np.array([k for k in cand if k != sel], dtype=int)
        if rest.size == 0:
            cand = []
            break
        keep = np.ones(rest.size, dtype=bool)
        if np.linalg.norm(f) > ZERO_TOL * np.linalg.norm(H[:, sel]):
            keep &= _correlation(f, H[:, rest]) < config.css_eps
        else:
            res.diagnostics.append(f"step {len(res.scheduled)}: orthogonal component vanished")
        bsel = supports[sel]
        keep &= np.array([bsel.overlap(supports[k]) <= config.css_n_ol for k in rest])
        cand = rest[keep].tolist()
    return res


def schedule_greedy(H_b_all: np.ndarray, config: SystemConfig, *, rho: float | None = None,
                    alpha: float | None = None) -> ScheduleResult:
    """Greedy maximization of the exact ZF sum rate, one user per step."""
    rho = config.rho if rho is None else rho
    alpha = _resolve_alpha(config, alpha)
    H = np.asarray(H_b_all)
    res = ScheduleResult([], "greedy", params=dict(rho=rho, alpha=alpha))
    cand = _nonzero_users(H, res)
    while len(res.scheduled) < config.S and cand:
        stack = np.stack([H[:, res.scheduled + [k]] for k in cand])
        rates, ok = batch_sum_rates(stack, rho, alpha)
        for k in np.asarray(cand)[~ok]:
            res.diagnostics.append(f"step {len(res.scheduled) + 1}: user {k} makes H_b singular, skipped")
        if not ok.any():
            break
        j = int(np.argmax(rates))
        sel = cand[j]
        res.iterations.append(dict(step=len(res.scheduled) + 1, candidates=len(cand),
                                   selected=sel, metric=float(rates[j])))
        res.scheduled.append(sel)
        cand = [k for k, good in zip(cand, ok) if good and k != sel]
    return res


def schedule_sus(H_b_all: np.ndarray, config: SystemConfig) -> ScheduleResult:
    """Semi-orthogonal user selection: largest orthogonal-component norm, then epsilon filter."""
    H = np.asarray(H_b_all)
    res = ScheduleResult([], "sus", params=dict(eps=config.sus_eps))
    cand = np.array(_nonzero_users(H, res), dtype=int)
    gs: list[np.ndarray] = []
    while len(res.scheduled) < config.S and cand.size:
        F = H[:, cand].astype(complex)
        for g in gs:
            F -= np.outer(g, g.conj() @ F) / np.vdot(g, g).real
        fn = np.linalg.norm(F, axis=0)
        j = int(np.argmax(fn))
        sel = int(cand[j])
        res.iterations.append(dict(step=len(res.scheduled) + 1, candidates=int(cand.size),
                                   selected=sel, metric=float(fn[j])))
        res.scheduled.append(sel)
        g = F[:, j]
        gs.append(g)
        rest = cand[cand != sel]
        if rest.size and fn[j] > 0:
            rest = rest[_correlation(g, H[:, rest]) < config.sus_eps]
        cand = rest
    return res


def schedule_mbas(H_b_all: np.ndarray, config: SystemConfig, path_counts=None) -> ScheduleResult:
    """Beam-aggregation baseline: strongest beamspace norm with dominant-beam non-overlap.

    Reconstructed from a one-line description; reports carry the
    ``baseline_approximate`` flag.
    """
    H = np.asarray(H_b_all)
    res = ScheduleResult([], "mbas", params=dict(n_ol=config.mbas_n_ol, n_b=config.css_n_b),
                         flags={"baseline_approximate": True})
    supports = _beam_supports(H, config, path_counts)
    power = np.sum(np.abs(H) ** 2, axis=0)
    cand = _nonzero_users(H, res)
    while len(res.scheduled) < config.S and cand:
        j = int(np.argmax(power[cand]))
        sel = cand[j]
        res.iterations.append(dict(step=len(res.scheduled) + 1, candidates=len(cand),
                                   selected=sel, metric=float(power[sel])))
        res.scheduled.append(sel)
        bsel = supports[sel]
        cand = [k for k in cand if k != sel and bsel.overlap(supports[k]) <= config.mbas_n_ol]
    return res


def schedule_random(K: int, S: int, rng: np.random.Generator) -> ScheduleResult:
    picked = rng.choice(K, size=min(S, K), replace=False)
    return ScheduleResult([int(k) for k in picked], "random", params=dict(K=K, S=S))


# --- AoA-only scheduling ---------------------------------------------------

def in_combiner_range(aoa: np.ndarray, grid: np.ndarray, M: int) -> np.ndarray:
    """Mask of AoAs within ``1/M`` (circularly, period 2) of some combiner angle."""
    aoa = np.asarray(aoa, dtype=float)
    if aoa.size == 0:
        return np.zeros(0, dtype=bool)
    d = np.abs(aoa[:, None] - np.asarray(grid)[None, :])
    d = np.minimum(d, 2.0 - d)
    return np.any(d < 1.0 / M, axis=1)


def aoa_subspace(user_id: int, aoa: np.ndarray, grid: np.ndarray, M: int,
                 rank_tol: float = RANK_TOL) -> AoaSubspace:
    """Orthonormal basis for the steering vectors of the in-range AoAs."""
    aoa = np.asarray(aoa, dtype=float)
    V = np.flatnonzero(in_combiner_range(aoa, grid, M))
    if V.size == 0:
        return AoaSubspace(user_id, V, np.zeros((M, 0), dtype=complex))
    A = steering_vector(aoa[V], M)
    if V.size == 1:
        return AoaSubspace(user_id, V, A)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    r = int(np.sum(s > rank_tol * s[0]))
    return AoaSubspace(user_id, V, U[:, :r])


def chordal_distance(Q_a: np.ndarray, Q_b: np.ndarray) -> float:
    """``sqrt(L_min - tr(Q_a^H Q_b Q_b^H Q_a))`` for orthonormal-column bases."""
    L_min = min(Q_a.shape[1], Q_b.shape[1])
    t = float(np.sum(np.abs(Q_a.conj().T @ Q_b) ** 2))
    rad = L_min - t
    if rad < -1e-10:
        raise ArithmeticError(f"negative chordal radicand {rad:.3e}; bases not orthonormal?")
    return float(np.sqrt(max(rad, 0.0)))


def schedule_chordal(aoa_sets: Sequence[np.ndarray], grid: np.ndarray, config: SystemConfig,
                     rng: np.random.Generator, M: int | None = None) -> ScheduleResult:
    """Chordal-distance scheduling from AoA knowledge only.

    ``grid`` holds the spatial angles of the selected combiner beams.  The
    first user is drawn uniformly (from ``rng``) among those with the most
    in-range AoAs; each later step filters by normalized chordal distance to
    the previously scheduled user and takes the farthest among the survivors
    with the most in-range AoAs.
    """
    M = config.M if M is None else M
    d_th = config.chordal_d_th
    res = ScheduleResult([], "chordal", params=dict(d_th=d_th))
    subs = [aoa_subspace(k, a, grid, M) for k, a in enumerate(aoa_sets)]
    K = len(subs)
    nV = np.array([s.V.size for s in subs])
    rank = np.array([s.rank for s in subs])
    alive = nV > 0
    for k in np.flatnonzero(~alive):
        res.diagnostics.append(f"user {k}: no AoA inside the combiner range, removed")
    if not alive.any():
        res.diagnostics.append("every user filtered at initialization")
        return res
    # all bases side by side so one matmul gives every candidate's overlap
    Qall = np.concatenate([s.Q for s in subs], axis=1)
    owner = np.repeat(np.arange(K), rank)

    top = np.flatnonzero(alive & (nV == nV[alive].max()))
    first = int(top[rng.integers(top.size)])
    res.scheduled.append(first)
    res.iterations.append(dict(step=1, candidates=int(alive.sum()), selected=first, metric=None))
    alive[first] = False

    while len(res.scheduled) < config.S and alive.any():
        last = res.scheduled[-1]
        overlap = np.bincount(owner, weights=np.sum(np.abs(subs[last].Q.conj().T @ Qall) ** 2, axis=0),
                              minlength=K)
        L_min = np.minimum(rank[last], rank)
        rad = L_min - overlap
        if np.any(rad[alive] < -1e-10):
            raise ArithmeticError("negative chordal radicand")
        d = np.sqrt(np.maximum(rad, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            normed = np.where(L_min > 0, d / np.sqrt(np.maximum(L_min, 1)), 0.0)
        n_before = int(alive.sum())
        alive &= normed > d_th
        if not alive.any():
            break
        U = np.flatnonzero(alive & (nV == nV[alive].max()))
        sel = int(U[np.argmax(d[U])])
        res.iterations.append(dict(step=len(res.scheduled) + 1, candidates=n_before,
                                   selected=sel, metric=float(d[sel])))
        res.scheduled.append(sel)
        alive[sel] = False
    return res
