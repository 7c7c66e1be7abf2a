"""Geometric mmWave uplink channels, the DFT analog combiner and beamspace projection.

Spatial angles are used throughout (half-wavelength ULA, so ``theta = sin(phi)``
lives in ``[-1, 1]``).  The DFT grid is anchored at ``-1`` with spacing ``2/M``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ConfigError, SystemConfig


@dataclass
class UserChannel:
    L: int
    aoa_spatial: np.ndarray  # (L,)
    gains: np.ndarray  # (L,) complex
    h: np.ndarray  # (M,) complex antenna-domain channel
    grid_indices: np.ndarray | None = None  # aligned scenario only


@dataclass
class CombinerBank:
    grid: np.ndarray  # (M,) spatial angles of the DFT beams
    A: np.ndarray  # (M, M) unitary
    selected: np.ndarray = field(default=None)  # (N,) column indices

    def __post_init__(self):
        if self.selected is None:
            self.selected = np.arange(self.A.shape[1])
        self.selected = np.asarray(self.selected, dtype=int)

    @property
    def M(self) -> int:
        return self.A.shape[0]

    @property
    def N(self) -> int:
        return len(self.selected)

    @property
    def A_tilde(self) -> np.ndarray:
        return self.A[:, self.selected]

    @property
    def selected_grid(self) -> np.ndarray:
        return self.grid[self.selected]


@dataclass
class BeamspaceChannel:
    H_b: np.ndarray  # (N, #users)
    user_ids: np.ndarray

    def column(self, user_id: int) -> np.ndarray:
        (pos,) = np.flatnonzero(self.user_ids == user_id)
        return self.H_b[:, pos]

    def subset(self, user_ids) -> np.ndarray:
        """Columns for ``user_ids`` (indices into the full pool) in the given order."""
        return self.H_b[:, np.asarray(user_ids, dtype=int)]


def steering_vector(theta_spatial, M: int) -> np.ndarray:
    """ULA response ``(1/sqrt(M)) exp(-j pi m theta)``, ``m = 0..M-1``.

    A scalar angle gives an ``(M,)`` vector; an array of angles gives an
    ``(M, len(theta))`` matrix with one steering vector per column.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    theta = np.asarray(theta_spatial, dtype=float)
    m = np.arange(M)
    if theta.ndim == 0:
        return np.exp(-1j * np.pi * m * theta) / np.sqrt(M)
    return np.exp(-1j * np.pi * np.outer(m, theta)) / np.sqrt(M)


def dft_grid(M: int) -> np.ndarray:
    return -1.0 + 2.0 * np.arange(M) / M


def build_dft_combiner(M: int) -> CombinerBank:
    grid = dft_grid(M)
    return CombinerBank(grid=grid, A=steering_vector(grid, M))


def draw_path_count(lambda_L: float, rng: np.random.Generator, size=None):
    """``max(Poisson(lambda_L), 1)``."""
    if not lambda_L > 0:
        raise ValueError("lambda_L must be positive")
    return np.maximum(rng.poisson(lambda_L, size=size), 1)


def _complex_normal(rng, size):
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def _path_counts(config: SystemConfig, rng, K: int) -> np.ndarray:
    if config.fixed_paths is not None:
        return np.full(K, config.fixed_paths, dtype=int)
    return np.asarray(draw_path_count(config.lambda_L, rng, size=K), dtype=int)


def _aligned_indices(L: np.ndarray, M: int, rng) -> list[np.ndarray]:
    if L.max() > M:
        raise ConfigError(f"aligned scenario cannot place {L.max()} distinct grid AoAs with M={M}")
    if L.max() == 1:
        return list(rng.integers(0, M, size=(len(L), 1)))
    # distinct grid beams per user: first L_k entries of a random permutation
    order = np.argsort(rng.random((len(L), M)), axis=1)
    return [order[k, : L[k]] for k in range(len(L))]


def draw_user_channels(config: SystemConfig, rng: np.random.Generator, K: int | None = None,
                       scenario: str | None = None) -> tuple[list[UserChannel], np.ndarray]:
    """Draw ``K`` independent users; returns the users and the ``(M, K)`` channel matrix.

    ``h_k = sqrt(M / L_k) * sum_l g_l a(phi_l)``, ``g_l ~ CN(0, 1)``.  Pathloss
    is absorbed by power control, so no large-scale factor appears.
    """
    K = config.K if K is None else K
    scenario = scenario or config.scenario
    M = config.M
    L = _path_counts(config, rng, K)
    grid_idx = None
    if scenario == "aligned":
        grid_idx = _aligned_indices(L, M, rng)
        flat_idx = np.concatenate(grid_idx)
        aoa = dft_grid(M)[flat_idx]
    elif scenario == "arbitrary":
        aoa = rng.uniform(-1.0, 1.0, size=int(L.sum()))
    else:
        raise ConfigError(f"unknown scenario {scenario!r}")
    gains = _complex_normal(rng, int(L.sum()))
    owner = np.repeat(np.arange(K), L)
    scale = np.sqrt(M / L)[owner]
    contrib = steering_vector(aoa, M) * (scale * gains)
    H = np.zeros((M, K), dtype=complex)
    np.add.at(H.T, owner, contrib.T)
    starts = np.concatenate(([0], np.cumsum(L)[:-1]))
    users = []
    for k in range(K):
        s = slice(starts[k], starts[k] + L[k])
        users.append(UserChannel(
            L=int(L[k]), aoa_spatial=aoa[s], gains=gains[s], h=H[:, k],
            grid_indices=None if grid_idx is None else np.asarray(grid_idx[k]),
        ))
    return users, H


def draw_user_channel(config: SystemConfig, scenario: str, rng: np.random.Generator) -> UserChannel:
    users, _ = draw_user_channels(config, rng, K=1, scenario=scenario)
    return users[0]


def select_combiner(bank: CombinerBank, H: np.ndarray, N: int, policy: str = "auto",
                    fixed_indices=None) -> CombinerBank:
    """Pick the ``N`` DFT columns forming the analog combiner.

    ``strongest-beams`` keeps the beams with the largest aggregate received
    power ``sum_k |a(theta_m)^H h_k|^2`` over the candidate pool.  Selected
    indices are returned in ascending order.
    """
    M = bank.M
    if N > M:
        raise ConfigError(f"N={N} exceeds M={M}")
    if policy == "auto":
        policy = "full-dft" if N == M else "strongest-beams"
    if N == M and policy != "fixed-indices":
        return CombinerBank(bank.grid, bank.A, np.arange(M))
    if policy == "full-dft":
        raise ConfigError("full-dft policy requires N == M")
    if policy == "strongest-beams":
        power = np.sum(np.abs(bank.A.conj().T @ H) ** 2, axis=1)
        top = np.argsort(-power, kind="stable")[:N]
        return CombinerBank(bank.grid, bank.A, np.sort(top))
    if policy == "fixed-indices":
        idx = np.asarray(fixed_indices, dtype=int)
        if idx.shape != (N,):
            raise ConfigError(f"need exactly N={N} fixed indices")
        if len(np.unique(idx)) != N:
            raise ConfigError(f"duplicate fixed indices {idx.tolist()}")
        return CombinerBank(bank.grid, bank.A, idx)
    raise ConfigError(f"unknown combiner policy {policy!r}")


def beamspace_project(A_tilde: np.ndarray, H: np.ndarray, user_ids=None) -> BeamspaceChannel:
    """``H_b = A_tilde^H H``."""
    H = np.asarray(H)
    if H.ndim == 1:
        H = H[:, None]
    if A_tilde.shape[0] != H.shape[0]:
        raise ValueError(f"dimension mismatch: A_tilde {A_tilde.shape}, H {H.shape}")
    ids = np.arange(H.shape[1]) if user_ids is None else np.asarray(user_ids)
    return BeamspaceChannel(H_b=A_tilde.conj().T @ H, user_ids=ids)
