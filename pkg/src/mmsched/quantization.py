"""Additive quantization noise model (AQNM) and a true element-wise quantizer.

Rates are always computed on the linear model ``y_q = alpha y + q``; the
nonlinear quantizer here only exists to check that model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import lloyd_max_beta, lloyd_max_codebook


@dataclass(frozen=True)
class QuantizerModel:
    bits: float
    beta: float
    alpha: float

    @property
    def infinite(self) -> bool:
        return math.isinf(self.bits)


def aqnm_params(bits) -> QuantizerModel:
    if bits is None:
        bits = math.inf
    if not math.isinf(bits) and bits <= 0:
        raise ValueError(f"bits must be >= 1, got {bits}")
    beta = lloyd_max_beta(bits)
    return QuantizerModel(bits=bits, beta=beta, alpha=1.0 - beta)


def branch_variance(H_b: np.ndarray, rho: float) -> np.ndarray:
    """Per-RF-chain received power ``rho ||[H_b]_{i,:}||^2 + 1``."""
    H_b = np.asarray(H_b)
    if H_b.ndim == 1:
        H_b = H_b[:, None]
    return rho * np.sum(np.abs(H_b) ** 2, axis=1) + 1.0


def quant_noise_cov(H_b_sched: np.ndarray, rho: float, alpha: float) -> np.ndarray:
    """Diagonal of ``R_qq = alpha (1 - alpha) diag(rho H_b H_b^H + I)``."""
    return alpha * (1.0 - alpha) * branch_variance(H_b_sched, rho)


def _quantize_real(x: np.ndarray, bits: int) -> np.ndarray:
    t, levels = lloyd_max_codebook(int(bits))
    return levels[np.searchsorted(t, x)]


def simulate_quantize(y, bits, variance=None, *, H_b=None, rho=None) -> np.ndarray:
    """Quantize real and imaginary parts of ``y`` with a Lloyd-Max ADC pair.

    Each branch is gain-controlled to its own standard deviation: ``variance``
    gives ``E|y_i|^2`` directly, otherwise it comes from the model
    ``rho ||row_i(H_b)||^2 + 1`` (unit variance when ``H_b`` is absent).
    ``y`` may carry extra trailing sample axes; ``variance`` broadcasts
    against its first axis.
    """
    y = np.asarray(y, dtype=complex)
    if not np.all(np.isfinite(y)):
        raise ValueError("cannot quantize non-finite samples")
    if bits is None or math.isinf(bits):
        raise ValueError("simulate_quantize needs a finite bit count")
    if variance is None:
        variance = branch_variance(H_b, rho) if H_b is not None else np.ones(y.shape[0])
    var = np.asarray(variance, dtype=float)
    if var.ndim == 1 and y.ndim > 1:
        var = var.reshape((-1,) + (1,) * (y.ndim - 1))
    sd = np.sqrt(var / 2.0)  # per real dimension
    re = _quantize_real(y.real / sd, bits) * sd
    im = _quantize_real(y.imag / sd, bits) * sd
    return re + 1j * im
