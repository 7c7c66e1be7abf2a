import math

import numpy as np
import pytest

from mmsched.numerics import INFINITE_BITS, lloyd_max_beta
from mmsched.quantization import aqnm_params, branch_variance, quant_noise_cov, simulate_quantize


def test_aqnm_params():
    q = aqnm_params(INFINITE_BITS)
    assert (q.alpha, q.beta) == (1.0, 0.0)
    q3 = aqnm_params(3)
    assert q3.beta == pytest.approx(0.03454, abs=1e-5)
    assert q3.alpha == pytest.approx(0.96546, abs=1e-5)
    assert q3.alpha + q3.beta == 1.0
    assert aqnm_params(7).beta == pytest.approx(math.pi * math.sqrt(3) / 2 * 2.0**-14)
    with pytest.raises(ValueError):
        aqnm_params(0)


def test_quant_noise_cov():
    H = np.zeros((4, 2), dtype=complex)
    assert np.allclose(quant_noise_cov(H, 3.0, 0.9), 0.9 * 0.1)
    rng = np.random.default_rng(0)
    H = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
    assert np.all(quant_noise_cov(H, 2.0, 1.0) == 0.0)
    r = quant_noise_cov(H, 2.0, 0.8)
    assert np.all(r > 0)
    expected = 0.8 * 0.2 * np.real(np.diag(2.0 * H @ H.conj().T + np.eye(6)))
    assert np.allclose(r, expected)
    # single aligned user on beam m
    M, m, g = 8, 3, 0.7 - 0.2j
    Hb = np.zeros((M, 1), dtype=complex)
    Hb[m, 0] = math.sqrt(M) * g
    a = 0.9
    r = quant_noise_cov(Hb, 1.0, a)
    assert r[m] == pytest.approx(a * (1 - a) * (M * abs(g) ** 2 + 1))
    assert np.allclose(np.delete(r, m), a * (1 - a))


def test_one_bit_output_levels():
    rng = np.random.default_rng(1)
    y = rng.standard_normal(50) + 1j * rng.standard_normal(50)
    var = np.full(50, 2.0)
    yq = simulate_quantize(y, 1, var)
    level = math.sqrt(var[0] / 2) * math.sqrt(2 / math.pi)
    assert np.allclose(np.abs(yq.real), level)
    assert np.allclose(np.abs(yq.imag), level)
    assert np.all(np.sign(yq.real) == np.sign(y.real))
    assert np.all(np.sign(yq.imag) == np.sign(y.imag))


@pytest.mark.parametrize("b", [1, 2, 3])
def test_distortion_matches_beta(b):
    rng = np.random.default_rng(b)
    y = (rng.standard_normal(100_000) + 1j * rng.standard_normal(100_000)) / math.sqrt(2)
    yq = simulate_quantize(y, b)
    d = np.mean(np.abs(y - yq) ** 2) / np.mean(np.abs(y) ** 2)
    assert d == pytest.approx(lloyd_max_beta(b), rel=0.05)


def test_idempotent_and_errors():
    rng = np.random.default_rng(2)
    y = rng.standard_normal(200) + 1j * rng.standard_normal(200)
    for b in (1, 2, 4):
        once = simulate_quantize(y, b, np.full(200, 3.0))
        twice = simulate_quantize(once, b, np.full(200, 3.0))
        assert np.array_equal(once, twice)
    with pytest.raises(ValueError):
        simulate_quantize(np.array([np.nan + 0j]), 2)
    with pytest.raises(ValueError):
        simulate_quantize(y, INFINITE_BITS)


def test_model_variance_from_channel():
    H = np.array([[1.0, 1.0j], [0.0, 2.0]])
    assert branch_variance(H, 2.0) == pytest.approx([2 * 2 + 1, 2 * 4 + 1])
    y = np.array([0.3 + 0.1j, -1.0 + 2.0j])
    assert np.array_equal(simulate_quantize(y, 2, H_b=H, rho=2.0),
                          simulate_quantize(y, 2, branch_variance(H, 2.0)))


def test_aqnm_consistency_per_branch():
    """Per-branch E|q/alpha|^2, q = y_q - alpha y, against R_qq / alpha^2 on Gaussian inputs."""
    rng = np.random.default_rng(3)
    N, S, T = 8, 3, 40_000
    H = (rng.standard_normal((N, S)) + 1j * rng.standard_normal((N, S))) / math.sqrt(2)
    for b in (1, 2, 3):
        a = aqnm_params(b).alpha
        for snr_db in (-5.0, 0.0, 10.0):
            rho = 10 ** (snr_db / 10)
            s = (rng.standard_normal((S, T)) + 1j * rng.standard_normal((S, T))) / math.sqrt(2)
            v = (rng.standard_normal((N, T)) + 1j * rng.standard_normal((N, T))) / math.sqrt(2)
            y = math.sqrt(rho) * H @ s + v
            yq = simulate_quantize(y, b, H_b=H, rho=rho)
            measured = np.mean(np.abs((yq - a * y) / a) ** 2, axis=1)
            model = quant_noise_cov(H, rho, a) / a**2
            assert np.all(model >= 0)
            assert measured == pytest.approx(model, rel=0.10)
