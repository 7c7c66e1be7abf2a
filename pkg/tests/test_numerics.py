import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from mmsched.numerics import (INFINITE_BITS, exp_integral_gamma0, exp_scaled_gamma0, fejer_kernel,
                              fejer_moments, lloyd_max_beta, lloyd_max_codebook)

# Frozen from scipy.integrate.quad(exp(-t)/t, z, inf, epsrel=1e-13), cross-checked with mpmath.e1.
GAMMA0_ORACLE = {
    0.1: 1.8229239584193906,
    1.0: 0.21938393439552027,
    10.0: 4.156968929685324e-06,
}


@pytest.mark.parametrize("z, expected", sorted(GAMMA0_ORACLE.items()))
def test_gamma0_frozen_oracle(z, expected):
    assert exp_integral_gamma0(z) == pytest.approx(expected, rel=1e-10)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("z", [1e-8, 1e-3, 0.3, 0.99, 1.0, 1.01, 3.0, 37.0, 150.0, 700.0])
def test_gamma0_against_quadrature(z):
    ref, _ = quad(lambda t: math.exp(-(t - z)) / t, z, np.inf, epsabs=0, epsrel=1e-13, limit=400)
    assert exp_integral_gamma0(z) == pytest.approx(ref * math.exp(-z), rel=1e-10)
    assert exp_scaled_gamma0(z) == pytest.approx(ref, rel=1e-10)


def test_gamma0_monotone_and_domain():
    assert exp_integral_gamma0(2.0) < exp_integral_gamma0(1.0)
    zs = np.geomspace(1e-6, 600, 400)
    vals = [exp_integral_gamma0(z) for z in zs]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            exp_integral_gamma0(bad)
    assert exp_integral_gamma0(800.0) == 0.0
    # scaled form stays finite and tends to 1/z
    assert exp_scaled_gamma0(1e6) == pytest.approx(1e-6, rel=1e-5)


def _explicit_overlap(delta, M):
    m = np.arange(M)
    a0 = np.ones(M) / np.sqrt(M)
    a1 = np.exp(-1j * np.pi * m * delta) / np.sqrt(M)
    return abs(np.vdot(a0, a1))


def test_fejer_kernel_basic_values():
    for M in (1, 2, 7, 64):
        assert fejer_kernel(0.0, M) == 1.0
        assert fejer_kernel(2.0, M) == pytest.approx(1.0)
    for M in (2, 8, 33):
        assert fejer_kernel(2.0 / M, M) < 1e-12
    assert fejer_kernel(0.1, 8) == pytest.approx(_explicit_overlap(0.1, 8), abs=1e-12)


def test_fejer_kernel_matches_steering_inner_products():
    rng = np.random.default_rng(11)
    for _ in range(100):
        M = int(rng.integers(1, 200))
        d = rng.uniform(-3, 3)
        assert fejer_kernel(d, M) == pytest.approx(_explicit_overlap(d, M), abs=1e-12)
        assert fejer_kernel(d, M) == fejer_kernel(-d, M)


def test_fejer_kernel_near_singularity_is_continuous():
    for M in (4, 128):
        for eps in (1e-14, 1e-11, 1e-9, 1e-7):
            assert fejer_kernel(eps, M) == pytest.approx(_explicit_overlap(eps, M), abs=1e-12)
            assert fejer_kernel(2.0 - eps, M) == pytest.approx(_explicit_overlap(2.0 - eps, M), abs=1e-11)


@given(st.floats(-5, 5, allow_nan=False), st.integers(1, 300))
def test_fejer_kernel_even_periodic_bounded(d, M):
    f = fejer_kernel(d, M)
    assert 0.0 <= f <= 1.0
    assert f == pytest.approx(fejer_kernel(-d, M), abs=1e-12)
    assert f == pytest.approx(fejer_kernel(d + 2.0, M), abs=1e-9)


def test_fejer_moments_trivial_and_bruteforce():
    m = fejer_moments(1, 10)
    assert (m.m1, m.f1, m.f2) == pytest.approx((1.0, 1.0, 1.0))
    # 10^6-point trapezoid of |sum_m e^{-j pi m delta}|/M, frozen
    m8 = fejer_moments(8, 80)
    assert m8.m1 == pytest.approx(0.125, abs=1e-8)
    assert m8.f1 == pytest.approx(0.08398437499999997, abs=1e-8)
    assert m8.f2 == m8.m1**2


@pytest.mark.parametrize("M", [2, 8, 64, 128])
def test_fejer_moments_converged_and_ordered(M):
    coarse = fejer_moments(M, 10 * M)
    fine = fejer_moments(M, 20 * M)
    assert abs(coarse.f1 - fine.f1) <= 1e-8
    assert abs(coarse.f2 - fine.f2) <= 1e-8
    assert 0 < coarse.f2 <= coarse.f1 <= 1
    assert coarse.f2 == coarse.m1**2


def test_fejer_moments_rejects_coarse_grid():
    with pytest.raises(ValueError, match="main lobe"):
        fejer_moments(64, 100)


# Frozen from an independent Lloyd loop (centroids by scipy quad, stop at codebook change < 1e-12).
LLOYD_ORACLE = {1: 0.36338022763241973, 2: 0.1174818478293293, 3: 0.034547760788503745}


@pytest.mark.parametrize("b, expected", sorted(LLOYD_ORACLE.items()))
def test_lloyd_beta_oracle(b, expected):
    assert lloyd_max_beta(b) == pytest.approx(expected, abs=1e-9)


def test_lloyd_beta_special_cases():
    assert lloyd_max_beta(INFINITE_BITS) == 0.0
    assert lloyd_max_beta(1) == pytest.approx(1 - 2 / math.pi, abs=1e-9)
    assert lloyd_max_beta(6) == pytest.approx(math.pi * math.sqrt(3) / 2 * 2.0**-12)
    assert lloyd_max_beta(6) == pytest.approx(6.642e-4, abs=1e-7)
    for bad in (0, -2):
        with pytest.raises(ValueError):
            lloyd_max_beta(bad)


def test_lloyd_beta_decreasing_with_smooth_crossover():
    betas = [lloyd_max_beta(b) for b in range(1, 13)]
    assert all(a > b for a, b in zip(betas, betas[1:]))
    formula5 = math.pi * math.sqrt(3) / 2 * 2.0**-10
    assert abs(formula5 - lloyd_max_beta(5)) / lloyd_max_beta(5) < 0.2


def test_lloyd_codebook_symmetric_one_bit():
    t, levels = lloyd_max_codebook(1)
    assert t == pytest.approx([0.0], abs=1e-12)
    assert levels == pytest.approx([-math.sqrt(2 / math.pi), math.sqrt(2 / math.pi)], abs=1e-10)
    t3, l3 = lloyd_max_codebook(3)
    assert l3 == pytest.approx(-l3[::-1], abs=1e-10)
