import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import exp1

from mmsched.analysis import (cached_fejer_moments, ergodic_rate_aligned, ergodic_rate_inf,
                              ergodic_rate_leakage_lb)
from mmsched.numerics import fejer_kernel
from mmsched.quantization import aqnm_params


def eg(z):
    return math.exp(z) * exp1(z)


def test_aligned_ideal_adc():
    r = ergodic_rate_aligned(12, 128, 1.0, 1.0)
    assert r.r_loss == 0.0
    assert r.total == pytest.approx(12 / math.log(2) * eg(1 / 128), rel=1e-12)
    assert r.total == r.r_inf == ergodic_rate_inf(12, 128, 1.0)


def test_aligned_linear_in_S():
    a = aqnm_params(2).alpha
    assert ergodic_rate_aligned(8, 64, 2.0, a).total == pytest.approx(2 * ergodic_rate_aligned(4, 64, 2.0, a).total,
                                                                      rel=1e-14)


@settings(max_examples=100)
@given(st.integers(1, 20), st.integers(1, 256), st.floats(0.01, 100), st.sampled_from([1, 2, 3, 4, 6, 9]))
def test_decomposition_identity(S, M, rho, b):
    a = aqnm_params(b).alpha
    r = ergodic_rate_aligned(S, M, rho, a)
    assert r.total == pytest.approx(r.r_inf + r.r_loss, abs=1e-12)
    assert r.r_loss <= 0
    assert r.total > 0


def test_aligned_matches_gain_monte_carlo():
    rng = np.random.default_rng(0)
    x = rng.exponential(1.0, 1_000_000)
    M = 128
    for b, rho in ((1, 1.0), (3, 10 ** 0.5)):
        a = aqnm_params(b).alpha
        mc = np.mean(np.log2(1 + a * rho / ((1 - a) * rho + 1 / (M * x))))
        assert mc == pytest.approx(ergodic_rate_aligned(1, M, rho, a).total, rel=0.005)


def test_fejer_moments_monte_carlo():
    rng = np.random.default_rng(1)
    n = 2_000_000
    # jittered strata: one uniform draw per cell of width 1/n
    d = (np.arange(n) + rng.uniform(0, 1, n)) / n
    for M in (16, 128):
        F = fejer_kernel(d, M)
        fm = cached_fejer_moments(M)
        assert np.mean(F**4) == pytest.approx(fm.f1, rel=0.01)
        assert np.mean(F**2) ** 2 == pytest.approx(fm.f2, rel=0.01)


def test_closed_forms_increasing():
    for M in (32, 128):
        for b in (1, 2, 3):
            a = aqnm_params(b).alpha
            rhos = np.logspace(-1.5, 2, 15)
            al = [ergodic_rate_aligned(12, M, r, a).total for r in rhos]
            lb = [ergodic_rate_leakage_lb(12, M, r, a).total for r in rhos]
            assert all(x < y for x, y in zip(al, al[1:]))
            assert all(x < y for x, y in zip(lb, lb[1:]))
        for rho in (0.1, 1.0, 10.0):
            al = [ergodic_rate_aligned(12, M, rho, aqnm_params(b).alpha).total for b in range(1, 11)]
            lb = [ergodic_rate_leakage_lb(12, M, rho, aqnm_params(b).alpha).total for b in range(1, 11)]
            assert all(x < y for x, y in zip(al, al[1:]))
            assert all(x < y for x, y in zip(lb, lb[1:]))


def test_leakage_converges_to_ideal():
    r_inf = ergodic_rate_inf(12, 128, 1.0)
    gaps = [abs(ergodic_rate_leakage_lb(12, 128, 1.0, aqnm_params(b).alpha).total - r_inf) for b in range(1, 11)]
    assert all(x > y for x, y in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-3 * r_inf
    lim = ergodic_rate_leakage_lb(12, 128, 1.0, 1.0)
    assert lim.total == r_inf
    assert lim.kind == "approximate lower bound"


def test_leakage_single_user_drops_interference():
    M, rho = 64, 2.0
    fm = cached_fejer_moments(M)
    for b in (1, 3):
        a = aqnm_params(b).alpha
        c1 = M * a * rho
        c2 = M * M * rho * (1 - a) * fm.f1
        direct = (eg(1 / (c1 + c2)) - eg(1 / c2)) / math.log(2)
        assert ergodic_rate_leakage_lb(1, M, rho, a).total == pytest.approx(direct, rel=1e-12)


def test_leakage_frozen_value():
    # S=12, M=128, rho=1, b=3, using f1 = (2M^2+1)/(3M^3) and f2 = 1/M^2
    M, S, rho = 128, 12, 1.0
    a = 1 - 0.034547760788503745
    f1, f2 = (2 * M * M + 1) / (3 * M**3), 1 / M**2
    c1, c2, c3 = M * a * rho, M * M * rho * (1 - a) * f1, M * M * rho * (1 - a) * (S - 1) * f2
    ref = S / math.log(2) * (eg((1 + c3) / (c1 + c2)) - eg((1 + c3) / c2))
    assert ergodic_rate_leakage_lb(S, M, rho, aqnm_params(3).alpha).total == pytest.approx(ref, rel=1e-7)


def test_domain_errors():
    for args in ((0, 8, 1.0, 0.5), (2, 8, 0.0, 0.5), (2, 8, 1.0, 0.0), (2, 8, 1.0, 1.5)):
        with pytest.raises(ValueError):
            ergodic_rate_aligned(*args)
        with pytest.raises(ValueError):
            ergodic_rate_leakage_lb(*args)


def test_moment_cache_concurrent_fill():
    results = []

    def work():
        results.append(cached_fejer_moments(96))

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len({(r.f1, r.f2) for r in results}) == 1
    assert all(r is results[0] for r in results)
