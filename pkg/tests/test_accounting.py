import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from dps4s.accounting import (
    AlphaTooSmall,
    amplify_pure_direct,
    amplify_pure_fast,
    amplify_rdp,
    amplify_vector,
    calibrate_smooth,
    choose_alpha_scalar,
    dp_to_rdp,
    find_alpha,
    gaussian_renyi_divergence,
    rdp_to_dp,
    scalar_alpha_score,
    se_amplify,
    smooth_bound_G,
    ss_calibration,
)
from dps4s.errors import InvalidParams, NoValidAlpha
from oracles import bruteforce_G, exact_se_miss, mp_amplify_pure, mp_amplify_rdp, se_epsilon, smooth_roots
from reference import AMPLIFICATION_TABLE as REFERENCE_TABLE
from reference import AMPLIFICATION_TAUS as TAUS


@pytest.mark.parametrize("q", sorted(REFERENCE_TABLE))
def test_pure_reference_table(q):
    for tau, expected in zip(TAUS, REFERENCE_TABLE[q]):
        assert abs(amplify_pure_fast(1.0, tau, 1024, q) - expected) <= 1e-4
        assert abs(amplify_pure_direct(1.0, tau, 1024, q) - expected) <= 1e-4


@pytest.mark.parametrize(
    "eps,tau,cap,q", [(1.0, 1, 1024, 0.001), (1.0, 16, 1024, 0.01), (0.5, 7.5, 40, 0.3), (3.0, 2, 5, 0.9)]
)
def test_pure_against_high_precision(eps, tau, cap, q):
    ref = mp_amplify_pure(eps, tau, cap, q)
    assert amplify_pure_direct(eps, tau, cap, q) == pytest.approx(ref, abs=1e-12)
    assert amplify_pure_fast(eps, tau, cap, q) == pytest.approx(ref, abs=1e-10)


def test_pure_closed_form_when_tau_equals_cap():
    expected = max(4 * math.log((1 + math.exp(0.25)) / 2), -4 * math.log((1 + math.exp(-0.25)) / 2))
    assert amplify_pure_direct(1.0, 4, 4, 0.5) == pytest.approx(expected, abs=1e-12)
    assert amplify_pure_fast(1.0, 4, 4, 0.5) == pytest.approx(expected, abs=1e-12)


def test_pure_q_one_is_identity_up_to_tau_cap():
    assert amplify_pure_fast(1.0, 8, 8, 1.0) == 1.0
    assert amplify_pure_direct(1.0, 3, 8, 1.0) == 1.0
    # beyond the tuple bound a single threshold costs proportionally less
    assert amplify_pure_fast(1.0, 16, 8, 1.0) == 0.5


def test_fast_matches_direct_randomised():
    rng = np.random.default_rng(99)
    for _ in range(100):
        cap = int(rng.integers(1, 2001))
        tau = float(rng.integers(1, cap + 1))
        eps = float(rng.uniform(1e-3, 4.0))
        q = float(rng.uniform(1e-4, 1.0))
        assert abs(amplify_pure_fast(eps, tau, cap, q) - amplify_pure_direct(eps, tau, cap, q)) <= 1e-9


@given(
    st.floats(0.01, 4.0), st.integers(1, 300), st.floats(1e-4, 1.0), st.floats(1e-4, 1.0), st.data()
)
def test_pure_bounded_and_monotone_in_q(eps, cap, q1, q2, data):
    tau = data.draw(st.floats(0.5, float(cap)))
    lo, hi = sorted((q1, q2))
    a, b = amplify_pure_fast(eps, tau, cap, lo), amplify_pure_fast(eps, tau, cap, hi)
    assert a <= eps and b <= eps
    assert a <= b + 1e-12


def test_pure_rejects_bad_inputs():
    for args in [(0.0, 1, 4, 0.5), (1.0, 0, 4, 0.5), (1.0, 1, 0, 0.5), (1.0, 1, 4, 0.0), (1.0, 1, 4, 1.5)]:
        with pytest.raises(InvalidParams):
            amplify_pure_fast(*args)


def test_rdp_two_term_sum():
    assert amplify_rdp(2.0, 1.0, 1, 1, 0.5) == pytest.approx(math.log(0.5 + 0.5 * math.e), abs=1e-12)


def test_rdp_against_high_precision():
    rng = np.random.default_rng(5)
    for _ in range(20):
        cap = int(rng.integers(1, 60))
        tau = float(rng.integers(1, cap + 1))
        alpha = float(rng.uniform(1.1, 30))
        rho = float(rng.uniform(0.01, 2))
        q = float(rng.uniform(0.001, 1))
        assert amplify_rdp(alpha, rho, tau, cap, q) == pytest.approx(
            mp_amplify_rdp(alpha, rho, tau, cap, q), rel=1e-10, abs=1e-13
        )


@given(
    st.floats(1.01, 64), st.floats(0.01, 4), st.integers(1, 200), st.floats(1e-3, 1), st.floats(1e-3, 1), st.data()
)
def test_rdp_bounded_and_monotone_in_q(alpha, rho, cap, q1, q2, data):
    tau = data.draw(st.floats(1.0, float(cap)))
    lo, hi = sorted((q1, q2))
    a, b = amplify_rdp(alpha, rho, tau, cap, lo), amplify_rdp(alpha, rho, tau, cap, hi)
    assert a <= rho and b <= rho
    assert a <= b + 1e-12


@given(st.floats(1.01, 64), st.floats(0.01, 4), st.integers(1, 500))
def test_rdp_full_sampling_at_cap(alpha, rho, cap):
    assert amplify_rdp(alpha, rho, cap, cap, 1.0) == rho


def test_conversions():
    assert dp_to_rdp(1.0, 2.0).rho == 1.0
    assert rdp_to_dp(10.0, 0.5, 1e-6).epsilon == pytest.approx(0.5 + math.log(1e6) / 9, abs=1e-12)
    assert rdp_to_dp(3.0, 0.7, 1 - 1e-15).epsilon == pytest.approx(0.7, abs=1e-12)


def test_gaussian_divergence_cases():
    assert gaussian_renyi_divergence(1.0, 1.0, 1.0, 2.0) == pytest.approx(1.0)
    assert gaussian_renyi_divergence(0.5, 2.0, 1.0, 2.0) == math.inf
    expected = 0.5 * math.log(1.2**4 / 1.88)
    assert gaussian_renyi_divergence(0.0, 1.0, 1.2, 2.0, 1) == pytest.approx(expected, abs=1e-12)


@given(st.floats(0.01, 100), st.floats(1.001, 100), st.integers(1, 50))
def test_gaussian_divergence_zero_at_identity(sigma, alpha, d):
    assert gaussian_renyi_divergence(0.0, sigma, sigma, alpha, d) == pytest.approx(0.0, abs=1e-12)


def test_vector_amplification_cases():
    assert amplify_vector(4.0, 1e-7, 7.0, 1.0, 10) == 4.0
    q = 1 - 0.5 ** (1 / 4)
    expected = math.log(0.5 + 0.5 * math.exp(0.8)) + (
        math.log(0.5 + 0.5 * math.exp(6 * (3.2 - math.log(1e7) / 6))) + math.log(1e7)
    ) / 6
    assert amplify_vector(4.0, 1e-7, 7.0, q, 4) == pytest.approx(expected, abs=1e-12)
    assert amplify_vector(4.0, 1e-7, 7.0, q, 4) == pytest.approx(3.5699, abs=1e-4)
    with pytest.raises(AlphaTooSmall):
        amplify_vector(1.0, 1e-7, 2.0, 0.1, 4)


@given(st.floats(0.5, 8), st.floats(1e-9, 1e-3), st.floats(1e-4, 1.0), st.integers(1, 1000), st.floats(1, 60))
def test_vector_bounded(eps, delta, q, cap, extra):
    alpha = 1.0 + math.log(1 / delta) / (0.8 * eps) + extra
    assert amplify_vector(eps, delta, alpha, q, cap) <= eps


def test_se_cases():
    assert se_amplify(1.0, 0.0, 30, 100, 4) == (1.0, 0.0)
    eps, _ = se_amplify(1.0, 0.0, 2, 100, 4)
    assert exact_se_miss(2, 100, 4) == 1 - Fraction(8372, 9900)
    assert eps == pytest.approx(se_epsilon(1.0, 2, 100, 4), abs=1e-12)
    assert eps == pytest.approx(0.23524, abs=1e-5)


@pytest.mark.parametrize("m,C", [(10, 1), (100, 4), (1000, 64), (5000, 1024)])
def test_se_single_user(m, C):
    eps, _ = se_amplify(0.8, 0.0, 1, m, C)
    assert eps == pytest.approx(math.log1p(C / m * math.expm1(0.8)), abs=1e-12)


def test_se_approximate_branch():
    eps, delta = se_amplify(1.0, 1e-6, 2, 100, 4)
    miss = float(exact_se_miss(2, 100, 4))
    assert eps == pytest.approx(math.log1p(miss * math.expm1(2.0)), abs=1e-12)
    assert delta == pytest.approx(miss * (math.e + 1) * 1e-6, rel=1e-12)


def test_smooth_closed_form():
    cal = calibrate_smooth(2.0, math.log(2.0), 1)
    assert cal.t1 == pytest.approx(2 - math.sqrt(2), abs=1e-12)
    assert cal.t2 == pytest.approx(2 + math.sqrt(2), abs=1e-12)
    gamma = 0.5 * math.log(1 / (2 - math.sqrt(2)))
    assert cal.gamma == pytest.approx(gamma, abs=1e-12)
    eta = math.sqrt(2 / math.log(2)) / (1 - 2 + 2 * (2 - math.sqrt(2)))
    assert cal.eta == pytest.approx(eta, rel=1e-12)


def test_smooth_roots_against_plain_bracketing():
    for alpha in (1.5, 2.0, 4.0, 17.0, 31.0):
        for rho in (0.05, 0.3, 1.0):
            for d in (1, 8, 64):
                cal = calibrate_smooth(alpha, rho, d)
                t1, t2 = smooth_roots(alpha, rho, d)
                assert cal.t1 == pytest.approx(t1, rel=1e-9)
                assert cal.t2 == pytest.approx(t2, rel=1e-9)


@given(st.floats(1.05, 80), st.floats(1e-3, 5), st.integers(1, 5000))
def test_smooth_gamma_bound_and_finite_eta(alpha, rho, d):
    assume((alpha - 1) * rho / d < 600)
    cal = calibrate_smooth(alpha, rho, d)
    assert 0 < cal.eta < math.inf
    assert cal.gamma <= 0.5 * math.log(alpha / (alpha - 1))
    if (alpha - 1) * rho / d < 20:
        # further out the gap falls below double resolution
        assert math.exp(-2 * cal.gamma) > (alpha - 1) / alpha
        assert cal.gamma < 0.5 * math.log(alpha / (alpha - 1))


def test_G_values():
    assert smooth_bound_G(1.0, 0.05) == pytest.approx(20 * math.exp(-0.95), abs=1e-9)
    assert smooth_bound_G(100.0, 0.05) == 100.0


@given(st.floats(0, 200), st.floats(1e-3, 2))
def test_G_matches_brute_force(B, gamma):
    G = smooth_bound_G(B, gamma)
    assert G >= B
    assert G == pytest.approx(bruteforce_G(B, gamma), rel=1e-12)


def test_ss_gaussian_constants():
    gamma, eta = ss_calibration(1.0, 1e-7, 1, "gaussian")
    assert eta == pytest.approx(28.9924, abs=1e-3)
    assert gamma == pytest.approx(0.014036, abs=1e-5)
    assert ss_calibration(2.0, 0.0, 3, "cauchy") == (2.0 / 18, 3.0)
    assert ss_calibration(1.0, 1e-5, 1, "laplace")[1] == 2.0


@pytest.mark.parametrize("d", [1, 8, 64, 512, 4096])
def test_find_alpha_range(d):
    alpha, rho = find_alpha(1.0, 1e-7, d)
    assert 17 <= alpha <= 32
    assert rho > 0 and alpha > 1 + math.log(1e7)


def test_find_alpha_rejects_bad_delta():
    with pytest.raises(NoValidAlpha):
        find_alpha(1.0, 0.0)


def test_choose_alpha_scalar_local_optimum():
    for eps, delta in [(1.0, 1e-7), (4.0, 1e-7), (0.3, 1e-5), (1.0, 0.9)]:
        alpha, rho = choose_alpha_scalar(eps, delta)
        assert rho > 0 and math.isfinite(alpha)
        s = scalar_alpha_score(alpha, eps, delta)
        for f in (0.9, 1.1):
            if alpha * f > 1:
                assert s <= scalar_alpha_score(alpha * f, eps, delta)
        grid = 1 + np.geomspace(1e-4, 1e4, 20000)
        assert s <= min(scalar_alpha_score(a, eps, delta) for a in grid) * (1 + 1e-9)


def test_choose_alpha_approaches_one_as_delta_grows():
    alphas = [choose_alpha_scalar(1.0, d)[0] for d in (0.5, 0.9, 0.99, 0.999999)]
    assert all(a > b for a, b in zip(alphas, alphas[1:]))
    assert alphas[-1] < 1.01
