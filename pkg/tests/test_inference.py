import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from almostdom.empirical import empirical_quantile
from almostdom.inference import (bootstrap_sigma, decide, delta_sigma, estimate_sigma,
                                 one_sample_parts, one_sample_sigma, plug_in_sigma,
                                 test_almost_dominance, u_function)
from almostdom.models import NormalParams, normal_cdf, normal_quantile
from almostdom.order_distance import epsilon_index

Z05 = normal_quantile(0.05)


def uniform_cdf(s):
    return np.clip(s, 0.0, 1.0)


def shifted(t):
    return np.asarray(t) + 0.5


# decision rule

def test_decide_worked_example():
    res = decide(0.02, 0.05, 0.1, 1000, 1000, 0.05)
    assert res.statistic == pytest.approx(-0.67082039, abs=1e-8)
    assert res.reject
    assert res.upper_bound == pytest.approx(0.02 - 0.1 * Z05 / math.sqrt(500), abs=1e-12)
    assert res.upper_bound == pytest.approx(0.027356, abs=1e-6)
    assert res.upper_bound < 0.05
    assert not res.degenerate


def test_decide_at_the_boundary():
    for s in (0.01, 1.0, 10.0):
        res = decide(0.05, 0.05, s, 300, 200)
        assert res.statistic == 0.0 and not res.reject


def test_decide_degenerate():
    yes = decide(0.01, 0.05, 0.0, 50, 50)
    no = decide(0.07, 0.05, 0.0, 50, 50)
    assert yes.degenerate and yes.reject and yes.p_value == 0.0
    assert no.degenerate and not no.reject and no.p_value == 1.0


@pytest.mark.parametrize("kw", [dict(epsilon_0=0.0), dict(epsilon_0=1.0), dict(alpha=0.0),
                                dict(alpha=1.0), dict(sigma_hat=-1.0)])
def test_decide_rejects_bad_arguments(kw):
    args = dict(epsilon_hat=0.1, epsilon_0=0.05, sigma_hat=0.1, n=10, m=10, alpha=0.05)
    args.update(kw)
    with pytest.raises(ValueError):
        decide(**args)


@given(st.floats(0, 1), st.floats(0.001, 0.999), st.floats(1e-4, 10),
       st.integers(2, 10_000), st.integers(2, 10_000), st.floats(0.001, 0.999))
def test_reject_iff_small_p(eps, eps0, sigma, n, m, alpha):
    res = decide(eps, eps0, sigma, n, m, alpha)
    # away from the tie the rule and the p-value agree exactly
    assume(abs(res.statistic / sigma - normal_quantile(alpha)) > 1e-8)
    assert res.reject == (res.p_value < alpha)
    assert res.reject == (res.upper_bound < eps0)


# u functionals

def test_u_function_uniform_shift():
    x = np.array([0.0, 0.1, 0.5, 0.9, 1.0])
    assert np.allclose(u_function(x, uniform_cdf, shifted, "minus"), x, atol=1e-10)
    assert np.allclose(u_function(x, uniform_cdf, shifted, "plus"), 0.0, atol=1e-12)
    # step plug-in on a dense regular sample approaches the same function
    k = 2000
    grid = (np.arange(k) + 0.5) / k
    u = u_function(x, empirical_quantile(grid), shifted, "minus")
    assert np.allclose(u, x, atol=2 / k)


def test_u_function_identity_integrand():
    G = NormalParams(0, 1)
    x = np.array([-2.0, 0.3, 1.7])
    for sign in ("plus", "minus"):
        assert np.allclose(u_function(x, normal_cdf, G.quantile, sign), 0.0, atol=1e-8)


def test_u_function_sign_decomposition():
    G = NormalParams(0.455, 1.5)
    x = np.array([-1.5, -0.2, 0.4, 2.5])
    up = u_function(x, normal_cdf, G.quantile, "plus")
    um = u_function(x, normal_cdf, G.quantile, "minus")
    # int_0^x 2 (s - mu - sigma s) ds in closed form
    signed = (1 - 1.5) * x ** 2 - 2 * 0.455 * x
    assert np.allclose(up - um, signed, atol=1e-8)


def test_u_function_step_matches_hand_sum():
    # F_n on {0, 1}: G^{-1}(F(s)) = q_G(1/2) = 2 on [0, 1), q_G(1) = 5 from 1 on
    qF = empirical_quantile([0.0, 1.0])
    qG = empirical_quantile([2.0, 5.0])
    assert u_function(0.5, qF, qG, "minus") == pytest.approx(4 * 0.5 - 0.25, abs=1e-14)
    assert u_function(1.5, qF, qG, "minus") == pytest.approx(3.0 + (16 - 12.25), abs=1e-14)
    assert u_function(1.5, qF, qG, "plus") == 0.0


def test_u_function_rejects_bad_input():
    with pytest.raises(ValueError):
        u_function(np.nan, uniform_cdf, shifted, "minus")
    with pytest.raises(ValueError):
        u_function(0.5, uniform_cdf, shifted, "sideways")


# variance estimators

def test_plug_in_uniform_population_value():
    rng = np.random.default_rng(11)
    x = rng.uniform(0, 1, 100_000)
    y = rng.uniform(0.5, 1.5, 100_000)
    est = plug_in_sigma(x, y)
    assert est.sigma_squared == pytest.approx(0.5 * (1 / 12) / 0.25 ** 4, rel=0.05)
    assert est.lambda_hat == 0.5


def test_plug_in_identical_samples():
    with pytest.raises(ValueError, match="identical"):
        plug_in_sigma([1, 2, 3], [3, 2, 1])


def test_literal_plug_in_is_not_scale_free():
    rng = np.random.default_rng(3)
    x, y = rng.normal(0, 1, 500), rng.normal(0.455, 1.5, 500)
    base = plug_in_sigma(x, y).sigma_squared
    assert plug_in_sigma(2 * x, 2 * y).sigma_squared == pytest.approx(base / 16, rel=1e-10)
    # the delta variance of a scale-free index is itself scale-free
    d = delta_sigma(x, y).sigma_squared
    assert delta_sigma(2 * x, 2 * y).sigma_squared == pytest.approx(d, rel=1e-10)


def test_bootstrap_determinism_and_constant_data():
    rng = np.random.default_rng(5)
    x, y = rng.normal(size=200), rng.normal(0.3, 1.2, size=150)
    a = bootstrap_sigma(x, y, 200, seed=9)
    assert a.sigma_squared == bootstrap_sigma(x, y, 200, seed=9).sigma_squared
    assert a.sigma_squared != bootstrap_sigma(x, y, 200, seed=10).sigma_squared
    assert bootstrap_sigma([0.0] * 5, [1.0] * 4, 50).sigma_squared == 0.0
    with pytest.raises(ValueError):
        bootstrap_sigma(x, y, 1)


def test_bootstrap_redraws_identical_resamples():
    est = bootstrap_sigma([0.0, 1.0], [0.0, 1.0, 1.0], 300, seed=1)
    assert est.details["redraws"] > 0
    assert math.isfinite(est.sigma_squared)
    with pytest.raises(RuntimeError):
        bootstrap_sigma([1.0], [1.0, 1.0], 10)


def test_bootstrap_agrees_with_delta_on_normals():
    F, G = NormalParams(0, 1), NormalParams(0.455, 1.5)
    rng = np.random.default_rng(2024)
    x = F.mu + F.sigma * rng.standard_normal(5000)
    y = G.mu + G.sigma * rng.standard_normal(5000)
    boot = bootstrap_sigma(x, y, 500, seed=1).sigma
    delta = delta_sigma(x, y).sigma
    assert abs(boot - delta) / delta < 0.2
    # the literal closed form is several times larger on the same data
    assert plug_in_sigma(x, y).sigma > 3 * boot


def test_estimate_sigma_dispatch():
    x, y = [0.0, 1.0, 3.0], [1.0, 2.0, 2.5, 4.0]
    assert estimate_sigma(x, y, "delta").method == "delta"
    assert estimate_sigma(x, y, "plug-in").method == "plug-in"
    assert estimate_sigma(x, y, "bootstrap", 20).method == "bootstrap"
    with pytest.raises(ValueError):
        estimate_sigma(x, y, "jackknife")


def test_almost_dominance_fills_result():
    rng = np.random.default_rng(8)
    x, y = rng.normal(size=300), rng.normal(0.455, 1.5, size=300)
    res = test_almost_dominance(x, y, 0.05, 0.05, "bootstrap", seed=4, replicates=100)
    assert res.epsilon_hat == epsilon_index(empirical_quantile(x), empirical_quantile(y)).epsilon
    assert res.n == res.m == 300
    assert res.method == "bootstrap"
    assert res.details["replicates"] == 100
    assert res == test_almost_dominance(x, y, 0.05, 0.05, "bootstrap", seed=4, replicates=100)
    with pytest.raises(ValueError):
        test_almost_dominance(x, x, 0.05, 0.05, "delta")


# one-sample variance

def test_one_sample_uniform_shift():
    x = np.random.default_rng(12).uniform(size=20_000)
    est = one_sample_sigma(x, shifted)
    assert est.details["variance"] == pytest.approx(1 / 12, rel=0.03)
    assert est.details["w2_squared"] == pytest.approx(0.25, rel=0.02)
    assert est.details["violation_integral"] == 0.0


def test_one_sample_homogeneity():
    rng = np.random.default_rng(13)
    x = rng.normal(size=400)
    G = NormalParams(0.455, 1.5)
    for corrected in (False, True):
        base = one_sample_sigma(x, G.quantile, corrected).sigma_squared
        scaled = one_sample_sigma(2 * x, lambda t: 2 * G.quantile(t), corrected).sigma_squared
        expected = base / 16 if not corrected else base
        assert scaled == pytest.approx(expected, rel=1e-8)


def test_one_sample_identical_law():
    with pytest.raises(ValueError):
        one_sample_sigma([0.25, 0.75], lambda t: np.where(np.asarray(t) <= 0.5, 0.25, 0.75))


def test_v_and_u_variances_agree():
    # v_-(U) = u_-(F^{-1}(U)); compare a grid variance with a Monte Carlo one
    G = NormalParams(0.455, 1.5)
    k = 1500
    t = (np.arange(k) + 0.5) / k
    v = u_function(normal_quantile(t), normal_cdf, G.quantile, "minus")
    x = np.random.default_rng(14).standard_normal(1500)
    u = u_function(x, normal_cdf, G.quantile, "minus")
    var_v, var_u = np.var(v), np.var(u, ddof=1)
    c = u - u.mean()
    se_u = math.sqrt((np.mean(c ** 4) - var_u ** 2) / u.size)
    assert abs(var_v - var_u) < 3 * se_u + 0.01 * var_v


# linearization on bounded supports: F = U(0, 1), G = U(-0.2, 1.6)

A_SHIFT, B_SCALE = -0.2, 1.8


def _step_linear_parts(xs):
    """Exact positive/negative parts of int (F_n^{-1}(t) - a - b t)^2 per row."""
    n = xs.shape[1]
    left = np.arange(n) / n
    right = left + 1 / n
    c = xs - A_SHIFT
    t0 = c / B_SCALE
    r = np.minimum(right, t0)
    pos = np.where(left < r, ((c - B_SCALE * left) ** 3 - (c - B_SCALE * r) ** 3) / (3 * B_SCALE), 0.0)
    lo = np.maximum(left, t0)
    neg = np.where(lo < right,
                   ((B_SCALE * right - c) ** 3 - (B_SCALE * lo - c) ** 3) / (3 * B_SCALE), 0.0)
    return pos.sum(axis=1), neg.sum(axis=1)


def _v_parts(t):
    lo = np.minimum(t, 0.25)
    hi = np.maximum(t, 0.25)
    return 0.4 * lo - 0.8 * lo ** 2, 0.8 * (hi ** 2 - 0.0625) - 0.4 * (hi - 0.25)


def test_v_parts_match_u_function():
    t = np.array([0.05, 0.25, 0.6, 0.95])
    vp, vm = _v_parts(t)

    def G(s):
        return A_SHIFT + B_SCALE * np.asarray(s)

    assert np.allclose(u_function(t, uniform_cdf, G, "plus"), vp, atol=1e-10)
    assert np.allclose(u_function(t, uniform_cdf, G, "minus"), vm, atol=1e-10)


@pytest.mark.slow
def test_linearization_correlation():
    n, reps = 2000, 2000
    rng = np.random.default_rng(15)
    u = np.sort(rng.uniform(size=(reps, n)), axis=1)
    pos, neg = _step_linear_parts(u)
    vp, vm = _v_parts(u)
    a_plus = vp.sum(axis=1) / math.sqrt(n)
    a_minus = vm.sum(axis=1) / math.sqrt(n)
    t_plus, t_minus = math.sqrt(n) * pos, math.sqrt(n) * neg
    # S- moves against v_-, so that pair is compared with its sign flipped
    assert np.corrcoef(t_plus, a_plus)[0, 1] >= 0.95
    assert np.corrcoef(t_minus, -a_minus)[0, 1] >= 0.95
    assert np.corrcoef(t_plus + t_minus, a_plus - a_minus)[0, 1] >= 0.95


def test_two_sample_replacement_ladder():
    G = NormalParams(0.455, 1.5)
    x = np.random.default_rng(16).standard_normal(400)
    qF = empirical_quantile(x)
    pos, neg = one_sample_parts(qF, G.quantile)
    eps_known = pos / (pos + neg)
    gaps = []
    for m in (500, 2000, 8000, 32000):
        d = []
        for seed in range(6):
            y = G.mu + G.sigma * np.random.default_rng([17, m, seed]).standard_normal(m)
            d.append(abs(epsilon_index(qF, empirical_quantile(y)).epsilon - eps_known))
        gaps.append(np.mean(d))
    assert gaps[-1] < 0.35 * gaps[0]
    assert gaps[-1] < 0.01
