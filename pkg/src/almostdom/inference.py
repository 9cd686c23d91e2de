"""Variance estimation and the test for almost stochastic dominance.

The hypotheses are ``H0: eps(F, G) >= eps0`` against ``Ha: eps(F, G) < eps0``.
H0 is rejected when ``sqrt(nm/(n+m)) (eps_hat - eps0) < sigma_hat * z_alpha``
with ``z_alpha`` the standard normal alpha-quantile, and
``eps_hat - sqrt((n+m)/(nm)) sigma_hat z_alpha`` is an upper confidence
bound for ``eps(F, G)``.

Three estimators of ``sigma`` are available:

``bootstrap``
    n-out-of-n resampling of both samples (the default).
``plug-in``
    The closed-form variance ``[(1-lam) Var u_-(X) + lam Var u_+(Y)] / W2^8``
    with empirical laws substituted. It is kept verbatim for reference but
    is not scale invariant and overstates the spread of the index.
``delta``
    Delta-method variance of the ratio ``S+/S``, built from the same
    ``u`` functionals; this is the fast estimator to use in practice.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from . import kernels
from .empirical import (StepQuantile, as_sample, empirical_quantile,
                        part_integrals, sample_grid)
from .models import normal_cdf, normal_quantile
from .order_distance import epsilon_index
from .quadrature import integrate_unit
from .rng import substream

METHODS = ("bootstrap", "plug-in", "delta")
MAX_REDRAWS = 100


@dataclass(frozen=True)
class VarianceEstimate:
    sigma_squared: float
    method: str
    lambda_hat: float
    details: dict = field(default_factory=dict)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma_squared)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TestResult:
    epsilon_hat: float
    epsilon_0: float
    statistic: float
    sigma_hat: float
    alpha: float
    reject: bool
    p_value: float
    upper_bound: float
    n: int
    m: int
    method: str = "given"
    degenerate: bool = False
    details: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return asdict(self)


def _sign(sign) -> int:
    if sign in ("plus", "+", 1, "positive"):
        return 1
    if sign in ("minus", "-", -1, "negative"):
        return -1
    raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")


def _H(d, s):
    # antiderivative of 2 * (d)_+ (s=1) or 2 * (d)_- (s=-1) in d
    if s > 0:
        return np.maximum(d, 0.0) ** 2
    return -np.maximum(-d, 0.0) ** 2


def _quantile_at(G, t):
    if isinstance(G, StepQuantile):
        return G.values[np.searchsorted(G.breaks, t, side="left")]
    return np.asarray(G(t), dtype=np.float64)


def _step_pieces(F: StepQuantile, G):
    """Jump points of F's cdf and the constant ``G^{-1}(F(s))`` on each piece.

    ``consts[0]`` applies below the first jump, ``consts[k]`` on
    ``[edges[k-1], edges[k])``.
    """
    F = F.canonical()
    edges = F.values
    levels = F.breaks
    if isinstance(G, StepQuantile):
        first = G.values[0]
        inner = _quantile_at(G, levels)
    else:
        first = float(_quantile_at(G, np.array([1e-300]))[0])
        inner = _quantile_at(G, np.minimum(levels, 1.0 - 2.0 ** -53))
        if not np.isfinite(inner[-1]) and inner.size > 1:
            inner[-1] = inner[-2]
        if not np.isfinite(first):
            first = inner[0]
    consts = np.concatenate(([first], inner))
    return edges, consts


def _step_antiderivative(edges, consts, s, sgn):
    """Integral of ``2 (r - c(r))_{sgn}`` from ``edges[0]`` to ``s``."""
    c_pc = consts[1:]
    Hk = _H(edges - c_pc, sgn)
    if edges.size > 1:
        inc = _H(edges[1:] - c_pc[:-1], sgn) - Hk[:-1]
        C = np.concatenate(([0.0], np.cumsum(inc)))
    else:
        C = np.zeros(1)
    s = np.asarray(s, dtype=np.float64)
    k = np.searchsorted(edges, s, side="right") - 1
    kk = np.maximum(k, 0)
    c = c_pc[kk]
    inside = C[kk] + np.where(s > edges[kk], _H(s - c, sgn) - Hk[kk], 0.0)
    below = _H(s - consts[0], sgn) - _H(edges[0] - consts[0], sgn)
    return np.where(k >= 0, inside, below)


def _analytic_u(x, cdf, quantile, sgn):
    def f(r):
        p = min(max(float(cdf(r)), 1e-300), 1.0 - 2.0 ** -53)
        d = r - float(_quantile_at(quantile, np.array([p]))[0])
        return 2.0 * max(sgn * d, 0.0)

    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    order = np.argsort(x)
    xs = x[order]
    pts = np.concatenate(([0.0], xs))
    pts.sort()
    cum = np.zeros(pts.size)
    for i in range(1, pts.size):
        if pts[i] > pts[i - 1]:
            with warnings.catch_warnings():
                # integrands at rounding level trip the divergence heuristic
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, _ = integrate.quad(f, pts[i - 1], pts[i], epsabs=1e-12, epsrel=1e-12,
                                        limit=200)
        else:
            val = 0.0
        cum[i] = cum[i - 1] + val
    zero = np.searchsorted(pts, 0.0, side="left")
    vals = cum - cum[zero]
    out = np.empty_like(x)
    out[order] = vals[np.searchsorted(pts, xs, side="left")]
    return out


def u_function(x, F, G, sign):
    """``int_0^x 2 (s - G^{-1}(F(s)))_{+/-} ds`` for each ``x``.

    ``F`` is either a sample / :class:`StepQuantile` (its step cdf is used and
    the integral is an exact sum of quadratic pieces) or a callable cdf
    (adaptive quadrature). ``G`` is a :class:`StepQuantile` or a vectorized
    quantile callable. For ``x < 0`` the integral is oriented, i.e. negative.
    """
    sgn = _sign(sign)
    xa = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(xa)):
        raise ValueError("u_function requires finite arguments")
    if callable(F) and not isinstance(F, StepQuantile):
        out = _analytic_u(xa, F, G, sgn)
        return float(out[0]) if xa.ndim == 0 else out
    qF = F if isinstance(F, StepQuantile) else empirical_quantile(F)
    edges, consts = _step_pieces(qF, G)
    out = (_step_antiderivative(edges, consts, xa, sgn)
           - _step_antiderivative(edges, consts, np.array(0.0), sgn))
    return float(out) if np.ndim(out) == 0 else out


def _u_pair(x, qF, qG):
    edges, consts = _step_pieces(qF, qG)
    zero = np.array(0.0)
    up = _step_antiderivative(edges, consts, x, 1) - _step_antiderivative(edges, consts, zero, 1)
    um = _step_antiderivative(edges, consts, x, -1) - _step_antiderivative(edges, consts, zero, -1)
    return up, um


def _prepare(sampleX, sampleY):
    x = as_sample(sampleX)
    y = as_sample(sampleY)
    qF = empirical_quantile(x)
    qG = empirical_quantile(y)
    pos, neg = part_integrals(qF, qG)
    if pos + neg == 0.0:
        raise ValueError("variance undefined: identical empirical distributions")
    return x, y, qF, qG, pos, neg


def plug_in_sigma(sampleX, sampleY) -> VarianceEstimate:
    """Closed-form variance with empirical plug-ins, taken verbatim.

    ``[(1-lam) Var u_-(X_i) + lam Var u_+(Y_j)] / W2^8`` with ``u_+/-``
    built from ``G_m^{-1}(F_n(s))``.
    """
    x, y, qF, qG, pos, neg = _prepare(sampleX, sampleY)
    n, m = x.size, y.size
    lam = n / (n + m)
    _, um_x = _u_pair(x, qF, qG)
    up_y, _ = _u_pair(y, qF, qG)
    var_x = float(np.var(um_x, ddof=1)) if n > 1 else 0.0
    var_y = float(np.var(up_y, ddof=1)) if m > 1 else 0.0
    w2sq = pos + neg
    s2 = ((1 - lam) * var_x + lam * var_y) / w2sq ** 4
    return VarianceEstimate(s2, "plug-in", lam,
                            {"var_u_minus_X": var_x, "var_u_plus_Y": var_y, "w2_squared": w2sq})


def delta_sigma(sampleX, sampleY) -> VarianceEstimate:
    """Delta-method variance of the empirical index.

    With ``S+`` and ``S-`` the violating and non-violating parts of
    ``S = W2^2``, the index moves by ``(S- dS+ - S+ dS-) / S^2``. Perturbing
    F moves ``S+`` by ``u_+`` and ``S-`` by ``-u_-``; perturbing G does the
    same with ``w_-`` and ``-w_+`` where ``w`` swaps the roles of F and G.
    """
    x, y, qF, qG, pos, neg = _prepare(sampleX, sampleY)
    n, m = x.size, y.size
    lam = n / (n + m)
    up_x, um_x = _u_pair(x, qF, qG)
    wp_y, wm_y = _u_pair(y, qG, qF)
    infl_x = neg * up_x + pos * um_x
    infl_y = neg * wm_y + pos * wp_y
    var_x = float(np.var(infl_x, ddof=1)) if n > 1 else 0.0
    var_y = float(np.var(infl_y, ddof=1)) if m > 1 else 0.0
    total = pos + neg
    s2 = ((1 - lam) * var_x + lam * var_y) / total ** 4
    return VarianceEstimate(s2, "delta", lam,
                            {"var_F_part": var_x, "var_G_part": var_y, "w2_squared": total,
                             "violation_integral": pos})


def _resampled_epsilons(x, y, replicates, seed):
    n, m = x.size, y.size
    ia, ib, w = sample_grid(n, m)
    out = np.empty(replicates)
    redraws = 0
    chunk = max(1, min(replicates, 2_000_000 // (n + m)))
    for start in range(0, replicates, chunk):
        stop = min(replicates, start + chunk)
        XA = np.empty((stop - start, n))
        YA = np.empty((stop - start, m))
        for r, b in enumerate(range(start, stop)):
            g = substream(seed, b)
            XA[r] = x[g.integers(0, n, n)]
            YA[r] = y[g.integers(0, m, m)]
        XA.sort(axis=1)
        YA.sort(axis=1)
        pos, neg = kernels.batch_part_sums(XA, YA, ia, ib, w)
        tot = pos + neg
        for r in np.nonzero(tot == 0.0)[0]:
            b = start + r
            for attempt in range(1, MAX_REDRAWS + 1):
                redraws += 1
                g = substream(seed, b, attempt)
                xr = np.sort(x[g.integers(0, n, n)])
                yr = np.sort(y[g.integers(0, m, m)])
                p, q = kernels.part_sums(xr, yr, ia, ib, w)
                if p + q > 0.0:
                    pos[r], tot[r] = p, p + q
                    break
            else:
                raise RuntimeError("bootstrap kept drawing identical resamples")
        out[start:stop] = pos / tot
    return out, redraws


def bootstrap_sigma(sampleX, sampleY, replicates: int = 500, seed=0) -> VarianceEstimate:
    """Bootstrap standard deviation of ``sqrt(nm/(n+m)) * eps_hat``.

    Replicate ``b`` draws from the substream ``(seed, b)`` so the result does
    not depend on how replicates are scheduled.
    """
    if replicates < 2:
        raise ValueError("need at least two bootstrap replicates")
    x = as_sample(sampleX)
    y = as_sample(sampleY)
    n, m = x.size, y.size
    eps, redraws = _resampled_epsilons(x, y, replicates, seed)
    scaled = math.sqrt(n * m / (n + m)) * eps
    s2 = float(np.var(scaled, ddof=1))
    return VarianceEstimate(s2, "bootstrap", n / (n + m),
                            {"replicates": replicates, "redraws": redraws,
                             "bootstrap_mean_epsilon": float(eps.mean())})


def one_sample_sigma(sampleX, G_quantile: Callable, corrected: bool = False) -> VarianceEstimate:
    """Variance for the index of an empirical F against a known G.

    By default ``Var v_-(U) / W2^8`` with ``v_-(t) = u_-(F_n^{-1}(t))``
    evaluated on the sample points. ``corrected=True`` returns the
    delta-method version ``Var(S- v_+ + S+ v_-) / W2^8``.
    """
    x = as_sample(sampleX)
    qF = empirical_quantile(x)
    edges, consts = _step_pieces(qF, G_quantile)
    zero = np.array(0.0)
    vm = _step_antiderivative(edges, consts, x, -1) - _step_antiderivative(edges, consts, zero, -1)
    vp = _step_antiderivative(edges, consts, x, 1) - _step_antiderivative(edges, consts, zero, 1)
    pos, neg = one_sample_parts(qF, G_quantile)
    total = pos + neg
    if total == 0.0:
        raise ValueError("variance undefined: W2 is zero")
    if corrected:
        var = float(np.var(neg * vp + pos * vm, ddof=1))
    else:
        var = float(np.var(vm, ddof=1))
    return VarianceEstimate(var / total ** 4, "one-sample-delta" if corrected else "one-sample",
                            1.0, {"w2_squared": total, "violation_integral": pos, "variance": var})


def one_sample_parts(qF: StepQuantile, G_quantile: Callable, tol: float = 1e-10):
    """``(int (qF - G^{-1})_+^2, int (qF - G^{-1})_-^2)`` by quadrature."""
    def gap(t):
        return qF.values[np.searchsorted(qF.breaks, t, side="left")] - G_quantile(t)

    (pos, neg), _ = integrate_unit(
        [lambda t: np.maximum(gap(t), 0.0) ** 2, lambda t: np.maximum(-gap(t), 0.0) ** 2],
        splits=qF.breaks[:-1], tol=tol)
    return float(pos), float(neg)


def decide(epsilon_hat, epsilon_0, sigma_hat, n, m, alpha=0.05, method="given",
           details: Optional[dict] = None) -> TestResult:
    """Apply the rejection rule and the upper bound to given numbers."""
    if not 0 < epsilon_0 < 1:
        raise ValueError("epsilon_0 must lie in (0, 1)")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if sigma_hat < 0:
        raise ValueError("sigma_hat must be nonnegative")
    rate = math.sqrt(n * m / (n + m))
    z = normal_quantile(alpha)
    stat = rate * (epsilon_hat - epsilon_0)
    reject = bool(stat < sigma_hat * z)
    degenerate = sigma_hat == 0.0
    if degenerate:
        p_value = 0.0 if reject else 1.0
    else:
        p_value = float(normal_cdf(stat / sigma_hat))
    upper = epsilon_hat - sigma_hat * z / rate
    return TestResult(float(epsilon_hat), float(epsilon_0), float(stat), float(sigma_hat),
                      float(alpha), reject, p_value, float(upper), int(n), int(m),
                      method, degenerate, dict(details or {}))


def estimate_sigma(sampleX, sampleY, method: str = "bootstrap", replicates: int = 500,
                   seed=0) -> VarianceEstimate:
    if method == "bootstrap":
        return bootstrap_sigma(sampleX, sampleY, replicates, seed)
    if method == "plug-in":
        return plug_in_sigma(sampleX, sampleY)
    if method == "delta":
        return delta_sigma(sampleX, sampleY)
    raise ValueError(f"unknown variance method {method!r}; choose from {METHODS}")


def test_almost_dominance(sampleX, sampleY, epsilon_0: float = 0.05, alpha: float = 0.05,
                          variance_method: str = "bootstrap", seed=0,
                          replicates: int = 500) -> TestResult:
    """Test ``H0: eps(F, G) >= epsilon_0`` from two independent samples."""
    x = as_sample(sampleX)
    y = as_sample(sampleY)
    report = epsilon_index(empirical_quantile(x), empirical_quantile(y))
    var = estimate_sigma(x, y, variance_method, replicates, seed)
    details = {"w2_squared": report.w2_squared,
               "violation_integral": report.violation_integral,
               "lambda_hat": var.lambda_hat, **var.details}
    return decide(report.epsilon, epsilon_0, var.sigma, x.size, y.size, alpha,
                  variance_method, details)


test_almost_dominance.__test__ = False
