"""Normal family: cdf and quantile, the analytic violation index, contours."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .empirical import as_sample
from .order_distance import IndexReport
from .quadrature import integrate_unit

# Acklam's rational approximation, relative error 1.15e-9 before refinement
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549671010269440e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425
_SQRT2PI = math.sqrt(2.0 * math.pi)


def normal_cdf(x):
    """Standard normal cdf (vectorized)."""
    out = special.ndtr(np.asarray(x, dtype=np.float64))
    return float(out) if out.ndim == 0 else out


def normal_pdf(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.exp(-0.5 * x * x) / _SQRT2PI
    return float(out) if out.ndim == 0 else out


def _tail(q):
    num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
    den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
    return num / den


def normal_quantile(p):
    """Standard normal quantile, absolute error below 1e-9.

    Rational approximation followed by one Newton step against the cdf.
    The upper half is refined through the complementary cdf so precision
    is kept for p close to 1.
    """
    p = np.asarray(p, dtype=np.float64)
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise ValueError("normal_quantile requires 0 < p < 1")
    z = np.empty_like(p)
    lo = p < _P_LOW
    hi = p > 1.0 - _P_LOW
    mid = ~(lo | hi)
    if np.any(mid):
        q = p[mid] - 0.5
        r = q * q
        num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
        den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        z[mid] = num / den
    if np.any(lo):
        z[lo] = _tail(np.sqrt(-2.0 * np.log(p[lo])))
    if np.any(hi):
        z[hi] = -_tail(np.sqrt(-2.0 * np.log1p(-p[hi])))
    upper = p > 0.5
    err = np.where(upper, (1.0 - p) - special.ndtr(-z), special.ndtr(z) - p)
    z = z - err * _SQRT2PI * np.exp(0.5 * z * z)
    return float(z) if z.ndim == 0 else z


@dataclass(frozen=True)
class NormalParams:
    mu: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError("normal law needs finite mu and sigma > 0")

    def quantile(self, t):
        return self.mu + self.sigma * normal_quantile(t)

    def cdf(self, x):
        return normal_cdf((np.asarray(x, dtype=np.float64) - self.mu) / self.sigma)

    def standardized(self, other: "NormalParams") -> "NormalParams":
        """``other`` expressed in the location-scale frame where self is N(0, 1)."""
        return NormalParams((other.mu - self.mu) / self.sigma, other.sigma / self.sigma)


def fit_normal_ml(sample) -> NormalParams:
    """Maximum-likelihood normal fit (standard deviation with divisor n)."""
    x = as_sample(sample)
    if x.size < 2:
        raise ValueError("need at least two observations")
    sd = float(np.std(x))
    if sd == 0.0:
        raise ValueError("zero sample variance")
    return NormalParams(float(np.mean(x)), sd)


def normal_crossing(mu: float, sigma: float):
    """Level t where the N(0,1) and N(mu, sigma^2) quantiles cross, or None."""
    if sigma == 1.0:
        return None
    return normal_cdf(mu / (1.0 - sigma))


def epsilon_normal(mu, sigma):
    """Closed-form violation index between N(0,1) and N(mu, sigma^2).

    Vectorized in ``mu`` and ``sigma``. With ``k = 1 - sigma`` the quantile
    gap is ``k z - mu`` for standard normal ``z``; Gaussian moment integrals
    over the half-line where it is positive give the numerator, and the
    denominator is ``mu^2 + k^2``.
    """
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    k = 1.0 - sigma
    total = mu * mu + k * k
    with np.errstate(divide="ignore", invalid="ignore"):
        zs = mu / k
        phi = normal_pdf(np.where(np.isfinite(zs), zs, 0.0))
        right = special.ndtr(-zs)
        left = special.ndtr(zs)
        zphi = np.where(np.isfinite(zs), zs * phi, 0.0)
        # k > 0: violation for z > zs ; k < 0: violation for z < zs
        pos_k = k * k * (zphi + right) - 2 * k * mu * phi + mu * mu * right
        neg_k = k * k * (left - zphi) + 2 * k * mu * phi + mu * mu * left
        num = np.where(k > 0, pos_k, np.where(k < 0, neg_k, np.where(mu < 0, total, 0.0)))
        eps = num / total
    eps = np.where(total > 0, np.clip(eps, 0.0, 1.0), np.nan)
    return float(eps) if eps.ndim == 0 else eps


def epsilon_normal_pair(F: NormalParams, G: NormalParams) -> float:
    s = F.standardized(G)
    if s.mu == 0.0 and s.sigma == 1.0:
        raise ValueError("index undefined for identical distributions")
    return epsilon_normal(s.mu, s.sigma)


def _find_crossings(diff, grid=2049):
    t = (np.arange(grid) + 0.5) / grid
    d = diff(t)
    s = np.sign(d)
    roots = [float(v) for v in t[s == 0]]
    for i in np.nonzero(s[:-1] * s[1:] < 0)[0]:
        roots.append(optimize.brentq(lambda u: float(diff(np.array([u]))[0]),
                                     t[i], t[i + 1], xtol=1e-15, rtol=1e-15))
    return sorted(roots)


def epsilon_analytic(F, G, tol: float = 1e-8) -> IndexReport:
    """Violation index between two laws given by quantile callables.

    ``F`` and ``G`` are :class:`NormalParams` or vectorized quantile
    functions on (0, 1). Both integrals are split where the quantiles cross
    (closed form for two normals, located numerically otherwise).
    """
    if isinstance(F, NormalParams) and isinstance(G, NormalParams):
        s = F.standardized(G)
        if s.mu == 0.0 and s.sigma == 1.0:
            raise ValueError("index undefined for identical distributions")
        tc = normal_crossing(s.mu, s.sigma)
        splits = [] if tc is None else [tc]
        qf, qg = F.quantile, G.quantile
    else:
        qf = F.quantile if hasattr(F, "quantile") else F
        qg = G.quantile if hasattr(G, "quantile") else G
        splits = _find_crossings(lambda t: qf(t) - qg(t))

    def gap(t):
        return qf(t) - qg(t)

    (viol, total), _ = integrate_unit(
        [lambda t: np.maximum(gap(t), 0.0) ** 2, lambda t: gap(t) ** 2],
        splits=splits, tol=tol)
    if total == 0.0:
        raise ValueError("index undefined for identical distributions")
    viol = min(max(viol, 0.0), total)
    return IndexReport(viol / total, viol, total)


def contour_grid(mu_range, sigma_range, resolution: int = 50, method: str = "quadrature"):
    """Violation index of N(mu, sigma^2) against N(0, 1) on a regular grid.

    Returns an array of rows ``(mu, sigma, epsilon)`` ordered with ``mu``
    varying slowest. The point (0, 1) itself has no index and yields nan.
    """
    if min(sigma_range) <= 0:
        raise ValueError("sigma range must be positive")
    if resolution < 1:
        raise ValueError("resolution must be positive")
    mus = np.linspace(mu_range[0], mu_range[1], resolution)
    sigmas = np.linspace(sigma_range[0], sigma_range[1], resolution)
    M, S = np.meshgrid(mus, sigmas, indexing="ij")
    M, S = M.ravel(), S.ravel()
    if method == "closed-form":
        E = epsilon_normal(M, S)
    elif method == "quadrature":
        ref = NormalParams(0.0, 1.0)
        E = np.empty_like(M)
        for i, (mu, sg) in enumerate(zip(M, S)):
            if mu == 0.0 and sg == 1.0:
                E[i] = np.nan
            else:
                E[i] = epsilon_analytic(ref, NormalParams(float(mu), float(sg))).epsilon
    else:
        raise ValueError(f"unknown method {method!r}")
    return np.column_stack((M, S, E))


def write_contour_csv(rows, path) -> None:
    """Write contour rows as ``mu,sigma,epsilon`` with 6 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mu", "sigma", "epsilon"])
        for mu, sg, e in rows:
            w.writerow([f"{mu:.6g}", f"{sg:.6g}", f"{e:.6g}"])
