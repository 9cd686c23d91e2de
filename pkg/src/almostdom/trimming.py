"""Extreme trimmings of a distribution and the quantile envelope.

Among all pi-trimmings of F, the stochastically smallest one removes mass
pi from the top and the largest removes it from the bottom. Their quantile
functions are ``t -> F^{-1}((1-pi) t)`` and ``t -> F^{-1}(pi + (1-pi) t)``;
every other pi-trimming has its quantile sandwiched between the two.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .empirical import StepQuantile, merged_grid


def check_trim_level(pi) -> float:
    pi = float(pi)
    if not 0.0 <= pi < 1.0:
        raise ValueError(f"trim level must lie in [0, 1), got {pi}")
    return pi


MAX_LEVEL_DENOM = 10 ** 6
MAX_GRID_DENOM = 2 ** 40


def _rational_level(q: StepQuantile, pi):
    """``(p, r)`` with ``pi == p / r`` when an exact trimmed grid is possible.

    Levels within 1e-15 of a fraction with denominator up to 10^6 count as
    that fraction, so 0.2 and 1/3 trim an empirical grid without rounding.
    """
    if not q.exact:
        return None
    f = Fraction(pi).limit_denominator(MAX_LEVEL_DENOM)
    if abs(float(f) - pi) > 1e-15 or q.denom * f.denominator > MAX_GRID_DENOM:
        return None
    return f.numerator, f.denominator


def lower_trim_quantile(q: StepQuantile, pi) -> StepQuantile:
    """Quantile of the minimal trimming, ``t -> q((1 - pi) t)``."""
    pi = check_trim_level(pi)
    if pi == 0.0:
        return q
    exact = _rational_level(q, pi)
    if exact is not None:
        p, r = exact
        # t_i / (1 - pi) = numer_i * r / (D (r - p))
        scaled = q.numer * r
        denom = q.denom * (r - p)
        j = int(np.searchsorted(scaled, denom, side="left"))
        numer = np.append(scaled[:j], denom)
        return StepQuantile.from_grid(numer, denom, q.values[: j + 1])
    keep = 1.0 - pi
    # piece i survives while its left edge lies below 1 - pi
    j = int(np.searchsorted(q.breaks, keep, side="left"))
    breaks = np.append(q.breaks[:j] / keep, 1.0)
    values = q.values[: j + 1]
    breaks, values = _drop_degenerate(breaks, values)
    return StepQuantile(breaks, values)


def upper_trim_quantile(q: StepQuantile, pi) -> StepQuantile:
    """Quantile of the maximal trimming, ``t -> q(pi + (1 - pi) t)``."""
    pi = check_trim_level(pi)
    if pi == 0.0:
        return q
    exact = _rational_level(q, pi)
    if exact is not None:
        p, r = exact
        # (t_i - pi) / (1 - pi) = (numer_i r - p D) / (D (r - p))
        shifted = q.numer * r - p * q.denom
        denom = q.denom * (r - p)
        j = int(np.searchsorted(shifted, 0, side="right"))
        numer = np.append(shifted[j:-1], denom)
        return StepQuantile.from_grid(numer, denom, q.values[j:])
    keep = 1.0 - pi
    # first piece whose right edge exceeds pi
    j = int(np.searchsorted(q.breaks, pi, side="right"))
    breaks = np.append((q.breaks[j:-1] - pi) / keep, 1.0)
    values = q.values[j:]
    breaks, values = _drop_degenerate(breaks, values)
    return StepQuantile(breaks, values)


def _drop_degenerate(breaks, values):
    # rescaling can round an interior break onto 0 or 1 (or onto a neighbour)
    b = np.minimum(breaks, 1.0)
    left = np.concatenate(([0.0], b[:-1]))
    ok = b > left
    return b[ok], values[ok]


def trimmed_cdf_value(F, pi, x, side: str = "upper") -> float:
    """Value at ``x`` of the cdf of an extreme trimming of ``F``.

    ``side="upper"`` gives ``max((F(x) - pi) / (1 - pi), 0)`` (mass removed
    from the bottom), ``side="lower"`` gives ``min(F(x) / (1 - pi), 1)``.
    ``F`` may be a callable cdf or an already evaluated probability.
    """
    pi = check_trim_level(pi)
    p = F(x) if callable(F) else F
    p = np.asarray(p, dtype=np.float64)
    if side == "upper":
        out = np.maximum((p - pi) / (1.0 - pi), 0.0)
    elif side == "lower":
        out = np.minimum(p / (1.0 - pi), 1.0)
    else:
        raise ValueError("side must be 'lower' or 'upper'")
    return float(out) if out.ndim == 0 else out


def _below_or_equal(q1: StepQuantile, q2: StepQuantile) -> bool:
    ia, ib, _ = merged_grid(q1, q2)
    return bool(np.all(q1.values[ia] <= q2.values[ib]))


def envelope_contains(candidate: StepQuantile, base: StepQuantile, pi) -> bool:
    """Whether ``candidate`` lies inside the pi-trimming envelope of ``base``."""
    return (_below_or_equal(lower_trim_quantile(base, pi), candidate)
            and _below_or_equal(candidate, upper_trim_quantile(base, pi)))
