"""Distances to the stochastic order and the W2 violation index."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .empirical import (StepQuantile, _lcm_fits, l1_part_integrals,
                        merged_grid, part_integrals)
from .trimming import lower_trim_quantile, upper_trim_quantile

ZERO_DISTANCE = 1e-14


@dataclass(frozen=True)
class IndexReport:
    """Violation index with its decomposition.

    ``epsilon = violation_integral / w2_squared``.
    """

    epsilon: float
    violation_integral: float
    w2_squared: float
    n: Optional[int] = None
    m: Optional[int] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class OptimalOrderedPair:
    lower: StepQuantile
    upper: StepQuantile
    distance: float


@dataclass(frozen=True)
class TrimSolution:
    """Smallest trim level making the trimmed pair stochastically ordered.

    ``finite`` is False when no level below 1 achieves it; ``pi`` then holds
    the sentinel ``1 - tol``.
    """

    pi: float
    finite: bool
    tol: float
    distance: float

    def to_dict(self) -> dict:
        return asdict(self)


def is_stochastically_dominated(qF: StepQuantile, qG: StepQuantile) -> bool:
    """True iff ``qF <= qG`` everywhere, i.e. F is stochastically smaller."""
    ia, ib, _ = merged_grid(qF, qG)
    return bool(np.all(qF.values[ia] <= qG.values[ib]))


def w2(qF: StepQuantile, qG: StepQuantile) -> float:
    pos, neg = part_integrals(qF, qG)
    return math.sqrt(pos + neg)


def epsilon_index(qF: StepQuantile, qG: StepQuantile) -> IndexReport:
    """Share of ``W2^2(F, G)`` coming from pieces where ``qF > qG``."""
    pos, neg = part_integrals(qF, qG)
    total = pos + neg
    if total == 0.0:
        raise ValueError("index undefined for identical distributions")
    return IndexReport(pos / total, pos, total, qF.size, qG.size)


def trimmed_order_distance(qF: StepQuantile, qG: StepQuantile, pi) -> float:
    """Distance from the pi-trimmed pair to the stochastic-order cone.

    Closed form ``sqrt(1/2 * int (F^{-1}((1-pi)t) - G^{-1}(pi+(1-pi)t))_+^2 dt)``.
    """
    lo = lower_trim_quantile(qF, pi)
    hi = upper_trim_quantile(qG, pi)
    pos, _ = part_integrals(lo, hi)
    return math.sqrt(0.5 * pos)


def optimal_ordered_pair(qF: StepQuantile, qG: StepQuantile, pi=0.0) -> OptimalOrderedPair:
    """Closest stochastically ordered pair to ``(F_pi, G^pi)``.

    Where the trimmed quantiles cross in the wrong direction both are moved
    to their midpoint; elsewhere they are kept.
    """
    lo = lower_trim_quantile(qF, pi)
    hi = upper_trim_quantile(qG, pi)
    ia, ib, w = merged_grid(lo, hi)
    f = lo.values[ia]
    g = hi.values[ib]
    mid = 0.5 * (f + g)
    lower_vals = np.minimum(f, mid)
    upper_vals = np.maximum(g, mid)
    dist2 = float(np.dot(w, (f - lower_vals) ** 2 + (g - upper_vals) ** 2))
    if lo.exact and hi.exact and _lcm_fits(lo.denom, hi.denom):
        lcm = lo.denom * hi.denom // math.gcd(lo.denom, hi.denom)
        a = lo.numer * (lcm // lo.denom)
        b = hi.numer * (lcm // hi.denom)
        numer = np.union1d(a, b)
        lower = StepQuantile.from_grid(numer, lcm, lower_vals).canonical()
        upper = StepQuantile.from_grid(numer, lcm, upper_vals).canonical()
    else:
        breaks = np.union1d(lo.breaks, hi.breaks)
        lower = StepQuantile(breaks, lower_vals).canonical()
        upper = StepQuantile(breaks, upper_vals).canonical()
    return OptimalOrderedPair(lower, upper, math.sqrt(dist2))


def minimal_trim_for_order(qF: StepQuantile, qG: StepQuantile, tol: float = 1e-6) -> TrimSolution:
    """Smallest pi whose trimmed pair has zero distance to the order cone.

    Bisection on [0, 1); the distance is nonincreasing in pi.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    d0 = trimmed_order_distance(qF, qG, 0.0)
    if d0 <= ZERO_DISTANCE:
        return TrimSolution(0.0, True, tol, d0)
    top = 1.0 - tol
    d_top = trimmed_order_distance(qF, qG, top)
    if d_top > ZERO_DISTANCE:
        return TrimSolution(top, False, tol, d_top)
    lo, hi = 0.0, top
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if trimmed_order_distance(qF, qG, mid) <= ZERO_DISTANCE:
            hi = mid
        else:
            lo = mid
    return TrimSolution(hi, True, tol, trimmed_order_distance(qF, qG, hi))


def l1_comparator_index(qF: StepQuantile, qG: StepQuantile) -> float:
    """L1 analogue of the violation index.

    Equals ``int_{F<G} (G - F) dx / ||F - G||_1``, computed in quantile
    coordinates as ``int (qF - qG)_+ / int |qF - qG|``.
    """
    pos, neg = l1_part_integrals(qF, qG)
    if pos + neg == 0.0:
        raise ValueError("index undefined for identical distributions")
    return pos / (pos + neg)
