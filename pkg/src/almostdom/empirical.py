"""Step quantile functions and exact integration of their functionals.

A :class:`StepQuantile` is a nondecreasing, left-continuous, piecewise
constant function on (0, 1]. Piece ``i`` covers ``(breaks[i-1], breaks[i]]``
with ``breaks[-1] == 1``. Empirical quantiles additionally remember their
breakpoints as integer numerators over a common denominator so that two
empirical grids can be merged without floating-point collisions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import kernels

KERNELS = {
    "squared-difference": "squared",
    "squared": "squared",
    "positive-part-squared": "positive",
    "positive": "positive",
    "negative-part-squared": "negative",
    "negative": "negative",
}


def as_sample(values) -> np.ndarray:
    """Validate a sample and return it as a 1-d float array."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("empty sample")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sample contains non-finite values")
    return arr


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StepQuantile:
    """Piecewise constant quantile function.

    Parameters
    ----------
    breaks : array-like
        Strictly increasing right endpoints of the pieces, the last one 1.
    values : array-like
        Nondecreasing piece values, same length as ``breaks``.
    numer, denom : optional
        Exact representation ``breaks == numer / denom`` for rational grids.
    size : int, optional
        Sample size when the quantile is empirical.
    """

    breaks: np.ndarray
    values: np.ndarray
    numer: Optional[np.ndarray] = None
    denom: Optional[int] = None
    size: Optional[int] = None

    def __post_init__(self):
        b = _frozen(self.breaks, np.float64)
        v = _frozen(self.values, np.float64)
        object.__setattr__(self, "breaks", b)
        object.__setattr__(self, "values", v)
        if b.ndim != 1 or b.size == 0 or b.shape != v.shape:
            raise ValueError("breaks and values must be equal-length 1-d arrays")
        if b[-1] != 1.0 or b[0] <= 0.0 or np.any(np.diff(b) <= 0):
            raise ValueError("breaks must increase strictly from above 0 to exactly 1")
        if not np.all(np.isfinite(v)):
            raise ValueError("piece values must be finite")
        if np.any(np.diff(v) < 0):
            raise ValueError("piece values must be nondecreasing")
        if self.numer is not None:
            num = _frozen(self.numer, np.int64)
            object.__setattr__(self, "numer", num)
            if self.denom is None or num.shape != b.shape or num[-1] != self.denom:
                raise ValueError("numer must end at denom and match breaks")

    @classmethod
    def from_grid(cls, numer, denom, values, size=None) -> "StepQuantile":
        numer = np.asarray(numer, dtype=np.int64)
        return cls(numer / denom, values, numer=numer, denom=int(denom), size=size)

    @property
    def k(self) -> int:
        return self.values.size

    @property
    def exact(self) -> bool:
        return self.numer is not None

    def __call__(self, t):
        return evaluate(self, t)

    def canonical(self) -> "StepQuantile":
        """Merge adjacent pieces holding equal values."""
        v = self.values
        keep = np.ones(v.size, dtype=bool)
        keep[:-1] = v[:-1] != v[1:]
        if keep.all():
            return self
        if self.exact:
            return StepQuantile.from_grid(self.numer[keep], self.denom, v[keep], self.size)
        return StepQuantile(self.breaks[keep], v[keep], size=self.size)

    def affine(self, scale: float, shift: float = 0.0) -> "StepQuantile":
        """Quantile of ``scale * X + shift`` for ``scale > 0``."""
        if not scale > 0:
            raise ValueError("scale must be positive")
        return StepQuantile(self.breaks, scale * self.values + shift,
                            numer=self.numer, denom=self.denom, size=self.size)

    def lower_edges(self) -> np.ndarray:
        return np.concatenate(([0.0], self.breaks[:-1]))

    def pieces(self) -> list[tuple[float, float, float]]:
        """List of ``(left, right, value)`` triples."""
        return [(float(l), float(r), float(v))
                for l, r, v in zip(self.lower_edges(), self.breaks, self.values)]

    def same_function(self, other: "StepQuantile") -> bool:
        pos, neg = _parts(self, other, power=1)
        return pos == 0.0 and neg == 0.0

    def to_dict(self) -> dict:
        return {"breaks": self.breaks.tolist(), "values": self.values.tolist()}


def empirical_quantile(sample, canonical: bool = True) -> StepQuantile:
    """Exact empirical quantile of a sample.

    Piece ``((i-1)/n, i/n]`` holds the ``i``-th order statistic. With
    ``canonical=True`` repeated order statistics are merged into one piece.

    >>> empirical_quantile([3, 1, 2]).values.tolist()
    [1.0, 2.0, 3.0]
    """
    x = np.sort(as_sample(sample))
    n = x.size
    q = StepQuantile.from_grid(np.arange(1, n + 1), n, x, size=n)
    return q.canonical() if canonical else q


def evaluate(q: StepQuantile, t):
    """Evaluate ``q`` at ``t`` in (0, 1] (scalar or array)."""
    ta = np.asarray(t, dtype=np.float64)
    if np.any(~(ta > 0.0)) or np.any(ta > 1.0):
        raise ValueError("quantile argument must lie in (0, 1]")
    idx = np.searchsorted(q.breaks, ta, side="left")
    out = q.values[idx]
    return float(out) if out.ndim == 0 else out


def _merge_exact(na, da, nb, db):
    lcm = da * db // math.gcd(da, db)
    return kernels.merge_int(na * (lcm // da), nb * (lcm // db), lcm)


def _lcm_fits(d1, d2) -> bool:
    return d1 // math.gcd(d1, d2) * d2 < 2 ** 62


def merged_grid(q1: StepQuantile, q2: StepQuantile):
    """Piece indices into ``q1`` and ``q2`` and lengths of the merged grid."""
    if q1.exact and q2.exact and _lcm_fits(q1.denom, q2.denom):
        return _merge_exact(q1.numer, q1.denom, q2.numer, q2.denom)
    return kernels.merge_float(q1.breaks, q2.breaks)


@lru_cache(maxsize=64)
def sample_grid(n: int, m: int):
    """Merged grid of two uncanonicalized empirical quantiles of sizes n, m.

    Cached since bootstrap and simulation loops reuse it for every draw.
    """
    ia, ib, w = _merge_exact(np.arange(1, n + 1, dtype=np.int64), n,
                             np.arange(1, m + 1, dtype=np.int64), m)
    for a in (ia, ib, w):
        a.setflags(write=False)
    return ia, ib, w


def _parts(q1, q2, power=2):
    ia, ib, w = merged_grid(q1, q2)
    return kernels.part_sums(q1.values, q2.values, ia, ib, w, power)


def part_integrals(q1: StepQuantile, q2: StepQuantile) -> tuple[float, float]:
    """Exact ``(int (q1-q2)_+^2, int (q1-q2)_-^2)`` over (0, 1)."""
    return _parts(q1, q2, power=2)


def integrate_piecewise(q1: StepQuantile, q2: StepQuantile, kernel: str) -> float:
    """Exact integral of ``kernel(q1(t) - q2(t))`` over (0, 1).

    ``kernel`` is one of ``squared-difference``, ``positive-part-squared``
    or ``negative-part-squared``.
    """
    try:
        name = KERNELS[kernel]
    except KeyError:
        raise ValueError(f"unknown kernel {kernel!r}") from None
    pos, neg = part_integrals(q1, q2)
    if name == "positive":
        return pos
    if name == "negative":
        return neg
    return pos + neg



def l1_part_integrals(q1: StepQuantile, q2: StepQuantile) -> tuple[float, float]:
    """Exact ``(int (q1-q2)_+, int (q1-q2)_-)`` over (0, 1)."""
    return _parts(q1, q2, power=1)
