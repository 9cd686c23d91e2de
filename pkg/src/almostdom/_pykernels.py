"""Numpy implementations of the merged-grid kernels.

These are the reference versions; ``_ckernels`` must agree with them
bit-for-bit on the merge and to rounding on the sums.
"""
import numpy as np


def _merge(a, b):
    pts = np.union1d(a, b)
    ia = np.searchsorted(a, pts, side="left")
    ib = np.searchsorted(b, pts, side="left")
    return pts, ia.astype(np.int64), ib.astype(np.int64)


def merge_float(a, b):
    """Merge two breakpoint grids ending at 1.0.

    Returns piece indices into each grid and the merged piece lengths.
    """
    pts, ia, ib = _merge(np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64))
    w = np.diff(pts, prepend=0.0)
    return ia, ib, w


def merge_int(a, b, denom):
    """Merge two integer numerator grids sharing the denominator ``denom``."""
    pts, ia, ib = _merge(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
    w = np.diff(pts, prepend=0).astype(np.float64) / denom
    return ia, ib, w


def part_sums(va, vb, ia, ib, w, power=2):
    d = va[ia] - vb[ib]
    pos = np.maximum(d, 0.0)
    neg = np.maximum(-d, 0.0)
    if power == 2:
        return float(np.dot(w, pos * pos)), float(np.dot(w, neg * neg))
    return float(np.dot(w, pos)), float(np.dot(w, neg))


def batch_part_sums(VA, VB, ia, ib, w):
    d = VA[:, ia] - VB[:, ib]
    pos = np.maximum(d, 0.0)
    neg = np.maximum(-d, 0.0)
    return (pos * pos) @ w, (neg * neg) @ w
