"""Counter-based random substreams.

A substream is addressed by a tuple of nonnegative integers such as
``(master_seed, replication, role)``; the same address always yields the
same Philox stream regardless of the order in which streams are created.
"""
from __future__ import annotations

import numpy as np


def _key(seed) -> list[int]:
    if isinstance(seed, (int, np.integer)):
        return [int(seed)]
    return [int(s) for s in seed]


def substream(seed, *index) -> np.random.Generator:
    """Generator for the address ``(*seed, *index)``."""
    key = _key(seed) + [int(i) for i in index]
    if any(k < 0 for k in key):
        raise ValueError("substream keys must be nonnegative")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))
