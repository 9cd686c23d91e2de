"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it was built; otherwise
the numpy versions in ``_pykernels`` are used. Setting the environment
variable ``ALMOSTDOM_PURE=1`` forces the numpy backend.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("ALMOSTDOM_PURE"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:  # extension not built
        pass

merge_float = _impl.merge_float
merge_int = _impl.merge_int
part_sums = _impl.part_sums
batch_part_sums = _impl.batch_part_sums

__all__ = ["BACKEND", "merge_float", "merge_int", "part_sums", "batch_part_sums"]
