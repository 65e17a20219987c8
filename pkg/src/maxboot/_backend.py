"""Import-time selection of the replicate-reduction kernels.

The compiled core fuses the empirical-bootstrap gather with the column-sum
reduction and beats the NumPy path 2-4x there (see benchmarks/), so it is
used whenever it imported.  The wild reduction is one BLAS matvec per
replicate, which the naive compiled loop cannot beat at experiment sizes,
so that path stays on NumPy by default.

Environment overrides: MAXBOOT_FORCE_PY=1 selects the NumPy fallback for
everything; MAXBOOT_FORCE_EXT=1 selects the compiled core for everything.
"""

from __future__ import annotations

import os

from maxboot import _kernels

try:
    from maxboot import _core
except ImportError:
    _core = None

if os.environ.get("MAXBOOT_FORCE_PY") or _core is None:
    _wild_impl = _resample_impl = _kernels
elif os.environ.get("MAXBOOT_FORCE_EXT"):
    _wild_impl = _resample_impl = _core
else:
    _wild_impl = _kernels
    _resample_impl = _core

wild_max_reduce = _wild_impl.wild_max_reduce
resample_max_reduce = _resample_impl.resample_max_reduce


def backend_name() -> str:
    """Which implementation backs each kernel, e.g. 'wild=numpy,resample=ext'."""

    def tag(mod) -> str:
        return "ext" if mod.__name__.endswith("_core") else "numpy"

    return f"wild={tag(_wild_impl)},resample={tag(_resample_impl)}"
