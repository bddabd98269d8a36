"""Backend selection for the hot loops.

The compiled extension is used when importable; set ``TZEFF_PURE_PYTHON=1``
to force the reference implementation.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("TZEFF_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _kernels_py

fill_u64 = _impl.fill_u64
fill_uniform = _impl.fill_uniform
fill_normal = _impl.fill_normal
ar1_filter = _impl.ar1_filter
bartlett_lrv = _impl.bartlett_lrv

__all__ = [
    "BACKEND",
    "fill_u64",
    "fill_uniform",
    "fill_normal",
    "ar1_filter",
    "bartlett_lrv",
]
