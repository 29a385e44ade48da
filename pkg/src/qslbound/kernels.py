"""Kernel dispatch.

The compiled extension is used when importable; set ``QSLBOUND_PURE=1`` to
force the pure-Python implementation.
"""

import os

from . import _fallback

BACKEND = "python"

if os.environ.get("QSLBOUND_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _fallback
else:
    _impl = _fallback

jacobi_eigh = _impl.jacobi_eigh
ordered_product = _impl.ordered_product

__all__ = ["BACKEND", "jacobi_eigh", "ordered_product"]
