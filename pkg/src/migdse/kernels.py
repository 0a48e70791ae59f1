"""Kernel dispatch: compiled ``_ckernels`` when importable, else pure Python.

Set ``MIGDSE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("MIGDSE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py
else:
    _impl = _kernels_py

reachable = _impl.reachable
lut_map = _impl.lut_map

__all__ = ["BACKEND", "reachable", "lut_map"]
