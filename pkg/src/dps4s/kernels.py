"""Kernel dispatch: compiled extension when importable, pure Python otherwise.

Set ``DPS4S_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("DPS4S_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

triangles = _impl.triangles
path2 = _impl.path2
path3 = _impl.path3
rectangles = _impl.rectangles
fanout2 = _impl.fanout2

__all__ = ["BACKEND", "triangles", "path2", "path3", "rectangles", "fanout2"]
