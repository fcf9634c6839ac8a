"""Pick the compiled kernels when available, the NumPy ones otherwise.

Set ``FOU_SHEET_PURE_PYTHON=1`` to force the fallback. Both backends give
bit-identical results, so the choice only affects speed.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
j0_series_dd = _kernels_py.j0_series_dd
causal_conv2d = _kernels_py.causal_conv2d

if os.environ.get("FOU_SHEET_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels_c
    except ImportError:  # extension not built
        _kernels_c = None
    else:
        BACKEND = "cython"
        j0_series_dd = _kernels_c.j0_series_dd
        causal_conv2d = _kernels_c.causal_conv2d
else:
    _kernels_c = None


def compiled_available() -> bool:
    return _kernels_c is not None
