"""Backend selection for the band kernels.

The compiled extension is preferred when importable; set
BANDCLT_PURE_PYTHON=1 to force the numpy fallback (used by the
benchmark and by tests that pin a backend).
"""

from __future__ import annotations

import os

from . import _bandops_py

if os.environ.get("BANDCLT_PURE_PYTHON"):
    ops = _bandops_py
    BACKEND = "python"
else:
    try:
        from . import _bandops as _compiled
    except ImportError:
        ops = _bandops_py
        BACKEND = "python"
    else:
        ops = _compiled
        BACKEND = "cython"

band_mul = ops.band_mul
band_diag_inner = ops.band_diag_inner
band_matvec = ops.band_matvec
