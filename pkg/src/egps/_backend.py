"""Pick the compiled kernels when they are built, else the numpy fallback.

Set ``EGPS_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

if os.environ.get("EGPS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

thomas = _impl.thomas
tridiag_matvec = _impl.tridiag_matvec
stencil_apply = _impl.stencil_apply
