"""Backend selection for the stencil kernels.

The compiled extension is used when it imports; ``STRATLAB_KERNELS=python``
forces the numpy fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("STRATLAB_KERNELS", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def gradient_pair(u, pk, pj, coef, shape, h, n1):
    return _impl.gradient_pair(u, pk, pj, coef, shape, h, n1)


def gradient_pair_T(v, pk, pj, coef, shape, h):
    return _impl.gradient_pair_T(v, pk, pj, coef, shape, h)


def backends():
    """Map of available backend name -> kernel module."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels as _compiled
    except ImportError:
        return found
    found["cython"] = _compiled
    return found
