"""Backend selection for the grid kernels.

The compiled extension is used when it imports; otherwise the numpy
implementations are used. Setting ``AVPREC_PURE_PYTHON=1`` forces the numpy
backend. ``BACKEND`` names the active one.
"""

import os

from . import _pykernels

_force_py = os.environ.get("AVPREC_PURE_PYTHON", "").strip() not in ("", "0")

try:
    if _force_py:
        raise ImportError("pure-python backend requested")
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

apply_stencil = _impl.apply_stencil
restrict = _impl.restrict
prolong = _impl.prolong


def available_backends():
    """Map of backend name to kernel module, for benchmarks and cross-checks."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
