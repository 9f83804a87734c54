"""Select the kernel implementation at import time.

The compiled ``_ckernels`` extension is used when it is importable; set
``LIQHORIZON_BACKEND=python`` to force the numpy fallback.
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

AVAILABLE = {"python": _pykernels}
if _ckernels is not None:
    AVAILABLE["cython"] = _ckernels

_requested = os.environ.get("LIQHORIZON_BACKEND", "").strip().lower()
if _requested and _requested not in ("python", "cython"):
    raise ImportError(f"LIQHORIZON_BACKEND must be 'python' or 'cython', got {_requested!r}")
if _requested == "cython" and _ckernels is None:
    raise ImportError("LIQHORIZON_BACKEND=cython but the compiled extension is not built")

NAME = _requested or ("cython" if _ckernels is not None else "python")
kernels = AVAILABLE[NAME]


def get_kernels(name=None):
    """Kernel module by name; ``None`` means the one selected at import."""
    if name is None:
        return kernels
    try:
        return AVAILABLE[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {sorted(AVAILABLE)}") from None
