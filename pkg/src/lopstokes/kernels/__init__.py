"""Backend dispatch for the hot per-point kernels.

Two interchangeable implementations exist: a numba-compiled one (default when
numba imports) and a pure-numpy one.  Selection:

    LOPSTOKES_BACKEND=numba   force numba (error if unavailable)
    LOPSTOKES_BACKEND=numpy   force the vectorized numpy path
    unset                     numba if available, else numpy

Per run, results are deterministic and independent of thread count; across
backends they agree to rounding (~1e-15 relative), not bitwise.
"""

import os

from . import numpy_backend
from . import numba_backend

__all__ = ["get_backend", "backend_name", "set_threads", "available_backends"]

_CACHE: dict[str, object] = {}


def _resolve(flag: str):
    if flag == "numpy":
        return numpy_backend
    if flag == "numba":
        if not numba_backend.AVAILABLE:
            raise RuntimeError("LOPSTOKES_BACKEND=numba but numba is not importable")
        return numba_backend
    if flag == "":
        return numba_backend if numba_backend.AVAILABLE else numpy_backend
    raise RuntimeError(f"LOPSTOKES_BACKEND must be 'numba' or 'numpy', got {flag!r}")


def get_backend():
    """Module implementing the batch kernels, honoring LOPSTOKES_BACKEND."""
    flag = os.environ.get("LOPSTOKES_BACKEND", "").strip().lower()
    mod = _CACHE.get(flag)
    if mod is None:
        mod = _resolve(flag)
        _CACHE[flag] = mod
    return mod


def backend_name() -> str:
    return get_backend().NAME


def available_backends() -> tuple[str, ...]:
    names = ["numpy"]
    if numba_backend.AVAILABLE:
        names.append("numba")
    return tuple(names)


def set_threads(n: int) -> None:
    numba_backend.set_threads(n)
