"""Numba switch shared by every hot kernel.

Each kernel exists twice: an ``@njit`` loop version and a vectorised numpy
version.  The numba path is used when numba imports and the environment
variable ``LINDBLAD_LIGHTCONE_DISABLE_JIT`` is unset (or falsy).  Both paths
stay importable so tests and the benchmark can compare them directly.
"""

from __future__ import annotations

import os

DISABLE_JIT_ENV = "LINDBLAD_LIGHTCONE_DISABLE_JIT"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def jit_disabled() -> bool:
    return os.environ.get(DISABLE_JIT_ENV, "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = HAVE_NUMBA and not jit_disabled()


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def select(numba_impl, numpy_impl):
    return numba_impl if USE_NUMBA else numpy_impl


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
