"""Numba switch.

Hot kernels exist twice: an ``@njit`` loop version and a vectorised numpy
version.  Which one the public dispatchers use is decided once, at import,
from the ``FDNET_DISABLE_NUMBA`` environment variable (``1``/``true``/``yes``
forces the numpy path).  Both versions stay importable so they can be
benchmarked and cross-checked against each other.
"""

import os

ENV_FLAG = "FDNET_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def numba_requested():
    return os.environ.get(ENV_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


USE_NUMBA = HAVE_NUMBA and numba_requested()


def njit(func):
    """Compile ``func`` in nopython mode when numba is installed.

    Compilation is independent of ``USE_NUMBA`` so the jitted variant can
    always be benchmarked; the flag only affects dispatch.
    """
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, fastmath=False)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
