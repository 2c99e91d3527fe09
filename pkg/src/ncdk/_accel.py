"""Numba switch.

Hot loops are compiled with numba unless ``NCDK_DISABLE_NUMBA`` is set to a
truthy value (or numba is missing), in which case callers use their
vectorised numpy paths instead.
"""

import os

_flag = os.environ.get("NCDK_DISABLE_NUMBA", "").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is often too old; skip probing it
        try:
            import numba.np.ufunc.omppool  # noqa: F401
            numba.config.THREADING_LAYER = "omp"
        except ImportError:  # pragma: no cover
            numba.config.THREADING_LAYER = "workqueue"
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _flag not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


prange = numba.prange if HAVE_NUMBA else range


def default_backend():
    return "numba" if USE_NUMBA else "numpy"


def set_threads(n):
    """Cap numba worker threads; ``None`` reads ``NCDK_THREADS``."""
    if n is None:
        env = os.environ.get("NCDK_THREADS")
        n = int(env) if env else None
    if n is None or not HAVE_NUMBA:
        return
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
