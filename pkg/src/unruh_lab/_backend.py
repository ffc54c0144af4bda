"""Kernel backend selection.

Hot loops are written once as scalar, numba-compatible Python and compiled
with ``numba.njit`` unless ``UNRUH_LAB_BACKEND=numpy`` is set (or numba is
missing), in which case the vectorised numpy implementations are used.
The choice is made at import time.
"""
import os

BACKEND_ENV = "UNRUH_LAB_BACKEND"
THREADS_ENV = "UNRUH_LAB_THREADS"

try:
    import numba

    HAVE_NUMBA = True
    prange = numba.prange
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False
    prange = range


def _requested_backend():
    name = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {name!r}")
    return name


USE_NUMBA = HAVE_NUMBA and _requested_backend() == "numba"
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise.

    The scalar kernels are always compiled if numba exists, so the numba
    path can be benchmarked against numpy in the same process.
    """
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)


def set_threads(n):
    """Set the numba thread pool size; no-op on the numpy backend."""
    if n is None:
        env = os.environ.get(THREADS_ENV)
        n = int(env) if env else None
    if n is None or not HAVE_NUMBA:
        return
    if n < 1:
        raise ValueError("thread count must be >= 1")
    numba.set_num_threads(min(int(n), numba.config.NUMBA_NUM_THREADS))
