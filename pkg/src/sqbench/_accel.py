"""Numba switch.

Hot kernels are written twice: a loop form compiled with ``numba.njit`` and a
vectorised numpy form. ``SQBENCH_DISABLE_NUMBA=1`` (or numba not being
importable) selects the numpy forms everywhere.
"""
import os

_DISABLED = os.environ.get("SQBENCH_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    import numba
    HAS_NUMBA = True
except ImportError:
    numba = None
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA


def njit(func=None, **options):
    """``numba.njit(cache=True)`` when numba is active, otherwise identity."""
    options.setdefault("cache", True)

    def wrap(f):
        if not HAS_NUMBA:
            return f
        return numba.njit(**options)(f)

    if func is not None:
        return wrap(func)
    return wrap


def backend():
    return "numba" if USE_NUMBA else "numpy"
