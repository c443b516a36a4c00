"""Numba availability switch.

Set ``DEFZEROS_DISABLE_NUMBA=1`` before importing :mod:`defzeros` to force the
pure-numpy code paths (useful for debugging and for the kernel benchmark).
"""
import os

_FLAG = os.environ.get("DEFZEROS_DISABLE_NUMBA", "").strip().lower()
DISABLED_BY_ENV = _FLAG in {"1", "true", "yes", "on"}

try:
    if DISABLED_BY_ENV:
        raise ImportError("numba disabled by DEFZEROS_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


def backend():
    """Return ``"numba"`` or ``"numpy"``."""
    return "numba" if HAVE_NUMBA else "numpy"
