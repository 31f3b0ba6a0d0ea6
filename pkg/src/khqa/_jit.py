"""Optional numba acceleration.

Set ``KHQA_DISABLE_NUMBA=1`` to force the pure-numpy code paths, e.g. when
debugging or on platforms without an LLVM toolchain.
"""
import os

_DISABLED = os.environ.get("KHQA_DISABLE_NUMBA", "0").lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit
    HAVE_NUMBA = True
except ImportError:
    _njit = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise a no-op decorator."""
    if HAVE_NUMBA:
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def numba_enabled():
    return HAVE_NUMBA
