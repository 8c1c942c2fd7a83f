"""Optional numba acceleration.

Set ``PUSHSAFE_DISABLE_NUMBA=1`` to run every kernel as plain Python/numpy.
The flag is read once at import time.
"""
import os

_FLAG = os.environ.get("PUSHSAFE_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG in {"1", "true", "yes", "on"}

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and not DISABLED


def kernel(fn):
    """Compile ``fn`` with ``numba.njit`` when acceleration is enabled."""
    if USE_NUMBA:
        return numba.njit(cache=True, fastmath=False)(fn)
    return fn


def python_impl(fn):
    """Return the uncompiled body of a kernel (itself when not compiled)."""
    return getattr(fn, "py_func", fn)
