"""Optional numba acceleration.

Set ``CCMAXCOV_DISABLE_NUMBA=1`` to force the pure-numpy kernels even when
numba is importable. The flag is read once at import time.
"""

import os


def _noop_jit(*args, **kwargs):
    """Decorator that returns the function unchanged."""
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(f):
        return f

    return wrap


def _have_numba():
    try:
        import numba  # noqa: F401

        return True
    except ImportError:
        return False


HAVE_NUMBA = _have_numba()

_FLAG = os.environ.get("CCMAXCOV_DISABLE_NUMBA", "").strip().lower()
NUMBA_DISABLED_BY_ENV = _FLAG not in ("", "0", "false", "no")

# True if the numba kernels are the active backend
USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED_BY_ENV

if HAVE_NUMBA:
    from numba import njit
else:
    njit = _noop_jit
