"""Selection between the numba-compiled kernels and their numpy fallbacks.

Set ``IRQFT_DISABLE_NUMBA=1`` in the environment before import to force the
pure-numpy implementations.  The flag is read once at import time.
"""

import os

_FLAG = os.environ.get("IRQFT_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and _FLAG not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    return numba.njit(*args, **kwargs)


def set_threads(n):
    """Bound the number of threads used by parallel numba kernels."""
    if numba is not None and n:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
