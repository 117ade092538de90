"""Optional numba acceleration.

Set ``ROTPATCH_NUMBA=0`` to force the pure-numpy code paths. ``ROTPATCH_THREADS``
caps the numba worker pool.
"""
from __future__ import annotations

import os

_FALSE = {"0", "false", "no", "off"}


def _wants_numba() -> bool:
    return os.environ.get("ROTPATCH_NUMBA", "1").strip().lower() not in _FALSE


try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f

    prange = range

USE_NUMBA = HAVE_NUMBA and _wants_numba()


def set_threads(n: int | None) -> int:
    """Cap the numba thread pool; returns the count in effect (1 without numba)."""
    if not HAVE_NUMBA:
        return 1
    if n is None:
        env = os.environ.get("ROTPATCH_THREADS")
        if not env:
            return numba.get_num_threads()
        n = int(env)
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n
