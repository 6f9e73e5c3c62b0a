"""Backend selection for the hot kernels.

Numba is used when it imports cleanly and ``MOMENTS3D_DISABLE_NUMBA`` is not
set to a truthy value.  Every kernel has a pure-numpy twin, so the package
works (more slowly) without numba installed.
"""

from __future__ import annotations

import os

_FALSY = {"", "0", "false", "no", "off"}


def _numba_requested() -> bool:
    return os.environ.get("MOMENTS3D_DISABLE_NUMBA", "").strip().lower() in _FALSY


try:
    import numba as _numba
except ImportError:  # pragma: no cover - exercised only without numba
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and _numba_requested()


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, otherwise identity.

    The decorated function is always compiled lazily by numba; whether it is
    *dispatched to* is decided separately through :data:`USE_NUMBA`.
    """
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
