"""Optional numba acceleration.

Kernels are decorated with :func:`njit`.  Setting ``DIRACRED_NO_NUMBA=1``
(or running without numba installed) leaves them as plain numpy functions.
"""
from __future__ import annotations

import os

_DISABLED = os.environ.get("DIRACRED_NO_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError
    import numba as _numba
except ImportError:  # pragma: no cover - depends on the environment
    _numba = None

NUMBA_ENABLED = _numba is not None


def njit(fn=None, **kwargs):
    """``numba.njit(cache=True, ...)`` when available, identity otherwise."""
    if fn is None:
        return lambda f: njit(f, **kwargs)
    if _numba is None:
        return fn
    kwargs.setdefault("cache", True)
    return _numba.njit(**kwargs)(fn)
