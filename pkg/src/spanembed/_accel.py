"""JIT switch for the numeric kernels.

Set ``SPANEMBED_DISABLE_JIT=1`` to run every kernel through its pure
numpy / interpreted path instead of numba. Useful for debugging and for
environments without numba.
"""

from __future__ import annotations

import os
import warnings


def _jit_requested() -> bool:
    return os.environ.get("SPANEMBED_DISABLE_JIT", "").strip().lower() in ("", "0", "false", "no")


_DISABLE = not _jit_requested()

try:
    from numba import njit as _numba_njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False
    if not _DISABLE:
        warnings.warn("numba could not be imported; falling back to numpy kernels")

JIT_ENABLED = HAVE_NUMBA and not _DISABLE


def njit(*args, **kwargs):
    """``numba.njit`` when the JIT is on, identity decorator otherwise."""
    if JIT_ENABLED:
        return _numba_njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def decorator(func):
        return func

    return decorator


def backend() -> str:
    return "numba" if JIT_ENABLED else "numpy"
