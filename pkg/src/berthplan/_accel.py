"""Kernel compilation switch.

Hot loops (RK4 rollout, MMG force evaluation, polygon penetration) are written
in a numba-compatible subset of Python. When numba is importable and
``BERTHPLAN_DISABLE_NUMBA`` is unset (or ``0``), they are compiled with
``numba.njit``; otherwise the very same functions run under the interpreter
on numpy arrays.
"""
import os

_FLAG = os.environ.get("BERTHPLAN_DISABLE_NUMBA", "0").strip().lower()
NUMBA_DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba ships with the dev environment
    _numba = None

USE_NUMBA = _numba is not None and not NUMBA_DISABLED


def jit(fn):
    """Compile ``fn`` in nopython mode, or return it untouched in fallback mode."""
    if USE_NUMBA:
        return _numba.njit(cache=True, nogil=True)(fn)
    return fn


def python_impl(fn):
    """Return the interpreted implementation behind a (possibly) jitted kernel."""
    return getattr(fn, "py_func", fn)


def backend_name():
    return "numba" if USE_NUMBA else "python"
