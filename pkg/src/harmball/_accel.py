"""Optional numba acceleration.

Hot assembly loops are written twice: an ``@njit`` kernel and a vectorized
numpy fallback. The numba path is used when numba imports and the
environment variable ``HARMBALL_DISABLE_NUMBA`` is unset (or ``0``).
"""

import os
import warnings

_FLAG = "HARMBALL_DISABLE_NUMBA"


def _env_disabled():
    return os.environ.get(_FLAG, "0").strip().lower() not in ("", "0", "false", "no")


try:
    import numba  # noqa: F401
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


class PerformanceWarning(UserWarning):
    """Raised once when numba was requested but is unavailable."""


def use_numba():
    """Return True when kernels should dispatch to the numba path.

    Re-read on every call so tests can toggle the flag with ``monkeypatch``.
    """
    if _env_disabled():
        return False
    if not HAS_NUMBA:  # pragma: no cover
        warnings.warn("numba is not available; using numpy kernels", PerformanceWarning, stacklevel=2)
        return False
    return True
