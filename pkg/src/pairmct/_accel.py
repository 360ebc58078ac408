"""Backend selection for the hot resampling kernels.

Numba is used when it imports and ``PAIRMCT_DISABLE_NUMBA`` is unset (or "0").
Otherwise every kernel runs through the vectorised numpy implementation in
:mod:`pairmct._batched`.
"""

import os

_FLAG = "PAIRMCT_DISABLE_NUMBA"


def _numba_requested():
    return os.environ.get(_FLAG, "0").strip().lower() in ("", "0", "false", "no")


try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _numba_requested()


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def get_backend(name=None):
    """Return the kernel module for ``name`` ("numba" / "numpy"), or the active one."""
    name = name or backend_name()
    if name == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not installed")
        from . import _kernels

        return _kernels
    if name == "numpy":
        from . import _batched

        return _batched
    raise ValueError(f"unknown backend {name!r}")
