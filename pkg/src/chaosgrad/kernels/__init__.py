"""Backend selection for the hot sweep kernels.

The compiled extension (``chaosgrad.kernels._ext``, built from Cython) and the
pure-numpy module (``chaosgrad.kernels.pure``) expose the same functions; the
compiled one is picked at import time when it built successfully. Setting the
environment variable ``CHAOSGRAD_PURE=1`` forces the pure backend, and
:func:`use_pure` toggles it per-block (used by the benchmark and the
cross-backend tests).
"""

from __future__ import annotations

import os
from contextlib import contextmanager

from . import pure

try:
    from . import _ext
except ImportError:  # extension not built; pure fallback carries the load
    _ext = None

_env_pure = os.environ.get("CHAOSGRAD_PURE", "") not in ("", "0")
_active = pure if (_ext is None or _env_pure) else _ext

BACKEND = "pure" if _active is pure else "compiled"


def compiled_available() -> bool:
    return _ext is not None


def impl():
    """Module implementing the kernel API for the currently active backend."""
    return _active


def backend_name() -> str:
    return "pure" if _active is pure else "compiled"


def get(name: str):
    """Fetch a backend module by name ('pure' or 'compiled')."""
    if name == "pure":
        return pure
    if name == "compiled":
        if _ext is None:
            raise RuntimeError("compiled kernel backend is not available")
        return _ext
    raise ValueError(f"unknown kernel backend {name!r}")


@contextmanager
def use_pure():
    """Temporarily run everything on the pure backend."""
    global _active
    saved = _active
    _active = pure
    try:
        yield
    finally:
        _active = saved
