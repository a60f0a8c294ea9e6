"""Kernel backend selection.

The compiled extension is preferred when importable; set ADVPED_BACKEND to
"numpy" or "cython" to force a choice (forcing cython raises if the extension
is missing, instead of silently falling back).
"""
from __future__ import annotations

import os

from . import kernels_numpy


def _select():
    choice = os.environ.get("ADVPED_BACKEND", "").strip().lower()
    if choice not in ("", "numpy", "cython"):
        raise ValueError(f"unknown ADVPED_BACKEND value: {choice!r}")
    if choice == "numpy":
        return kernels_numpy, "numpy"
    try:
        from . import _kernels
    except ImportError:
        if choice == "cython":
            raise ImportError(
                "ADVPED_BACKEND=cython but the compiled extension is not "
                "available; reinstall with a working C toolchain")
        return kernels_numpy, "numpy"
    return _kernels, "cython"


kernels, BACKEND_NAME = _select()

OUT_LINEAR = kernels_numpy.OUT_LINEAR
OUT_TANH = kernels_numpy.OUT_TANH


def get_backend(name: str | None = None):
    """Return (kernels module, name); name=None gives the import-time pick."""
    if name is None:
        return kernels, BACKEND_NAME
    if name == "numpy":
        return kernels_numpy, "numpy"
    if name == "cython":
        from . import _kernels
        return _kernels, "cython"
    raise ValueError(f"unknown backend: {name!r}")
