"""Select the compiled kernels when built, else the pure-Python ones.

Set ``SDHKB_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
attach_draws = _kernels_py.attach_draws
uncoverage_by_size = _kernels_py.uncoverage_by_size

if os.environ.get("SDHKB_BACKEND", "").lower() != "python":
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        attach_draws = _kernels.attach_draws
        uncoverage_by_size = _kernels.uncoverage_by_size


def get_backend(name: str | None = None):
    """Return a namespace exposing the kernels of ``name`` (default: active one)."""
    name = name or BACKEND
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels  # type: ignore[attr-defined]

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
