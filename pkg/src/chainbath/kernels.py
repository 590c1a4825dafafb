"""Kernel backend selection: compiled extension with pure-numpy fallback.

The compiled module is optional; set CHAINBATH_PURE=1 to force the
numpy implementation even when the extension is built.
"""

from __future__ import annotations

import os

from . import _core_py

if os.environ.get("CHAINBATH_PURE", "") not in ("", "0"):
    _impl = _core_py
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _core_py
        BACKEND = "python"

window_tables = _impl.window_tables

__all__ = ["window_tables", "BACKEND"]
