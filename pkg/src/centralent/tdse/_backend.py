"""Pick the pentadiagonal kernel implementation once, at import.

``CENTRALENT_BACKEND=python`` forces the pure-Python kernels; ``compiled``
makes a missing extension an import error instead of a silent fallback.
"""
from __future__ import annotations

import os
import warnings

_choice = os.environ.get("CENTRALENT_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "compiled", "python"):
    raise ImportError(f"CENTRALENT_BACKEND must be auto, compiled or python, not {_choice!r}")

kernels = None
BACKEND = "python"
if _choice != "python":
    try:
        from . import _penta as kernels  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError as exc:
        if _choice == "compiled":
            raise
        warnings.warn(
            f"compiled pentadiagonal kernels unavailable ({exc}); using the slow pure-Python path",
            RuntimeWarning,
            stacklevel=2,
        )
if kernels is None:
    from . import _penta_py as kernels

from . import _penta_py as python_kernels  # noqa: E402
