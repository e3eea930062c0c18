"""Hot-kernel backend selection.

The compiled extension is preferred when importable; the NumPy fallback is
functionally identical (and bit-identical for the stump/coordinate scans).
Set ROBUSTBOOST_BACKEND=numpy|cython to force a backend; "cython" raises
if the extension is unavailable.
"""

from __future__ import annotations

import os

from . import _kernels_py

_requested = os.environ.get("ROBUSTBOOST_BACKEND", "auto").lower()

if _requested not in ("auto", "numpy", "cython"):
    raise ValueError(
        f"ROBUSTBOOST_BACKEND must be auto, numpy or cython, got {_requested!r}"
    )

if _requested == "numpy":
    _impl = _kernels_py
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "cython":
            raise
        _impl = _kernels_py

signed_coordinate_scan = _impl.signed_coordinate_scan
stump_scan = _impl.stump_scan
step_residuals = _impl.step_residuals


def backend_name() -> str:
    return _impl.NAME


def available_backends() -> dict[str, object]:
    """Importable kernel modules by name (used by the benchmark suite)."""
    out = {"numpy": _kernels_py}
    try:
        from . import _kernels_cy

        out["cython"] = _kernels_cy
    except ImportError:
        pass
    return out
