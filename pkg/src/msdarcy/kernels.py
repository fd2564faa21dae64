"""Kernel backend selection.

The compiled extension (`msdarcy._kernels_cy`, built with
``python setup.py build_ext --inplace``) is preferred when importable; the
numpy implementation is the always-available fallback. Override with the
environment variable MSDARCY_KERNELS=python|compiled|auto (default auto).
Both backends implement identical signatures and are cross-checked by the
test suite; results agree to rounding.
"""

from __future__ import annotations

import os

from . import _kernels_np

_choice = os.environ.get("MSDARCY_KERNELS", "auto").lower()
if _choice not in {"auto", "python", "compiled"}:
    raise ImportError(f"MSDARCY_KERNELS must be auto, python or compiled, not {_choice!r}")

_compiled = None
if _choice in {"auto", "compiled"}:
    try:
        from . import _kernels_cy as _compiled
    except ImportError:
        _compiled = None
    if _choice == "compiled" and _compiled is None:
        raise ImportError(
            "MSDARCY_KERNELS=compiled but the extension is not built; "
            "run: python setup.py build_ext --inplace"
        )

_impl = _compiled if _compiled is not None else _kernels_np
BACKEND = _impl.BACKEND_NAME

max_signal_speed = _impl.max_signal_speed
hyperbolic_update = _impl.hyperbolic_update
source_update = _impl.source_update
parabolic_update = _impl.parabolic_update


def available_backends() -> dict:
    """Name -> module for every importable backend (used by tests and benchmarks)."""
    out = {"python": _kernels_np}
    if _compiled is not None:
        out["compiled"] = _compiled
    else:
        try:
            from . import _kernels_cy

            out["compiled"] = _kernels_cy
        except ImportError:
            pass
    return out
