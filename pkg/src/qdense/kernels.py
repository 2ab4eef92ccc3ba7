"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback takes over. Set QDENSE_KERNELS=python or QDENSE_KERNELS=compiled
to force a backend (forcing "compiled" raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import _pykernels

_choice = os.environ.get("QDENSE_KERNELS", "auto").strip().lower()

if _choice in ("auto", ""):
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pykernels
elif _choice in ("compiled", "c", "ext"):
    from . import _ckernels as _impl  # type: ignore[attr-defined]
elif _choice in ("python", "py", "numpy"):
    _impl = _pykernels
else:
    raise ImportError(f"unrecognized QDENSE_KERNELS value: {_choice!r}")

BACKEND: str = "python" if _impl is _pykernels else "compiled"

kron_vec = _impl.kron_vec
vdot = _impl.vdot
apply_matrix = _impl.apply_matrix
register_probs = _impl.register_probs
collapse_register = _impl.collapse_register
best_overlap = _impl.best_overlap
