"""Residual kernel dispatch.

Prefers the compiled extension when it imported cleanly, otherwise falls back
to the vectorized numpy twin.  Set MEMSQ_KERNEL=numpy or MEMSQ_KERNEL=cython
to force a backend; forcing cython raises if the extension is unavailable.
"""

from __future__ import annotations

import os

_requested = os.environ.get("MEMSQ_KERNEL", "").strip().lower()

if _requested in ("", "cython", "compiled"):
    try:
        from . import _residual as _impl

        BACKEND = "cython"
    except ImportError:
        if _requested:
            raise
        from . import numpy_impl as _impl

        BACKEND = "numpy"
elif _requested == "numpy":
    from . import numpy_impl as _impl

    BACKEND = "numpy"
else:
    raise ImportError(
        f"MEMSQ_KERNEL={_requested!r} not recognized; use 'numpy' or 'cython'"
    )

residual = _impl.residual
simpson_weighted = _impl.simpson_weighted

__all__ = ["BACKEND", "residual", "simpson_weighted"]
