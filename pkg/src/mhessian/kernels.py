"""Backend selection for the elementary symmetric function kernels.

The compiled extension is used when it has been built; otherwise, or when
``MHESSIAN_PURE_PYTHON`` is set to a non-empty value other than ``0``, the
numpy implementation is used.
"""
import os

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_force_py = os.environ.get("MHESSIAN_PURE_PYTHON", "") not in ("", "0")
_active = _kernels_py if (_compiled is None or _force_py) else _compiled
BACKEND = "python" if _active is _kernels_py else "cython"


def esp(lam):
    """Elementary symmetric polynomials of each row; shape ``(K, n+1)``."""
    return _active.esp(np.ascontiguousarray(lam, dtype=np.float64))


def deleted_esp(lam):
    """``out[k, i, p] = S_p`` of row ``k`` with entry ``i`` removed."""
    return _active.deleted_esp(np.ascontiguousarray(lam, dtype=np.float64))


def backends():
    """Return ``{name: module}`` for every importable backend."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
