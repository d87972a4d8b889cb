"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``FRACFLOW_PURE_PYTHON=1`` to force the numpy fallback.
"""

from __future__ import annotations

import os

from fracflow import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("FRACFLOW_PURE_PYTHON") != "1":
    try:
        from fracflow import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

history_sum = _impl.history_sum
coo_to_csr = _impl.coo_to_csr
gather_rowdot = _impl.gather_rowdot

__all__ = ["BACKEND", "history_sum", "coo_to_csr", "gather_rowdot"]
