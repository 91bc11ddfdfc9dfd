"""Kernel dispatch: compiled Cython core if importable, NumPy otherwise.

Set ``QDARWIN_PURE_PYTHON=1`` to force the fallback. ``BACKEND`` names the
implementation actually in use.
"""
import os

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("QDARWIN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

qubit_conditional_entropies = _impl.qubit_conditional_entropies
masked_products = _impl.masked_products
branch_mutual_information = _impl.branch_mutual_information

__all__ = [
    "BACKEND",
    "branch_mutual_information",
    "compiled_backend",
    "masked_products",
    "python_backend",
    "qubit_conditional_entropies",
]
