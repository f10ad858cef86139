"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise
the numpy fallback in ``_pykernels`` is used. Setting the environment
variable ``SPCANET_BACKEND`` to ``python`` forces the fallback, and
``cython`` makes a missing extension an import error.
"""
import os

from . import _pykernels

_choice = os.environ.get("SPCANET_BACKEND", "auto").lower()

if _choice == "python":
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:
        if _choice == "cython":
            raise
        kernels = _pykernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
