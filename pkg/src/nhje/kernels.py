"""Kernel backend selection.

The compiled ``_ckernels`` extension is used when importable; otherwise the
pure-Python ``_pykernels`` module. Setting ``NHJE_PURE_PYTHON=1`` forces the
fallback. ``BACKEND`` names the active module.
"""

import os

from . import _pykernels

if os.environ.get("NHJE_PURE_PYTHON") == "1":
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

ordered_products = _impl.ordered_products
lindblad_rk4 = _impl.lindblad_rk4
BACKEND = _impl.BACKEND

__all__ = ["ordered_products", "lindblad_rk4", "BACKEND", "get_backend"]


def get_backend(name: str):
    """Return the kernel module ``"python"`` or ``"cython"`` explicitly."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
