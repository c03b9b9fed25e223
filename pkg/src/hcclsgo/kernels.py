"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback is used when the
extension is missing or ``HCCLSGO_PURE_PYTHON`` is set to a true value.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("HCCLSGO_PURE_PYTHON", "").lower() not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

t_osz = _impl.t_osz
t_asy = _impl.t_asy
base_eval = _impl.base_eval
composite_eval = _impl.composite_eval

SCHWEFEL = _pykernels.SCHWEFEL
ELLIPTIC = _pykernels.ELLIPTIC
RASTRIGIN = _pykernels.RASTRIGIN
ACKLEY = _pykernels.ACKLEY
