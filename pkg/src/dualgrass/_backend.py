"""Kernel selection.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
numpy fallback. Set ``DUALGRASS_BACKEND=python`` to force the fallback.
"""
import os

import numpy as np

from . import _pykernels

_c = None
if os.environ.get("DUALGRASS_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels as _c
    except ImportError:
        _c = None

BACKEND = "cython" if _c is not None else "python"


def available_backends():
    return ("cython", "python") if _c is not None else ("python",)


def _impl(backend):
    if backend is None:
        backend = BACKEND
    if backend == "cython":
        if _c is None:
            raise RuntimeError("compiled kernels are not built")
        return _c
    if backend == "python":
        return _pykernels
    raise ValueError(f"unknown backend {backend!r}")


def expm_batch(A, backend=None):
    A = np.ascontiguousarray(A, dtype=np.complex128)
    return _impl(backend).expm_batch(A)


def ordered_product(F, renorm_every, split, backend=None):
    F = np.ascontiguousarray(F, dtype=np.complex128)
    return _impl(backend).ordered_product(F, int(renorm_every), int(split))
