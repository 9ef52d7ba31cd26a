"""Kernel backend selection.

The compiled extension is used when importable; setting the environment
variable ``NCTRIPLES_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("NCTRIPLES_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (``"cython"``, ``"python"``) or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")


def _prep(mul, inv, w):
    return (
        np.ascontiguousarray(mul, dtype=np.int64),
        np.ascontiguousarray(inv, dtype=np.int64),
        np.ascontiguousarray(w, dtype=np.float64),
    )


def _witness(t):
    t = tuple(int(v) for v in t)
    return None if t[0] < 0 else t


def translate_sup(mul, inv, w):
    return np.asarray(_impl.translate_sup(*_prep(mul, inv, w)))


def left_constancy_witness(mul, inv, w, tol):
    return _witness(_impl.left_constancy_witness(*_prep(mul, inv, w), float(tol)))


def right_constancy_witness(mul, inv, w, tol):
    return _witness(_impl.right_constancy_witness(*_prep(mul, inv, w), float(tol)))


def additivity_witness(mul, phi, tol):
    mul = np.ascontiguousarray(mul, dtype=np.int64)
    phi = np.ascontiguousarray(phi, dtype=np.float64)
    return _witness(_impl.additivity_witness(mul, phi, float(tol)))


def first_order_witness(mul, inv, w, tol):
    return _witness(_impl.first_order_witness(*_prep(mul, inv, w), float(tol)))


def first_order_witness_sampled(mul, inv, w, tol, triples):
    triples = np.ascontiguousarray(triples, dtype=np.int64)
    return _witness(_impl.first_order_witness_sampled(*_prep(mul, inv, w), float(tol), triples))
