"""Batch evaluation of polynomial families at many points.

The compiled extension is used when it imports; otherwise the numpy
fallback takes over. Setting ``CPOP_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from . import _fallback
from .poly import Polynomial, Variable

if os.environ.get("CPOP_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _speedups as _compiled
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "numpy"


def kernel_module(name: str = None):
    """Return the kernel implementation: ``"compiled"``, ``"numpy"`` or the default."""
    if name is None:
        name = BACKEND
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    if name == "numpy":
        return _fallback
    raise ValueError(f"unknown kernel backend {name!r}")


class PolynomialBatch:
    """A family of polynomials flattened against a fixed variable order.

    ``evaluate(points)`` takes an ``(npts, nvars)`` array whose columns
    follow ``variables`` and returns ``(npts, len(polys))``.
    """

    def __init__(self, polys: Sequence[Polynomial], variables: Sequence[Variable], backend: str = None):
        self.variables = list(variables)
        self.npolys = len(polys)
        self._impl = kernel_module(backend)
        index = {v: i for i, v in enumerate(self.variables)}
        poly_ptr, term_ptr = [0], [0]
        coef, fac_var, fac_expl, fac_conj = [], [], [], []
        has_conj = False
        for p in polys:
            for expo, c in p.items():
                coef.append(c)
                for v, e, cj in expo.factors:
                    if v not in index:
                        raise KeyError(f"variable {v.name} missing from the batch layout")
                    fac_var.append(index[v])
                    fac_expl.append(e)
                    fac_conj.append(cj)
                    has_conj = has_conj or cj > 0
                term_ptr.append(len(fac_var))
            poly_ptr.append(len(coef))
        self.poly_ptr = np.asarray(poly_ptr, dtype=np.int64)
        self.term_ptr = np.asarray(term_ptr, dtype=np.int64)
        self.coef = np.asarray(coef, dtype=np.complex128).reshape(-1)
        self.fac_var = np.asarray(fac_var, dtype=np.int64)
        self.fac_expl = np.asarray(fac_expl, dtype=np.int64)
        self.fac_conj = np.asarray(fac_conj, dtype=np.int64)
        self.is_real = not has_conj and bool(np.all(self.coef.imag == 0))
        self._coef_real = np.ascontiguousarray(self.coef.real)

    def evaluate(self, points) -> np.ndarray:
        if self.is_real and not np.iscomplexobj(points):
            pts = np.ascontiguousarray(points, dtype=np.float64)
            return self._impl.eval_real(
                pts, self.poly_ptr, self.term_ptr, self._coef_real, self.fac_var, self.fac_expl
            )
        pts = np.ascontiguousarray(points, dtype=np.complex128)
        return self._impl.eval_complex(
            pts, self.poly_ptr, self.term_ptr, self.coef, self.fac_var, self.fac_expl, self.fac_conj
        )
