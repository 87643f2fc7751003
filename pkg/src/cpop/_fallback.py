"""Pure numpy implementation of the batch evaluation kernels.

Same signatures and array layout as the compiled ``_speedups`` module.
"""

import numpy as np


def eval_real(points, poly_ptr, term_ptr, coef, fac_var, fac_expl):
    npts = points.shape[0]
    npolys = len(poly_ptr) - 1
    out = np.zeros((npts, npolys), dtype=np.float64)
    for k in range(npolys):
        col = out[:, k]
        for t in range(poly_ptr[k], poly_ptr[k + 1]):
            m = np.full(npts, coef[t])
            for f in range(term_ptr[t], term_ptr[t + 1]):
                m *= points[:, fac_var[f]] ** fac_expl[f]
            col += m
    return out


def eval_complex(points, poly_ptr, term_ptr, coef, fac_var, fac_expl, fac_conj):
    npts = points.shape[0]
    npolys = len(poly_ptr) - 1
    out = np.zeros((npts, npolys), dtype=np.complex128)
    for k in range(npolys):
        col = out[:, k]
        for t in range(poly_ptr[k], poly_ptr[k + 1]):
            m = np.full(npts, coef[t], dtype=np.complex128)
            for f in range(term_ptr[t], term_ptr[t + 1]):
                v = points[:, fac_var[f]]
                if fac_expl[f]:
                    m *= v ** fac_expl[f]
                if fac_conj[f]:
                    m *= np.conj(v) ** fac_conj[f]
            col += m
    return out
