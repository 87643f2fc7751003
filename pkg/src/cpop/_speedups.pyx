# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch evaluation of flattened polynomial families.

Layout (shared with the numpy fallback in ``_fallback.py``): polynomial
``k`` owns terms ``poly_ptr[k]:poly_ptr[k+1]``; term ``t`` owns factors
``term_ptr[t]:term_ptr[t+1]``; factor ``f`` raises column ``fac_var[f]``
to ``fac_expl[f]`` and its conjugate to ``fac_conj[f]``.
"""

import numpy as np

from libc.stdint cimport int64_t


cdef inline double _ipow(double x, int64_t n) nogil:
    cdef double r = 1.0
    while n > 0:
        if n & 1:
            r *= x
        x *= x
        n >>= 1
    return r


cdef inline double complex _cpow(double complex x, int64_t n) nogil:
    cdef double complex r = 1.0
    while n > 0:
        if n & 1:
            r = r * x
        x = x * x
        n >>= 1
    return r


def eval_real(const double[:, ::1] points,
              const int64_t[::1] poly_ptr,
              const int64_t[::1] term_ptr,
              const double[::1] coef,
              const int64_t[::1] fac_var,
              const int64_t[::1] fac_expl):
    cdef Py_ssize_t npts = points.shape[0]
    cdef Py_ssize_t npolys = poly_ptr.shape[0] - 1
    out_arr = np.zeros((npts, npolys), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t p, k, t, f
    cdef double s, m
    with nogil:
        for p in range(npts):
            for k in range(npolys):
                s = 0.0
                for t in range(poly_ptr[k], poly_ptr[k + 1]):
                    m = coef[t]
                    for f in range(term_ptr[t], term_ptr[t + 1]):
                        m *= _ipow(points[p, fac_var[f]], fac_expl[f])
                    s += m
                out[p, k] = s
    return out_arr


def eval_complex(const double complex[:, ::1] points,
                 const int64_t[::1] poly_ptr,
                 const int64_t[::1] term_ptr,
                 const double complex[::1] coef,
                 const int64_t[::1] fac_var,
                 const int64_t[::1] fac_expl,
                 const int64_t[::1] fac_conj):
    cdef Py_ssize_t npts = points.shape[0]
    cdef Py_ssize_t npolys = poly_ptr.shape[0] - 1
    out_arr = np.zeros((npts, npolys), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef Py_ssize_t p, k, t, f
    cdef double complex s, m, v
    with nogil:
        for p in range(npts):
            for k in range(npolys):
                s = 0.0
                for t in range(poly_ptr[k], poly_ptr[k + 1]):
                    m = coef[t]
                    for f in range(term_ptr[t], term_ptr[t + 1]):
                        v = points[p, fac_var[f]]
                        if fac_expl[f]:
                            m = m * _cpow(v, fac_expl[f])
                        if fac_conj[f]:
                            m = m * _cpow(v.conjugate(), fac_conj[f])
                    s = s + m
                out[p, k] = s
    return out_arr
