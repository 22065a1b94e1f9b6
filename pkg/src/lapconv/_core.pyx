# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for pairwise kernel matrices and degree symmetrization.

Form codes: 0 ball indicator (d < p0), 1 Gaussian exp(-d^2 / (4 p0)),
2 truncated Gaussian (d < p1) * exp(-d^2 / (4 p0)), 3 constant p0.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs, sqrt

cnp.import_array()


cdef inline double _form(double d, int form, double p0, double p1) noexcept nogil:
    if form == 0:
        return 1.0 if d < p0 else 0.0
    elif form == 1:
        return exp(-d * d / (4.0 * p0))
    elif form == 2:
        return exp(-d * d / (4.0 * p0)) if d < p1 else 0.0
    return p0


cdef inline double _wrap(double d, double period) noexcept nogil:
    if period > 0.0:
        d = fabs(d)
        if period - d < d:
            return period - d
        return d
    return fabs(d)


def kernel_matrix_1d(const double[::1] x, const double[::1] y, double period,
                     int form, double p0, double p1, double scale):
    cdef Py_ssize_t m = x.shape[0], n = y.shape[0], i, j
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double xi
    with nogil:
        for i in range(m):
            xi = x[i]
            for j in range(n):
                o[i, j] = scale * _form(_wrap(xi - y[j], period), form, p0, p1)
    return out


def kernel_matrix_torus(const double[:, ::1] x, const double[:, ::1] y,
                        double c1, double c2, int form, double p0, double p1,
                        double scale):
    cdef Py_ssize_t m = x.shape[0], n = y.shape[0], i, j
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double u, v
    with nogil:
        for i in range(m):
            for j in range(n):
                u = _wrap(x[i, 0] - y[j, 0], c1)
                v = _wrap(x[i, 1] - y[j, 1], c2)
                o[i, j] = scale * _form(sqrt(u * u + v * v), form, p0, p1)
    return out


def kernel_from_distance(const double[:, ::1] dist, int form, double p0,
                         double p1, double scale):
    cdef Py_ssize_t m = dist.shape[0], n = dist.shape[1], i, j
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    with nogil:
        for i in range(m):
            for j in range(n):
                o[i, j] = scale * _form(dist[i, j], form, p0, p1)
    return out


def symmetric_degree_scale(const double[:, ::1] k, const double[::1] inv_row,
                           const double[::1] inv_col):
    """Return 0.5 * k[i, j] * (inv_row[i] + inv_col[j])."""
    cdef Py_ssize_t m = k.shape[0], n = k.shape[1], i, j
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double a
    with nogil:
        for i in range(m):
            a = inv_row[i]
            for j in range(n):
                o[i, j] = 0.5 * k[i, j] * (a + inv_col[j])
    return out
