"""Pure numpy versions of the routines in ``_core.pyx``.

Signatures and form codes match the compiled module exactly.
"""
import numpy as np


def _form(d, form, p0, p1):
    if form == 0:
        return (d < p0).astype(np.float64)
    if form == 1:
        return np.exp(-d * d / (4.0 * p0))
    if form == 2:
        return np.where(d < p1, np.exp(-d * d / (4.0 * p0)), 0.0)
    return np.full(d.shape, float(p0))


def _wrap(d, period):
    d = np.abs(d)
    if period > 0.0:
        return np.minimum(d, period - d)
    return d


def kernel_matrix_1d(x, y, period, form, p0, p1, scale):
    d = _wrap(np.subtract.outer(x, y), period)
    return scale * _form(d, form, p0, p1)


def kernel_matrix_torus(x, y, c1, c2, form, p0, p1, scale):
    u = _wrap(np.subtract.outer(x[:, 0], y[:, 0]), c1)
    v = _wrap(np.subtract.outer(x[:, 1], y[:, 1]), c2)
    return scale * _form(np.sqrt(u * u + v * v), form, p0, p1)


def kernel_from_distance(dist, form, p0, p1, scale):
    return scale * _form(np.asarray(dist), form, p0, p1)


def symmetric_degree_scale(k, inv_row, inv_col):
    return 0.5 * k * np.add.outer(inv_row, inv_col)
