"""Sample matrices and empirical integral operators.

For a sample ``X_1..X_n`` with empirical measure ``mu_n`` the bundle holds

* ``K[i, j] = k(X_i, X_j) / n`` (the 1/n is part of the matrix),
* ``degrees[i] = sum_j K[i, j] = d_{n,mu}(X_i)``,
* ``Mdiag[i] = sum_j K[i, j] / d_{n,mu}(X_j)``,
* ``L = (I + diag(Mdiag) - D^-1 K - K D^-1) / 2``,
* ``Lprime = I - (D^-1 K + K D^-1) / 2``.

The operator functions evaluate ``P_n``, ``T_n``, ``T_hat_n``, ``U_n`` and
``U'_n`` at arbitrary points of the space, vectorized over ``x``.  Functions
``g`` are callables mapping an array of points to an array of values (a
trailing column axis is allowed).
"""
from __future__ import annotations

from functools import cached_property

import numpy as np

from ._accel import impl
from .errors import DegenerateDegreeError, DomainError
from .kernel import DegreeField, Kernel, kernel_matrix
from .metric_space import PointSet, Space

__all__ = [
    "OperatorBundle",
    "build_bundle",
    "cross_kernel",
    "empirical_degree",
    "empirical_h",
    "empirical_m",
    "apply_P_n",
    "apply_T_n",
    "apply_T_hat_n",
    "apply_U_n",
    "restrict",
]


class OperatorBundle:
    """Sample plus the matrices built from it.

    ``L``, ``Lprime`` and ``Mdiag`` are computed lazily and raise
    :class:`DegenerateDegreeError` when some sample degree is zero.
    """

    def __init__(self, kernel: Kernel, points: PointSet):
        if points.n < 1:
            raise DomainError("a bundle needs at least one sample point")
        self.kernel = kernel
        self.points = points
        x = points.points
        self.K = kernel_matrix(kernel, points.space, x, x, scale=1.0 / points.n)
        self.degrees = self.K.sum(axis=1)
        self.min_degree = float(self.degrees.min())

    @property
    def space(self) -> Space:
        return self.points.space

    @property
    def n(self) -> int:
        return self.points.n

    @property
    def X(self) -> np.ndarray:
        return self.points.points

    @property
    def degenerate(self) -> bool:
        return not self.min_degree > 0.0

    @property
    def D(self) -> np.ndarray:
        return np.diag(self.degrees)

    def _require_positive(self):
        if self.degenerate:
            raise DegenerateDegreeError(f"sample degree vanishes (min_degree={self.min_degree})")

    @cached_property
    def inv_degrees(self) -> np.ndarray:
        self._require_positive()
        return 1.0 / self.degrees

    @cached_property
    def S(self) -> np.ndarray:
        """``(D^-1 K + K D^-1) / 2``, the matrix of ``T_hat_n`` on the sample."""
        inv = self.inv_degrees
        return impl.symmetric_degree_scale(np.ascontiguousarray(self.K), inv, inv)

    @cached_property
    def Mdiag(self) -> np.ndarray:
        return self.K @ self.inv_degrees

    @cached_property
    def L(self) -> np.ndarray:
        out = -self.S
        out[np.diag_indices(self.n)] += 0.5 * (1.0 + self.Mdiag)
        return out

    @cached_property
    def Lprime(self) -> np.ndarray:
        out = -self.S
        out[np.diag_indices(self.n)] += 1.0
        return out

    def unnormalized_laplacian(self) -> np.ndarray:
        return self.D - self.K

    def normalized_laplacian_sym(self) -> np.ndarray:
        self._require_positive()
        s = 1.0 / np.sqrt(self.degrees)
        return np.eye(self.n) - s[:, None] * self.K * s[None, :]

    def normalized_laplacian_rw(self) -> np.ndarray:
        return np.eye(self.n) - self.inv_degrees[:, None] * self.K

    def release(self, *names: str):
        """Drop cached matrices to free memory."""
        for name in names or ("S", "L", "Lprime", "Mdiag"):
            self.__dict__.pop(name, None)


def build_bundle(kernel: Kernel, points: PointSet) -> OperatorBundle:
    return OperatorBundle(kernel, points)


def _points(space: Space, x):
    """Return (2-D batch of points, was_scalar)."""
    x = np.asarray(x)
    single = x.ndim == (0 if space.dim == 1 else 1)
    return (np.atleast_1d(x) if space.dim == 1 else np.atleast_2d(x)), single


def _values(g, pts):
    return np.asarray(g(pts), dtype=np.float64)


def _finish(out, single):
    return out[0] if single else out


def cross_kernel(bundle: OperatorBundle, x) -> np.ndarray:
    """``k(x_a, X_j) / n`` as an ``(m, n)`` matrix."""
    pts, _ = _points(bundle.space, x)
    return kernel_matrix(bundle.kernel, bundle.space, pts, bundle.X, scale=1.0 / bundle.n)


def empirical_degree(bundle: OperatorBundle, x):
    """``d_{n,mu}(x) = (1/n) sum_j k(x, X_j)`` at any point of the space."""
    pts, single = _points(bundle.space, x)
    return _finish(cross_kernel(bundle, pts).sum(axis=1), single)


def empirical_h(bundle: OperatorBundle, x) -> np.ndarray:
    """``h_{n,mu}(x_a, X_j) / n`` as an ``(m, n)`` matrix."""
    c = cross_kernel(bundle, x)
    dx = c.sum(axis=1)
    if not np.all(dx > 0.0):
        raise DegenerateDegreeError("d_{n,mu}(x) = 0 at an evaluation point")
    return impl.symmetric_degree_scale(c, 1.0 / dx, bundle.inv_degrees)


def empirical_m(bundle: OperatorBundle, x):
    """``m_{n,mu}(x) = (1/n) sum_j h_{n,mu}(x, X_j)``."""
    pts, single = _points(bundle.space, x)
    return _finish(empirical_h(bundle, pts).sum(axis=1), single)


def apply_P_n(bundle: OperatorBundle, g, x):
    """``P_n g(x) = (1/n) sum_j k(x, X_j) g(X_j)``."""
    pts, single = _points(bundle.space, x)
    return _finish(cross_kernel(bundle, pts) @ _values(g, bundle.X), single)


def apply_T_hat_n(bundle: OperatorBundle, g, x):
    """``T_hat_n g(x) = (1/n) sum_j h_{n,mu}(x, X_j) g(X_j)``."""
    pts, single = _points(bundle.space, x)
    return _finish(empirical_h(bundle, pts) @ _values(g, bundle.X), single)


def apply_T_n(bundle: OperatorBundle, degrees: DegreeField, g, x):
    """``T_n g(x) = (1/n) sum_j h_mu(x, X_j) g(X_j)`` with the continuous degree."""
    pts, single = _points(bundle.space, x)
    dx, dX = np.asarray(degrees(pts), dtype=np.float64), np.asarray(degrees(bundle.X), dtype=np.float64)
    if not (np.all(dx > 0.0) and np.all(dX > 0.0)):
        raise DegenerateDegreeError("d_mu vanishes at an evaluation point")
    h = impl.symmetric_degree_scale(cross_kernel(bundle, pts), 1.0 / dx, 1.0 / dX)
    return _finish(h @ _values(g, bundle.X), single)


def apply_U_n(bundle: OperatorBundle, g, x, variant: str = "amv"):
    """``U_n g = m_n g - T_hat_n g`` (``"amv"``) or ``U'_n g = g - T_hat_n g`` (``"identity"``)."""
    if variant not in ("amv", "identity"):
        raise DomainError(f"unknown variant {variant!r}")
    pts, single = _points(bundle.space, x)
    h = empirical_h(bundle, pts)
    gx = _values(g, pts)
    tg = h @ _values(g, bundle.X)
    if variant == "identity":
        out = gx - tg
    else:
        m = h.sum(axis=1)
        out = (m[:, None] * gx if gx.ndim == 2 else m * gx) - tg
    return _finish(out, single)


def restrict(f, points: PointSet | OperatorBundle) -> np.ndarray:
    """``rho_n f = (f(X_1), ..., f(X_n))``."""
    pts = points.X if isinstance(points, OperatorBundle) else points.points
    return _values(f, pts)
