"""Eigendecomposition of the sample Laplacians, spectral-window projections and
Nystrom extension of eigenvectors to functions on the whole space.

For symmetric matrices the spectral projection onto a window (contour
integral of the resolvent) equals the orthogonal projector onto the span of
the eigenvectors with eigenvalues inside it, which is what is computed here.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .empirical import OperatorBundle, _points, empirical_h
from .errors import DomainError, EssentialSpectrumError, IllPosedWindowError
from .metric_space import make_rng

__all__ = [
    "Spectrum",
    "ExtendedEigenfunction",
    "eig_sym",
    "eig_window",
    "bundle_matrix",
    "bundle_spectrum",
    "nystrom_extend_identity",
    "nystrom_extend_amv",
    "spectral_window_project",
    "projection_error",
    "principal_angles",
]

DEFAULT_MARGIN = 1e-3
LANCZOS_MIN_N = 1024


def _max_abs(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # Largest-magnitude entry of each column made positive (first one on ties).
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _group(values: np.ndarray, tol: float) -> list[np.ndarray]:
    if len(values) == 0:
        return []
    breaks = np.flatnonzero(np.diff(values) > tol) + 1
    return np.split(np.arange(len(values)), breaks)


@dataclass
class Spectrum:
    """Ascending eigenvalues with orthonormal eigenvector columns.

    ``coverage`` is the eigenvalue range that is known to be complete; it is
    ``(-inf, inf)`` for a full decomposition.  ``essential`` is a closed
    interval windows must avoid (``(1, 1)`` for ``L'``).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    gap_tol: float
    coverage: tuple[float, float] = (-np.inf, np.inf)
    operator: str | None = None
    essential: tuple[float, float] | None = None
    groups: list[np.ndarray] = field(init=False)

    def __post_init__(self):
        self.groups = _group(self.eigenvalues, self.gap_tol)

    def __len__(self):
        return len(self.eigenvalues)

    @property
    def multiplicities(self) -> list[int]:
        return [len(g) for g in self.groups]

    def group_ids(self) -> np.ndarray:
        ids = np.empty(len(self), dtype=np.int64)
        for gid, g in enumerate(self.groups):
            ids[g] = gid
        return ids

    def cluster_near(self, value: float) -> np.ndarray:
        """Indices of the multiplicity group whose mean is closest to ``value``."""
        means = [self.eigenvalues[g].mean() for g in self.groups]
        return self.groups[int(np.argmin(np.abs(np.asarray(means) - value)))]

    def select(self, window) -> np.ndarray:
        lo, hi = window
        return np.flatnonzero((self.eigenvalues > lo) & (self.eigenvalues < hi))


def _check_symmetric(a: np.ndarray, tol: float = 1e-12):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError("matrix must be square")
    if _max_abs(a - a.T) > tol * max(1.0, _max_abs(a)):
        raise DomainError("matrix is not symmetric")
    return a


def eig_sym(matrix, gap_tol: float | None = None, operator: str | None = None,
            essential=None) -> Spectrum:
    """Full symmetric eigendecomposition, ascending, with fixed eigenvector signs."""
    a = _check_symmetric(matrix)
    w, v = scipy.linalg.eigh(a)
    if gap_tol is None:
        gap_tol = 1e-6 * _max_abs(a)
    return Spectrum(w, _fix_signs(v), gap_tol, operator=operator, essential=essential)


def _lanczos_lowest(a: np.ndarray, upper: float, cap: int):
    n = a.shape[0]
    v0 = make_rng(0x5EED).standard_normal(n)
    k = min(8, n - 2)
    while True:
        w, v = scipy.sparse.linalg.eigsh(a, k=k, which="SA", v0=v0, tol=0.0)
        order = np.argsort(w)
        w, v = w[order], v[:, order]
        if w[-1] > upper:
            return w, v
        if k >= cap:
            return None
        k = min(2 * k, cap)


def eig_window(matrix, window, margin: float = DEFAULT_MARGIN, gap_tol: float | None = None,
               operator: str | None = None, essential=None, method: str = "auto") -> Spectrum:
    """Eigenpairs with eigenvalues in ``(lo - margin, hi + margin]``.

    Raises :class:`IllPosedWindowError` when an eigenvalue lies within
    ``margin`` of a window edge.  Large matrices use Lanczos from the bottom
    of the spectrum, growing the number of requested pairs until the window
    is passed; otherwise LAPACK's ranged solver is used.
    """
    a = _check_symmetric(matrix)
    lo, hi = map(float, window)
    if not lo < hi:
        raise DomainError("window must satisfy lo < hi")
    n = a.shape[0]
    if gap_tol is None:
        gap_tol = 1e-6 * _max_abs(a)
    result = None
    if method == "lanczos" or (method == "auto" and n >= LANCZOS_MIN_N):
        result = _lanczos_lowest(a, hi + margin, cap=min(n - 2, 256))
    if result is None:
        w, v = scipy.linalg.eigh(a, subset_by_value=(lo - margin, hi + margin))
    else:
        w, v = result
    keep = (w > lo - margin) & (w <= hi + margin)
    w, v = w[keep], v[:, keep]
    near = (np.abs(w - lo) < margin) | (np.abs(w - hi) < margin)
    if np.any(near):
        raise IllPosedWindowError(f"eigenvalue(s) {w[near]} within {margin} of window {(lo, hi)}")
    return Spectrum(w, _fix_signs(v), gap_tol, coverage=(lo - margin, hi + margin), operator=operator, essential=essential)


def bundle_matrix(bundle: OperatorBundle, operator: str = "Lprime") -> np.ndarray:
    if operator == "Lprime":
        return bundle.Lprime
    if operator == "L":
        return bundle.L
    raise DomainError(f"unknown operator {operator!r}")


def _essential(bundle: OperatorBundle, operator: str):
    if operator == "Lprime":
        return (1.0, 1.0)
    m = 0.5 * (1.0 + bundle.Mdiag)
    return (float(m.min()), float(m.max()))


def bundle_spectrum(bundle: OperatorBundle, operator: str = "Lprime", window=None,
                    margin: float = DEFAULT_MARGIN, method: str = "auto") -> Spectrum:
    """Spectrum of ``L'`` or ``L`` (full, or restricted to a window)."""
    a = bundle_matrix(bundle, operator)
    ess = _essential(bundle, operator)
    if window is None:
        return eig_sym(a, operator=operator, essential=ess)
    _check_window(window, ess, margin)
    return eig_window(a, window, margin, operator=operator, essential=ess, method=method)


def _check_window(window, essential, margin):
    if essential is None:
        return
    lo, hi = window
    e_lo, e_hi = essential
    if lo - margin < e_hi and e_lo < hi + margin:
        raise EssentialSpectrumError(f"window {tuple(window)} meets the essential range {essential}")


@dataclass
class ExtendedEigenfunction:
    """Nystrom extension of eigenvector(s) ``v`` of ``L'`` or ``L``.

    ``v`` may hold several eigenvectors as columns, with ``eigenvalue`` the
    matching array; calling the object then returns one column per vector.
    """

    bundle: OperatorBundle
    vector: np.ndarray
    eigenvalue: float | np.ndarray
    variant: str
    range_tol: float = 1e-10

    def __call__(self, x):
        pts, single = _points(self.bundle.space, x)
        h = empirical_h(self.bundle, pts)
        num = h @ self.vector
        lam = np.asarray(self.eigenvalue, dtype=np.float64)
        if self.variant == "identity":
            den = 1.0 - lam
        else:
            m = h.sum(axis=1)
            den = m[:, None] - lam if num.ndim == 2 else m - lam
            if np.any(np.abs(den) < self.range_tol):
                raise EssentialSpectrumError("eigenvalue lies in rg(m_n) at an evaluation point")
        out = num / den
        return out[0] if single else out


def _check_eigenpair(a, v, lam, tol):
    v2 = v if v.ndim == 2 else v[:, None]
    lam2 = np.atleast_1d(np.asarray(lam, dtype=np.float64))
    res = a @ v2 - v2 * lam2[None, :]
    scale = max(1.0, _max_abs(a)) * np.maximum(1.0, np.max(np.abs(v2), axis=0))
    if np.any(np.max(np.abs(res), axis=0) > tol * scale):
        raise DomainError("vector is not an eigenvector for the given eigenvalue")


def nystrom_extend_identity(bundle: OperatorBundle, v, lam, tol: float = 1e-8,
                            check: bool = True) -> ExtendedEigenfunction:
    """``f(x) = (1/n) sum_j h_n(X_j, x) v_j / (1 - lam)``, an eigenfunction of ``U'_n``."""
    v = np.asarray(v, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    if np.any(np.abs(1.0 - lam) <= tol):
        raise EssentialSpectrumError("eigenvalue 1 is the essential spectrum of U'_n")
    if check:
        _check_eigenpair(bundle.Lprime, v, lam, tol)
    return ExtendedEigenfunction(bundle, v, lam if lam.ndim else float(lam), "identity")


def nystrom_extend_amv(bundle: OperatorBundle, v, lam, tol: float = 1e-8,
                       range_tol: float = 1e-10, check: bool = True) -> ExtendedEigenfunction:
    """``f(x) = (1/n) sum_j h_n(X_j, x) v_j / (m_n(x) - lam)``, an eigenfunction of ``U_n``."""
    v = np.asarray(v, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    m = 0.5 * (1.0 + bundle.Mdiag)
    if np.min(np.abs(np.subtract.outer(m, np.atleast_1d(lam)))) < range_tol:
        raise EssentialSpectrumError("eigenvalue lies in rg(m_n)")
    if check:
        _check_eigenpair(bundle.L, v, lam, tol)
    return ExtendedEigenfunction(bundle, v, lam if lam.ndim else float(lam), "amv", range_tol)


def spectral_window_project(spectrum: Spectrum, window, target, margin: float = DEFAULT_MARGIN) -> np.ndarray:
    """Orthogonal projection of ``target`` onto the eigenvectors inside ``window``."""
    lo, hi = map(float, window)
    _check_window((lo, hi), spectrum.essential, margin)
    c_lo, c_hi = spectrum.coverage
    if lo - margin < c_lo or hi + margin > c_hi:
        raise DomainError("window extends beyond the computed part of the spectrum")
    w = spectrum.eigenvalues
    near = (np.abs(w - lo) < margin) | (np.abs(w - hi) < margin)
    if np.any(near):
        raise IllPosedWindowError(f"eigenvalue(s) {w[near]} within {margin} of window {(lo, hi)}")
    v = spectrum.eigenvectors[:, spectrum.select((lo, hi))]
    return v @ (v.T @ np.asarray(target, dtype=np.float64))


def projection_error(bundle: OperatorBundle, spectrum: Spectrum, window, u, grid=None,
                     margin: float = DEFAULT_MARGIN) -> float:
    """Sup of ``|u - Pr_n u|`` over the sample, and over ``grid`` when given.

    On the sample the spectral projection of ``U'_n`` (resp. ``U_n``) acts as
    the matrix projection of ``L'`` (resp. ``L``).  Off the sample,
    ``Pr_n u = sum_k <v_k, rho_n u> f_k`` with ``f_k`` the Nystrom extensions.
    """
    rho_u = np.asarray(u(bundle.X), dtype=np.float64)
    proj = spectral_window_project(spectrum, window, rho_u, margin)
    err = _max_abs(rho_u - proj)
    if grid is not None:
        idx = spectrum.select(window)
        pts, _ = _points(bundle.space, grid)
        u_grid = np.asarray(u(pts), dtype=np.float64)
        if len(idx) == 0:
            return max(err, _max_abs(u_grid))
        v = spectrum.eigenvectors[:, idx]
        lam = spectrum.eigenvalues[idx]
        if spectrum.operator == "L":
            f = nystrom_extend_amv(bundle, v, lam, check=False)
        else:
            f = nystrom_extend_identity(bundle, v, lam, check=False)
        pr_u = f(pts) @ (v.T @ rho_u)
        err = max(err, _max_abs(u_grid - pr_u))
    return err


def principal_angles(a, b) -> np.ndarray:
    """Principal angles (radians, descending) between the column spans of a and b."""
    a, b = np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64)
    return scipy.linalg.subspace_angles(a[:, None] if a.ndim == 1 else a, b[:, None] if b.ndim == 1 else b)
