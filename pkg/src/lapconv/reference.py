"""Ground truth for the continuous operators ``T_mu``, ``U_mu`` and ``U'_mu``.

Two independent routes: the closed-form spectrum of the ball kernel on a
circle, where ``T_mu`` is the moving average over an arc, and a brute-force
quadrature discretization usable on any reference space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateDegreeError, DomainError
from .kernel import DegreeField, Kernel, quadrature_weights
from .metric_space import Space
from .spectral import Spectrum, principal_angles

__all__ = [
    "ReferenceSpectrum",
    "DenseGridOperator",
    "circle_ball_spectrum",
    "dense_grid_operator",
    "m_range",
    "match_reference",
]

OPERATORS = ("T", "U", "Uprime")
_BLOCK = 1024


@dataclass
class ReferenceSpectrum:
    """Eigenvalue groups of a continuous operator with eigenfunction evaluators.

    Group ``i`` has value ``eigenvalues[i]``, multiplicity ``multiplicities[i]``
    and eigenfunctions ``eigenfunctions[i]`` (callables on points).
    """

    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    eigenfunctions: list[list[Callable]]
    operator: str
    frequencies: np.ndarray | None = None
    tail_bound: float = 0.0

    def as_operator(self, operator: str) -> "ReferenceSpectrum":
        """Switch between ``T`` and ``U' = I - T`` (``U`` equals ``U'`` when ``m_mu = 1``)."""
        if operator not in OPERATORS:
            raise DomainError(f"unknown operator {operator!r}")
        vals = self.eigenvalues if (operator == "T") == (self.operator == "T") else 1.0 - self.eigenvalues
        return ReferenceSpectrum(vals, self.multiplicities, self.eigenfunctions, operator, self.frequencies, self.tail_bound)

    def omitted_interval(self) -> tuple[float, float]:
        """Where eigenvalues of frequencies beyond the listed ones can lie."""
        if self.operator == "T":
            return (-self.tail_bound, self.tail_bound)
        return (1.0 - self.tail_bound, 1.0 + self.tail_bound)

    def sorted_groups(self) -> np.ndarray:
        return np.argsort(self.eigenvalues, kind="stable")


def circle_ball_spectrum(r: float, max_frequency: int, operator: str = "T",
                         circumference: float = 2.0 * math.pi) -> ReferenceSpectrum:
    """Spectrum of the ball-kernel operators on the uniform circle.

    With ``d_mu = 2r/C`` constant, ``T_mu`` is the average over the arc of
    half-width ``r``; ``cos`` and ``sin`` of angular frequency ``w`` are
    eigenfunctions with eigenvalue ``sin(w r) / (w r)``.
    """
    if not 0.0 < r <= circumference / 2.0:
        raise DomainError("ball radius must satisfy 0 < r <= C/2")
    if max_frequency < 0:
        raise DomainError("max_frequency must be non-negative")
    kappa = np.arange(max_frequency + 1)
    omega = 2.0 * math.pi * kappa / circumference
    vals = np.ones(max_frequency + 1)
    vals[1:] = np.sin(omega[1:] * r) / (omega[1:] * r)
    mult = np.where(kappa == 0, 1, 2)
    funcs: list[list[Callable]] = [[lambda x: np.ones(np.shape(x))]]
    for w in omega[1:]:
        funcs.append([lambda x, w=w: np.cos(w * np.asarray(x)), lambda x, w=w: np.sin(w * np.asarray(x))])
    # Every omitted frequency has |T eigenvalue| <= 1 / (w_{K+1} r).
    w_next = 2.0 * math.pi * (max_frequency + 1) / circumference
    ref = ReferenceSpectrum(vals, mult, funcs, "T", kappa, 1.0 / (w_next * r))
    return ref if operator == "T" else ref.as_operator(operator)


@dataclass
class DenseGridOperator:
    """Quadrature discretization of a continuous operator on ``grid`` nodes."""

    matrix: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    operator: str
    m_values: np.ndarray

    def apply(self, values) -> np.ndarray:
        """Apply the discretized operator to function values at the nodes."""
        return self.matrix @ np.asarray(values, dtype=np.float64)


def dense_grid_operator(kernel: Kernel, space: Space, degrees: DegreeField, grid_n: int,
                        operator: str = "T") -> DenseGridOperator:
    """Midpoint-rule matrix of ``T_mu``, ``U_mu`` or ``U'_mu``.

    ``T[i, j] = h_mu(z_i, z_j) w_j``; ``U = diag(row sums of T) - T`` and
    ``U' = I - T``.  Weights are uniform, so every matrix is symmetric.
    On a torus ``grid_n`` is the number of nodes per axis.
    """
    if grid_n < 16:
        raise DomainError("grid_n must be at least 16")
    if operator not in OPERATORS:
        raise DomainError(f"unknown operator {operator!r}")
    nodes, weights = space.quadrature(grid_n)
    d = np.asarray(degrees(nodes), dtype=np.float64)
    if not np.all(d > 0.0):
        raise DegenerateDegreeError("d_mu vanishes at a grid node")
    inv = 1.0 / d
    size = len(nodes)
    t = np.empty((size, size))
    # Row blocks keep the temporaries of the weight computation small.
    for start in range(0, size, _BLOCK):
        stop = min(start + _BLOCK, size)
        w, _ = quadrature_weights(kernel, space, nodes[start:stop], grid_n)
        t[start:stop] = 0.5 * w * (inv[start:stop, None] + inv[None, :])
    m_values = t.sum(axis=1)
    if operator == "T":
        mat = t
    else:
        np.negative(t, out=t)
        t[np.diag_indices(size)] += 1.0 if operator == "Uprime" else m_values
        mat = t
    return DenseGridOperator(mat, nodes, weights, operator, m_values)


def m_range(kernel: Kernel, space: Space, degrees: DegreeField, grid_n: int) -> tuple[float, float]:
    """``[min, max]`` of ``m_mu`` over the quadrature grid."""
    if grid_n < 2:
        raise DomainError("grid_n must be at least 2")
    nodes, _ = space.quadrature(grid_n)
    w, _ = quadrature_weights(kernel, space, nodes, grid_n)
    d = np.asarray(degrees(nodes), dtype=np.float64)
    if not np.all(d > 0.0):
        raise DegenerateDegreeError("d_mu vanishes at a grid node")
    m = 0.5 * (w.sum(axis=1) / d + w @ (1.0 / d))
    return float(m.min()), float(m.max())


def match_reference(spectrum: Spectrum, reference: ReferenceSpectrum, points=None) -> list[dict]:
    """Pair reference eigenvalue groups with empirical eigenvalues by rank.

    Only ``U``/``U'`` references are supported.  Groups are sorted by value
    and expanded by multiplicity; matching stops at the first group that
    reaches the range where omitted frequencies could interleave.  With ``points`` (the sample the
    spectrum was computed on) the largest principal angle between empirical
    eigenvectors and sampled reference eigenfunctions is reported too.
    """
    if reference.operator == "T":
        raise DomainError("rank matching needs a U or U' reference")
    if not (spectrum.coverage[0] == -np.inf):
        raise DomainError("rank matching needs a spectrum computed from the bottom")
    limit = reference.omitted_interval()[0]
    rows = []
    pos = 0
    for gid in reference.sorted_groups():
        value = float(reference.eigenvalues[gid])
        mult = int(reference.multiplicities[gid])
        if value >= limit or pos + mult > len(spectrum):
            break
        idx = np.arange(pos, pos + mult)
        emp = spectrum.eigenvalues[idx]
        row = {
            "group": int(gid),
            "frequency": None if reference.frequencies is None else int(reference.frequencies[gid]),
            "reference": value,
            "multiplicity": mult,
            "empirical_mean": float(emp.mean()),
            "max_abs_error": float(np.max(np.abs(emp - value))),
        }
        if points is not None:
            sampled = np.column_stack([f(points) for f in reference.eigenfunctions[gid]])
            row["max_principal_angle"] = float(np.max(principal_angles(spectrum.eigenvectors[:, idx], sampled)))
        rows.append(row)
        pos += mult
    return rows
