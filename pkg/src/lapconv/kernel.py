"""Symmetric non-negative kernels and the continuous-side functions built on them.

A kernel carries its declared constants: the upper bound ``M``, the lower
bound ``a`` on the degree ``d_mu(x) = int k(x, y) dmu(y)``, and the continuity
modulus ``omega(delta) <= C_omega * delta**m_prime``.  These are hypotheses;
``verify_membership`` checks them numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar

import numpy as np

from ._accel import impl
from .errors import ConfigError, DegenerateDegreeError
from .metric_space import Circle, Interval, PointCloud, Space, Torus2

__all__ = [
    "Kernel",
    "BallIndicator",
    "Gaussian",
    "TruncatedGaussian",
    "Constant",
    "DegreeField",
    "MembershipReport",
    "kernel_from_dict",
    "kernel_matrix",
    "evaluate",
    "quadrature_weights",
    "degree_field",
    "degree",
    "h_kernel",
    "m_function",
    "modulus_estimate",
    "verify_membership",
]

DEFAULT_RESOLUTION = 4096
DEFAULT_TORUS_RESOLUTION = 128


@dataclass(frozen=True, kw_only=True)
class Kernel:
    M: float = 1.0
    a: float | None = None
    C_omega: float | None = None
    m_prime: float | None = None

    form: ClassVar[str] = ""
    code: ClassVar[int] = -1

    def __post_init__(self):
        if not self.M >= 1.0:
            raise ConfigError("kernel bound M must satisfy M >= 1")
        if self.a is not None and not 0.0 < self.a <= 1.0:
            raise ConfigError("degree lower bound a must satisfy 0 < a <= 1")
        if self.C_omega is not None and not self.C_omega >= 0.0:
            raise ConfigError("C_omega must be non-negative")
        if self.m_prime is not None and not self.m_prime > 0.0:
            raise ConfigError("m_prime must be positive")

    @property
    def params(self) -> tuple[float, float]:
        raise NotImplementedError

    @property
    def cutoff(self) -> float | None:
        """Radius of the jump discontinuity, if any."""
        return None

    def profile(self, d):
        """Kernel value as a function of distance."""
        d = np.asarray(d, dtype=np.float64)
        return impl.kernel_from_distance(np.ascontiguousarray(np.atleast_2d(d)), self.code, *self.params, 1.0).reshape(d.shape)

    def to_dict(self) -> dict:
        out = {"form": self.form, **self._param_dict(), "M": self.M}
        for key in ("a", "C_omega", "m_prime"):
            if getattr(self, key) is not None:
                out[key] = getattr(self, key)
        return out

    def _param_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, kw_only=False)
class BallIndicator(Kernel):
    """``k(x, y) = 1`` if ``d(x, y) < r`` else ``0`` (open ball)."""

    r: float
    form: ClassVar[str] = "ball"
    code: ClassVar[int] = 0

    def __post_init__(self):
        super().__post_init__()
        if not self.r > 0:
            raise ConfigError("ball radius must be positive")

    @property
    def params(self):
        return (float(self.r), 0.0)

    @property
    def cutoff(self):
        return float(self.r)

    def _param_dict(self):
        return {"r": self.r}


@dataclass(frozen=True, kw_only=False)
class Gaussian(Kernel):
    """``k(x, y) = exp(-d(x, y)**2 / (4 t))``."""

    t: float
    form: ClassVar[str] = "gaussian"
    code: ClassVar[int] = 1

    def __post_init__(self):
        super().__post_init__()
        if not self.t > 0:
            raise ConfigError("Gaussian scale t must be positive")

    @property
    def params(self):
        return (float(self.t), 0.0)

    def _param_dict(self):
        return {"t": self.t}


@dataclass(frozen=True, kw_only=False)
class TruncatedGaussian(Kernel):
    """Gaussian cut off by the open ball of radius ``eps``."""

    t: float
    eps: float
    form: ClassVar[str] = "truncated_gaussian"
    code: ClassVar[int] = 2

    def __post_init__(self):
        super().__post_init__()
        if not (self.t > 0 and self.eps > 0):
            raise ConfigError("t and eps must be positive")

    @property
    def params(self):
        return (float(self.t), float(self.eps))

    @property
    def cutoff(self):
        return float(self.eps)

    def _param_dict(self):
        return {"t": self.t, "eps": self.eps}


@dataclass(frozen=True, kw_only=False)
class Constant(Kernel):
    c: float = 1.0
    form: ClassVar[str] = "constant"
    code: ClassVar[int] = 3

    def __post_init__(self):
        super().__post_init__()
        if not 0.0 < self.c <= self.M:
            raise ConfigError("constant kernel needs 0 < c <= M")

    @property
    def params(self):
        return (float(self.c), 0.0)

    def _param_dict(self):
        return {"c": self.c}


_FORMS = {cls.form: cls for cls in (BallIndicator, Gaussian, TruncatedGaussian, Constant)}


def kernel_from_dict(spec: dict) -> Kernel:
    spec = dict(spec)
    form = spec.pop("form", None)
    if form not in _FORMS:
        raise ConfigError(f"unknown kernel form {form!r}")
    cls = _FORMS[form]
    names = {f.name for f in cls.__dataclass_fields__.values() if f.init}
    unknown = set(spec) - names
    if unknown:
        raise ConfigError(f"unknown keys for kernel {form}: {sorted(unknown)}")
    try:
        return cls(**{k: float(v) for k, v in spec.items()})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"kernel {form}: {exc}") from None


def kernel_matrix(kernel: Kernel, space: Space, x, y, scale: float = 1.0) -> np.ndarray:
    """Dense matrix ``scale * k(x_a, y_b)``."""
    p0, p1 = kernel.params
    if isinstance(space, (Interval, Circle)):
        x = np.ascontiguousarray(np.atleast_1d(space.validate(x)), dtype=np.float64)
        y = np.ascontiguousarray(np.atleast_1d(space.validate(y)), dtype=np.float64)
        return impl.kernel_matrix_1d(x, y, float(space.period), kernel.code, p0, p1, float(scale))
    if isinstance(space, Torus2):
        x = np.ascontiguousarray(np.atleast_2d(space.validate(x)), dtype=np.float64)
        y = np.ascontiguousarray(np.atleast_2d(space.validate(y)), dtype=np.float64)
        c1, c2 = space.circumferences
        return impl.kernel_matrix_torus(x, y, c1, c2, kernel.code, p0, p1, float(scale))
    dist = np.ascontiguousarray(space.pairwise(x, y), dtype=np.float64)
    return impl.kernel_from_distance(dist, kernel.code, p0, p1, float(scale))


def evaluate(kernel: Kernel, space: Space, x, y):
    """Elementwise ``k(x, y)`` with broadcasting."""
    return kernel.profile(space.distance(x, y))


def _overlap(delta, half, rho, period):
    """Length of ``[delta - half, delta + half]`` inside the ball of radius rho."""
    if period > 0.0 and rho >= period / 2.0:
        return np.full(np.shape(delta), 2.0 * half)
    lo, hi = delta - half, delta + half
    out = np.clip(np.minimum(hi, rho) - np.maximum(lo, -rho), 0.0, None)
    if period > 0.0:
        out += np.clip(np.minimum(hi, period + rho) - np.maximum(lo, period - rho), 0.0, None)
    return out


def quadrature_weights(kernel: Kernel, space: Space, x, resolution: int | None = None,
                       normalized: bool = True):
    """Weights ``W`` with ``sum_j W[a, j] g(z_j) ~ int k(x_a, z) g(z) dmu(z)``.

    Returns ``(W, nodes)``.  With ``normalized=False`` the (uniform) node
    weight is left out, so the caller divides by the node count.  On the 1-D
    kinds a kernel with a jump at ``d = rho`` is integrated cell by cell: the
    indicator is replaced by the fraction of each quadrature cell lying inside
    the ball, which removes the O(h) error of point evaluation at the jump.
    """
    if resolution is None:
        resolution = DEFAULT_TORUS_RESOLUTION if isinstance(space, Torus2) else DEFAULT_RESOLUTION
    if resolution < 1 and not isinstance(space, PointCloud):
        raise ConfigError("quadrature resolution must be positive")
    nodes, weights = space.quadrature(resolution)
    rho = kernel.cutoff
    pts = np.atleast_1d(x) if space.dim == 1 else np.atleast_2d(x)
    if rho is not None and isinstance(space, (Interval, Circle)):
        h = space.extent / len(nodes)
        dist = space.pairwise(pts, nodes)
        w = _overlap(dist, h / 2.0, rho, space.period) / h
        if isinstance(kernel, TruncatedGaussian):
            w = w * np.exp(-dist * dist / (4.0 * kernel.t))
    else:
        w = kernel_matrix(kernel, space, pts, nodes)
    return (w * weights[None, :] if normalized else w), nodes


class DegreeField:
    """Evaluator of ``d_mu(x)`` on a reference space.

    ``method`` is ``"closed_form"``, ``"exact_sum"`` (point clouds) or
    ``"quadrature"``.
    """

    def __init__(self, kernel: Kernel, space: Space, resolution: int | None = None):
        if resolution is not None and resolution <= 0:
            raise ConfigError("quadrature resolution must be positive")
        self.kernel = kernel
        self.space = space
        self.resolution = resolution
        if isinstance(kernel, Constant):
            self.method = "closed_form"
        elif isinstance(space, PointCloud):
            self.method = "exact_sum"
        elif isinstance(kernel, BallIndicator):
            self.method = "closed_form"
        else:
            self.method = "quadrature"

    def __call__(self, x) -> np.ndarray:
        kernel, space = self.kernel, self.space
        if self.method == "closed_form":
            if isinstance(kernel, Constant):
                x = space.validate(x)
                shape = x.shape[:-1] if space.dim == 2 else np.shape(x)
                return np.full(shape, kernel.c)
            return np.asarray(space.ball_measure(x, kernel.r), dtype=np.float64)
        x = np.asarray(x, dtype=np.float64)
        shape = x.shape if space.dim == 1 else x.shape[:-1]
        flat = x.reshape(-1) if space.dim == 1 else x.reshape(-1, space.dim)
        w, _ = quadrature_weights(kernel, space, flat, self.resolution)
        out = w.sum(axis=1).reshape(shape)
        return out[()] if out.ndim == 0 else out

    def __repr__(self):
        return f"DegreeField({self.kernel!r}, {self.space!r}, method={self.method!r}, resolution={self.resolution})"


def degree_field(kernel: Kernel, space: Space, resolution: int | None = None) -> DegreeField:
    return DegreeField(kernel, space, resolution)


def degree(kernel: Kernel, space: Space, x, resolution: int | None = None):
    """``d_mu(x)``, closed form where available, else quadrature."""
    return degree_field(kernel, space, resolution)(x)


def _check_positive(values, what="degree"):
    values = np.asarray(values)
    if np.any(~(values > 0.0)):
        raise DegenerateDegreeError(f"non-positive {what} encountered (min {values.min()!r})")
    return values


def h_kernel(kernel: Kernel, space: Space, degrees: DegreeField, x, y):
    """``h_mu(x, y) = k(x, y) (1/d_mu(x) + 1/d_mu(y)) / 2``."""
    dx = _check_positive(degrees(x))
    dy = _check_positive(degrees(y))
    return 0.5 * evaluate(kernel, space, x, y) * (1.0 / dx + 1.0 / dy)


def m_function(kernel: Kernel, space: Space, degrees: DegreeField, x, resolution: int | None = None):
    """``m_mu(x) = int h_mu(x, y) dmu(y)``."""
    scalar = np.ndim(x) == (0 if space.dim == 1 else 1)
    x = np.atleast_1d(x) if space.dim == 1 else np.atleast_2d(x)
    w, nodes = quadrature_weights(kernel, space, x, resolution)
    dx = _check_positive(degrees(x))
    dz = _check_positive(degrees(nodes))
    out = 0.5 * (w.sum(axis=1) / dx + w @ (1.0 / dz))
    return out[0] if scalar else out


def _ball_modulus_1d(space, x, fan, r):
    """Exact measure of the union over the fan of ``B_r(x) xor B_r(y)``."""
    centres = np.concatenate([[x], fan])
    ends = np.concatenate([centres - r, centres + r])
    if space.period > 0.0:
        ends = np.mod(ends, space.period)
    else:
        ends = np.clip(ends, 0.0, space.extent)
    cuts = np.unique(np.concatenate([[0.0, space.extent], ends]))
    lengths = np.diff(cuts)
    mids = cuts[:-1] + lengths / 2.0
    in_x = space.distance(np.full_like(mids, x), mids) < r
    in_y = space.pairwise(fan, mids) < r
    differs = np.any(in_y != in_x[None, :], axis=0)
    return float(lengths[differs].sum() / space.extent)


def modulus_estimate(kernel: Kernel, space: Space, delta: float, probe_count: int = 64,
                     resolution: int | None = None, fan_size: int = 32) -> float:
    """Probe ``sup_x || sup_{y in B_delta(x)} |k(x, .) - k(y, .)| ||_{L^1}``.

    The outer sup runs over ``probe_count`` deterministic centres and the
    inner one over a fan of ``fan_size`` points, so the result is a lower
    bound on the true modulus.  Ball kernels on 1-D spaces are integrated
    exactly.
    """
    if not delta > 0:
        raise ConfigError("delta must be positive")
    if isinstance(kernel, Constant):
        return 0.0
    probes = space.probe_grid(probe_count)
    best = 0.0
    if isinstance(kernel, BallIndicator) and isinstance(space, (Interval, Circle)):
        for x in probes:
            fan = space.perturbation_fan(x, delta, fan_size)
            best = max(best, _ball_modulus_1d(space, float(x), fan, kernel.r))
        return best
    if resolution is None:
        resolution = DEFAULT_TORUS_RESOLUTION if isinstance(space, Torus2) else DEFAULT_RESOLUTION
    nodes, weights = space.quadrature(resolution)
    for x in probes:
        fan = space.perturbation_fan(x, delta, fan_size)
        if len(fan) == 0:
            continue
        kx = kernel_matrix(kernel, space, [x] if space.dim == 1 else np.atleast_2d(x), nodes)[0]
        ky = kernel_matrix(kernel, space, fan, nodes)
        best = max(best, float(np.max(np.abs(ky - kx[None, :]), axis=0) @ weights))
    return best


@dataclass
class MembershipReport:
    """Outcome of checking (LB) and (C) for a kernel/space pair."""

    passed: bool
    lower_bound_passed: bool
    modulus_passed: bool
    min_degree: float
    degree_margin: float | None
    modulus_rows: list[dict] = field(default_factory=list)
    worst_modulus_margin: float = math.inf
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "lower_bound_passed": self.lower_bound_passed,
            "modulus_passed": self.modulus_passed,
            "min_degree": self.min_degree,
            "degree_margin": self.degree_margin,
            "worst_modulus_margin": None if math.isinf(self.worst_modulus_margin) else self.worst_modulus_margin,
            "modulus_rows": self.modulus_rows,
            "notes": self.notes,
        }


def verify_membership(kernel: Kernel, space: Space, grid: int = 256, deltas=None,
                      probe_count: int = 64, resolution: int | None = None) -> MembershipReport:
    """Check ``inf d_mu > a`` on a grid and ``omega(delta) <= C_omega delta**m'``.

    An undeclared modulus is read as ``omega = 0``.  Failures are recorded in
    the report, never raised.
    """
    if grid < 2:
        raise ConfigError("grid must have at least two points")
    notes = []
    dmin = float(np.min(degree_field(kernel, space, resolution)(space.probe_grid(grid))))
    if kernel.a is None:
        notes.append("lower bound a undeclared")
        lb_ok, margin = False, None
    else:
        margin = dmin - kernel.a
        lb_ok = margin > 0.0
        if not lb_ok:
            notes.append(f"(LB) fails: min degree {dmin:.6g} <= a = {kernel.a:.6g}")
    if deltas is None:
        deltas = space.diameter * np.logspace(-3, -1, 5)
    c_omega = kernel.C_omega if kernel.C_omega is not None else 0.0
    m_prime = kernel.m_prime if kernel.m_prime is not None else 1.0
    rows, worst = [], math.inf
    for delta in deltas:
        est = modulus_estimate(kernel, space, float(delta), probe_count, resolution)
        bound = c_omega * float(delta) ** m_prime
        rows.append({"delta": float(delta), "estimate": est, "bound": bound, "margin": bound - est})
        worst = min(worst, bound - est)
    mod_ok = worst >= 0.0
    if not mod_ok:
        notes.append(f"(C) fails: modulus estimate exceeds declared bound by {-worst:.3g}")
    return MembershipReport(lb_ok and mod_ok, lb_ok, mod_ok, dmin, margin, rows, worst, notes)
