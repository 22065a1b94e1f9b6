"""Compact metric probability spaces used as sampling domains.

Four kinds are supported: an interval ``[0, L]`` with the absolute-value
metric, a circle of circumference ``C`` with the arc metric, a flat 2-torus,
and a finite point cloud carrying the uniform (counting) measure.  The
measure is always normalized to total mass one.

Points are plain numpy values: floats for the 1-D kinds, ``(n, 2)`` arrays
for the torus and integer indices into the cloud for ``PointCloud``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate
from scipy.spatial.distance import pdist, squareform

from .errors import ConfigError, DomainError, UnsupportedError

__all__ = [
    "Space",
    "Interval",
    "Circle",
    "Torus2",
    "PointCloud",
    "PointSet",
    "make_rng",
    "distance",
    "sample_uniform",
    "ball_measure",
    "covering_number",
    "space_from_dict",
]


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Counter-based Philox generator keyed by ``(seed, *stream)``.

    Streams with distinct keys are statistically independent, so trials can
    run in any order or in parallel and still reproduce.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, stream)])))


class Space:
    """Base class; subclasses are frozen dataclasses."""

    kind: str = ""
    dim: int = 1

    @property
    def diameter(self) -> float:
        raise NotImplementedError

    def validate(self, x) -> np.ndarray:
        raise NotImplementedError

    def distance(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def pairwise(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def ball_measure(self, x, r: float) -> np.ndarray:
        raise UnsupportedError(f"no closed-form ball measure for {self.kind}")

    def covering_number(self, delta: float) -> int:
        raise NotImplementedError

    def quadrature(self, resolution: int) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights of a rule integrating against the uniform measure."""
        raise NotImplementedError

    def probe_grid(self, count: int) -> np.ndarray:
        """Deterministic, roughly evenly spread probe points."""
        raise NotImplementedError

    def perturbation_fan(self, x, delta: float, count: int = 32) -> np.ndarray:
        """``count`` points of ``B_delta(x)`` (open ball) around a single point ``x``."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


def _as_float(x) -> np.ndarray:
    return np.asarray(x, dtype=np.float64)


# Pull the extreme fan points just inside the open ball.
_FAN_SHRINK = 1.0 - 2.0**-20


@dataclass(frozen=True)
class _Line(Space):
    """Shared logic for the 1-D kinds; ``period`` is 0 for the interval."""

    @property
    def extent(self) -> float:
        raise NotImplementedError

    @property
    def period(self) -> float:
        return 0.0

    def validate(self, x) -> np.ndarray:
        x = _as_float(x)
        if not np.all(np.isfinite(x)) or np.any(x < 0.0) or np.any(x > self.extent):
            raise DomainError(f"point outside [0, {self.extent}] for {self.kind}")
        return x

    def _wrap(self, d):
        d = np.abs(d)
        if self.period > 0.0:
            d = np.minimum(d, self.period - d)
        return d

    def distance(self, x, y):
        return self._wrap(self.validate(x) - self.validate(y))

    def pairwise(self, x, y):
        return self._wrap(np.subtract.outer(self.validate(x), self.validate(y)))

    def draw(self, rng, n):
        return rng.random(n) * self.extent

    def quadrature(self, resolution):
        if resolution < 1:
            raise ConfigError("quadrature resolution must be positive")
        h = self.extent / resolution
        nodes = (np.arange(resolution) + 0.5) * h
        return nodes, np.full(resolution, 1.0 / resolution)

    def probe_grid(self, count):
        if self.period > 0.0:
            return np.arange(count) * (self.extent / count)
        return np.linspace(0.0, self.extent, count)

    def perturbation_fan(self, x, delta, count=32):
        y = float(x) + delta * _FAN_SHRINK * np.linspace(-1.0, 1.0, count)
        if self.period > 0.0:
            return np.mod(y, self.period)
        return y[(y >= 0.0) & (y <= self.extent)]


@dataclass(frozen=True)
class Interval(_Line):
    length: float = 1.0
    kind: str = field(default="interval", init=False, repr=False)

    def __post_init__(self):
        if not self.length > 0:
            raise ConfigError("interval length must be positive")

    @property
    def extent(self):
        return self.length

    @property
    def diameter(self):
        return self.length

    def ball_measure(self, x, r):
        x = self.validate(x)
        if r < 0:
            raise DomainError("radius must be non-negative")
        lo = np.maximum(x - r, 0.0)
        hi = np.minimum(x + r, self.length)
        return np.clip(hi - lo, 0.0, None) / self.length

    def covering_number(self, delta):
        return max(1, math.ceil(self.length / (2.0 * delta)))

    def to_dict(self):
        return {"kind": "interval", "length": self.length}


@dataclass(frozen=True)
class Circle(_Line):
    circumference: float = 2.0 * math.pi
    kind: str = field(default="circle", init=False, repr=False)

    def __post_init__(self):
        if not self.circumference > 0:
            raise ConfigError("circumference must be positive")

    @property
    def extent(self):
        return self.circumference

    @property
    def period(self):
        return self.circumference

    @property
    def diameter(self):
        return self.circumference / 2.0

    def ball_measure(self, x, r):
        x = self.validate(x)
        if r < 0:
            raise DomainError("radius must be non-negative")
        return np.full(np.shape(x), min(2.0 * r, self.circumference) / self.circumference)

    def covering_number(self, delta):
        return max(1, math.ceil(self.circumference / (2.0 * delta)))

    def to_dict(self):
        return {"kind": "circle", "circumference": self.circumference}


@dataclass(frozen=True)
class Torus2(Space):
    """Flat torus ``R^2 / (c1 Z x c2 Z)`` with the induced Euclidean metric."""

    circumferences: tuple[float, float] = (2.0 * math.pi, 2.0 * math.pi)
    kind: str = field(default="torus2", init=False, repr=False)
    dim: int = field(default=2, init=False, repr=False)

    def __post_init__(self):
        c = tuple(float(v) for v in self.circumferences)
        if len(c) != 2 or min(c) <= 0:
            raise ConfigError("torus needs two positive circumferences")
        object.__setattr__(self, "circumferences", c)

    @property
    def diameter(self):
        return math.hypot(*self.circumferences) / 2.0

    def validate(self, x):
        x = _as_float(x)
        if x.shape[-1:] != (2,):
            raise DomainError("torus points have shape (..., 2)")
        c = np.asarray(self.circumferences)
        if not np.all(np.isfinite(x)) or np.any(x < 0.0) or np.any(x > c):
            raise DomainError("point outside the torus fundamental domain")
        return x

    def _wrap(self, d):
        d = np.abs(d)
        c = np.asarray(self.circumferences)
        return np.minimum(d, c - d)

    def distance(self, x, y):
        d = self._wrap(self.validate(x) - self.validate(y))
        return np.sqrt(np.sum(d * d, axis=-1))

    def pairwise(self, x, y):
        x = np.atleast_2d(self.validate(x))
        y = np.atleast_2d(self.validate(y))
        return self.distance(x[:, None, :], y[None, :, :])

    def draw(self, rng, n):
        return rng.random((n, 2)) * np.asarray(self.circumferences)

    def ball_measure(self, x, r):
        x = self.validate(x)
        if r < 0:
            raise DomainError("radius must be non-negative")
        c1, c2 = self.circumferences
        if r >= self.diameter:
            value = 1.0
        elif r <= min(c1, c2) / 2.0:
            value = math.pi * r * r / (c1 * c2)
        else:
            # Disk clipped to the fundamental rectangle centred at x.
            def chord(u):
                return 2.0 * min(c2 / 2.0, math.sqrt(max(r * r - u * u, 0.0)))

            area, _ = integrate.quad(chord, -c1 / 2.0, c1 / 2.0, points=[-r, r] if r < c1 / 2 else None, limit=200)
            value = area / (c1 * c2)
        return np.full(x.shape[:-1], value)

    def covering_number(self, delta):
        if delta >= self.diameter:
            return 1
        side = delta * math.sqrt(2.0)
        c1, c2 = self.circumferences
        return math.ceil(c1 / side) * math.ceil(c2 / side)

    def quadrature(self, resolution):
        if resolution < 1:
            raise ConfigError("quadrature resolution must be positive")
        c1, c2 = self.circumferences
        u = (np.arange(resolution) + 0.5) * (c1 / resolution)
        v = (np.arange(resolution) + 0.5) * (c2 / resolution)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        nodes = np.column_stack([uu.ravel(), vv.ravel()])
        return nodes, np.full(len(nodes), 1.0 / len(nodes))

    def probe_grid(self, count):
        side = max(1, int(math.ceil(math.sqrt(count))))
        c1, c2 = self.circumferences
        u = np.arange(side) * (c1 / side)
        v = np.arange(side) * (c2 / side)
        uu, vv = np.meshgrid(u, v, indexing="ij")
        return np.column_stack([uu.ravel(), vv.ravel()])[:count]

    def perturbation_fan(self, x, delta, count=32):
        x = self.validate(x).reshape(2)
        rings = 4
        per_ring = max(1, count // rings)
        radii = delta * _FAN_SHRINK * np.arange(1, rings + 1) / rings
        angles = 2.0 * math.pi * np.arange(per_ring) / per_ring
        offsets = np.concatenate(
            [np.column_stack([rho * np.cos(angles + k * math.pi / per_ring), rho * np.sin(angles + k * math.pi / per_ring)]) for k, rho in enumerate(radii)]
        )
        return np.mod(x + offsets, np.asarray(self.circumferences))

    def to_dict(self):
        return {"kind": "torus2", "circumferences": list(self.circumferences)}


@dataclass(frozen=True, eq=False)
class PointCloud(Space):
    """Finite metric space with the uniform measure on its points.

    Either ``coordinates`` (Euclidean metric) or a precomputed symmetric
    ``distance_matrix`` must be given.  Points of this space are indices.
    """

    coordinates: np.ndarray | None = None
    distance_matrix: np.ndarray | None = None
    kind: str = field(default="pointcloud", init=False, repr=False)

    def __post_init__(self):
        if (self.coordinates is None) == (self.distance_matrix is None):
            raise ConfigError("point cloud needs exactly one of coordinates / distance_matrix")
        if self.coordinates is not None:
            coords = np.asarray(self.coordinates, dtype=np.float64)
            if coords.ndim == 1:
                coords = coords[:, None]
            object.__setattr__(self, "coordinates", coords)
            dist = squareform(pdist(coords)) if len(coords) > 1 else np.zeros((1, 1))
        else:
            dist = np.asarray(self.distance_matrix, dtype=np.float64)
            if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
                raise ConfigError("distance matrix must be square")
            if not np.array_equal(dist, dist.T) or np.any(np.diag(dist) != 0) or np.any(dist < 0):
                raise ConfigError("distance matrix must be symmetric, non-negative, zero on the diagonal")
            object.__setattr__(self, "distance_matrix", dist)
        if len(dist) == 0:
            raise ConfigError("point cloud is empty")
        object.__setattr__(self, "_dist", dist)

    @property
    def size(self) -> int:
        return self._dist.shape[0]

    @property
    def diameter(self):
        return float(self._dist.max())

    @cached_property
    def _insertion_radii(self) -> np.ndarray:
        # Farthest-point traversal: radii[k] is the covering radius of the
        # first k + 1 centres, non-increasing in k.
        d = self._dist[0].copy()
        radii = []
        for _ in range(self.size):
            far = int(np.argmax(d))
            radii.append(d[far])
            d = np.minimum(d, self._dist[far])
        return np.asarray(radii)

    def validate(self, x):
        x = np.asarray(x)
        if x.dtype.kind not in "iu":
            if x.size and not np.all(np.mod(x, 1) == 0):
                raise DomainError("point cloud points are integer indices")
            x = x.astype(np.int64)
        if np.any(x < 0) or np.any(x >= self.size):
            raise DomainError("point index outside the cloud")
        return x

    def distance(self, x, y):
        return self._dist[self.validate(x), self.validate(y)]

    def pairwise(self, x, y):
        return self._dist[np.ix_(np.atleast_1d(self.validate(x)), np.atleast_1d(self.validate(y)))]

    def draw(self, rng, n):
        return rng.integers(0, self.size, size=n)

    def covering_number(self, delta):
        radii = self._insertion_radii
        return min(self.size, int(np.count_nonzero(radii > delta)) + 1)

    def quadrature(self, resolution=None):
        return np.arange(self.size), np.full(self.size, 1.0 / self.size)

    def probe_grid(self, count):
        if count >= self.size:
            return np.arange(self.size)
        return np.unique(np.linspace(0, self.size - 1, count).round().astype(np.int64))

    def perturbation_fan(self, x, delta, count=32):
        row = self._dist[int(self.validate(x))]
        near = np.flatnonzero(row < delta)
        return near[np.argsort(row[near], kind="stable")][:count]

    def to_dict(self):
        if self.distance_matrix is not None:
            return {"kind": "pointcloud", "distance_matrix": self._dist.tolist()}
        return {"kind": "pointcloud", "coordinates": self.coordinates.tolist()}


@dataclass(frozen=True, eq=False)
class PointSet:
    """An i.i.d. uniform sample ``X_1, ..., X_n`` of ``space``."""

    space: Space
    points: np.ndarray
    seed: int | None = None

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self):
        return self.n


def distance(space: Space, x, y):
    """Intrinsic distance between points (broadcasting)."""
    return space.distance(x, y)


def sample_uniform(space: Space, n: int, seed: int, stream: tuple[int, ...] = ()) -> PointSet:
    """Draw ``n`` i.i.d. uniform points.

    Samples are nested: the first ``m`` points of a size-``n`` draw equal the
    size-``m`` draw for the same ``(seed, stream)``.
    """
    if n < 0:
        raise DomainError("sample size must be non-negative")
    rng = make_rng(seed, *stream)
    pts = space.draw(rng, int(n))
    return PointSet(space, pts, seed)


def ball_measure(space: Space, x, r: float):
    """``mu(B_r(x))`` under the normalized uniform measure."""
    return space.ball_measure(x, r)


def covering_number(space: Space, delta: float) -> int:
    """Number of radius-``delta`` balls covering the space.

    Exact for the 1-D kinds (closed-ball convention ``ceil(L / 2 delta)``),
    an upper bound for the torus and point clouds.
    """
    if not delta > 0:
        raise DomainError("delta must be positive")
    if delta >= space.diameter:
        return 1
    return space.covering_number(delta)


def space_from_dict(spec: dict) -> Space:
    spec = dict(spec)
    kind = spec.pop("kind", None)
    allowed = {
        "interval": {"length"},
        "circle": {"circumference"},
        "torus2": {"circumferences"},
        "pointcloud": {"coordinates", "distance_matrix"},
    }
    if kind not in allowed:
        raise ConfigError(f"unknown space kind {kind!r}")
    unknown = set(spec) - allowed[kind]
    if unknown:
        raise ConfigError(f"unknown keys for {kind}: {sorted(unknown)}")
    try:
        if kind == "interval":
            return Interval(float(spec["length"]))
        if kind == "circle":
            return Circle(float(spec["circumference"]))
        if kind == "torus2":
            return Torus2(tuple(spec["circumferences"]))
        return PointCloud(coordinates=spec.get("coordinates"), distance_matrix=spec.get("distance_matrix"))
    except KeyError as exc:
        raise ConfigError(f"missing key {exc.args[0]!r} for {kind}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
