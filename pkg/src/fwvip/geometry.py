"""Feasible sets with exact linear minimization oracles and projections.

Supported sets: axis-aligned boxes, scaled simplices (nonnegative vectors
with a fixed coordinate sum), and Cartesian products of those. All
operations are pure functions of immutable set descriptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MEMBERSHIP_RTOL = 1e-9


def _as_vector(x, dim, name="point"):
    v = np.asarray(x, dtype=float)
    if v.shape != (dim,):
        raise ValueError(f"{name} has shape {v.shape}, expected ({dim},)")
    return v


@dataclass(frozen=True)
class Box:
    """Axis-aligned box {x : lower <= x <= upper}."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower/upper must be 1-d arrays of equal length")
        if np.any(lo > hi):
            raise ValueError("box requires lower[i] <= upper[i]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def lmo(self, direction) -> np.ndarray:
        d = _as_vector(direction, self.dim, "direction")
        # zero components tie between both bounds; take the lower one
        return np.where(d > 0, self.lower, self.upper)

    def project(self, point) -> np.ndarray:
        p = _as_vector(point, self.dim)
        return np.clip(p, self.lower, self.upper)

    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, point, rtol=MEMBERSHIP_RTOL) -> bool:
        p = _as_vector(point, self.dim)
        tol = rtol * max(1.0, float(np.max(self.upper - self.lower)))
        return bool(np.all(p >= self.lower - tol) and np.all(p <= self.upper + tol))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(n, self.dim))

    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)


def simplex_projection(point: np.ndarray, mass: float) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum(x) = mass} by the sorting method."""
    v = np.asarray(point, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - mass
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


@dataclass(frozen=True)
class ScaledSimplex:
    """{x in R^dim : x >= 0, sum(x) = mass}. dim = 1 degenerates to the point (mass,)."""

    dim: int
    mass: float

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if self.mass <= 0:
            raise ValueError("mass must be positive")

    def lmo(self, direction) -> np.ndarray:
        d = _as_vector(direction, self.dim, "direction")
        out = np.zeros(self.dim)
        out[int(np.argmin(d))] = self.mass  # argmin takes the lowest index on ties
        return out

    def project(self, point) -> np.ndarray:
        p = _as_vector(point, self.dim)
        if self.dim == 1:
            return np.array([self.mass])
        return simplex_projection(p, self.mass)

    def diameter(self) -> float:
        if self.dim == 1:
            return 0.0
        return self.mass * np.sqrt(2.0)

    def contains(self, point, rtol=MEMBERSHIP_RTOL) -> bool:
        p = _as_vector(point, self.dim)
        tol = rtol * self.mass
        return bool(np.all(p >= -tol) and abs(float(p.sum()) - self.mass) <= tol)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.mass * rng.dirichlet(np.ones(self.dim), size=n)

    def center(self) -> np.ndarray:
        return np.full(self.dim, self.mass / self.dim)


@dataclass(frozen=True)
class ProductSet:
    """Cartesian product of feasible sets; LMO and projection factorize blockwise."""

    blocks: tuple
    offsets: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if not self.blocks:
            raise ValueError("product of zero blocks")
        off, start = [], 0
        for b in self.blocks:
            off.append((start, start + b.dim))
            start += b.dim
        object.__setattr__(self, "offsets", tuple(off))

    @property
    def dim(self) -> int:
        return self.offsets[-1][1]

    def split(self, x):
        return [x[a:b] for a, b in self.offsets]

    def _blockwise(self, op, x):
        x = _as_vector(x, self.dim)
        return np.concatenate(
            [getattr(blk, op)(x[a:b]) for blk, (a, b) in zip(self.blocks, self.offsets)]
        )

    def lmo(self, direction) -> np.ndarray:
        return self._blockwise("lmo", direction)

    def project(self, point) -> np.ndarray:
        return self._blockwise("project", point)

    def diameter(self) -> float:
        return float(np.sqrt(sum(b.diameter() ** 2 for b in self.blocks)))

    def contains(self, point, rtol=MEMBERSHIP_RTOL) -> bool:
        p = _as_vector(point, self.dim)
        return all(
            blk.contains(p[a:b], rtol) for blk, (a, b) in zip(self.blocks, self.offsets)
        )

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.hstack([b.sample(rng, n) for b in self.blocks])

    def center(self) -> np.ndarray:
        return np.concatenate([b.center() for b in self.blocks])


def lmo(feasible_set, direction) -> np.ndarray:
    """Vertex minimizing <x, direction> over the set (ties to the lowest index)."""
    return feasible_set.lmo(direction)


def project(feasible_set, point) -> np.ndarray:
    """Euclidean projection of point onto the set."""
    return feasible_set.project(point)


def diameter(feasible_set) -> float:
    """Exact Euclidean diameter of the set."""
    return feasible_set.diameter()
