"""Geometry of the flat cubical torus T^d = R^d / Z^d.

Points are stored with canonical coordinates in [0, 1). Distances use the
toroidal metric, and small clusters can be lifted isometrically into R^d
because every ball of radius below ``R_CONV`` embeds in Euclidean space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import DomainError, InputError, PreconditionError

R_CONV = 0.5
R_MAX = R_CONV / 3.0


def canonicalize(coords) -> np.ndarray:
    """Reduce coordinates mod 1 into [0, 1), guarding the ``-tiny % 1 == 1.0`` case."""
    x = np.mod(np.asarray(coords, dtype=float), 1.0)
    x[x >= 1.0] = 0.0
    return x


@dataclass(frozen=True)
class TorusPoint:
    coords: tuple

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coords, dtype=float))
        if c.ndim != 1 or c.size < 1:
            raise InputError("a torus point needs at least one coordinate")
        if not np.all(np.isfinite(c)):
            raise InputError("coordinates must be finite")
        object.__setattr__(self, "coords", tuple(float(v) for v in canonicalize(c)))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d, pi^(d/2) / Gamma(d/2 + 1)."""
    if d < 0:
        raise DomainError("dimension must be nonnegative")
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0))


@dataclass(frozen=True)
class GeometryContext:
    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise InputError(f"dimension must be a positive integer, got {self.dim!r}")

    @property
    def r_conv(self) -> float:
        return R_CONV

    @property
    def r_max(self) -> float:
        return R_MAX

    @property
    def omega_d(self) -> float:
        return unit_ball_volume(self.dim)

    def radius_for_lambda(self, lam: float, n: float) -> float:
        """Radius r with omega_d * n * r^d = lam."""
        if lam < 0 or n <= 0:
            raise DomainError("need lam >= 0 and n > 0")
        return (lam / (self.omega_d * n)) ** (1.0 / self.dim)

    def lambda_for_radius(self, r: float, n: float) -> float:
        return self.omega_d * n * r ** self.dim


def _as_coords(p) -> np.ndarray:
    return np.atleast_1d(np.asarray(p, dtype=float))


def minimal_image(delta: np.ndarray) -> np.ndarray:
    """Shortest representative of a displacement modulo Z^d (componentwise)."""
    return delta - np.floor(delta + 0.5)


def toroidal_distance(a, b) -> float:
    """Toroidal distance between two points of T^d.

    For canonical coordinates every component difference lies in (-1, 1), so
    the minimum over integer shifts is attained in {-1, 0, 1}^d and reduces to
    the componentwise minimal image.
    """
    x, y = canonicalize(_as_coords(a)), canonicalize(_as_coords(b))
    if x.shape != y.shape:
        raise InputError(f"dimension mismatch: {x.size} vs {y.size}")
    return float(np.linalg.norm(minimal_image(x - y)))


def pairwise_toroidal(points: np.ndarray) -> np.ndarray:
    """Dense toroidal distance matrix; O(n^2) memory, used by oracles and small inputs."""
    p = np.asarray(points, dtype=float)
    diff = minimal_image(p[:, None, :] - p[None, :, :])
    return np.sqrt((diff * diff).sum(-1))


def lift_cluster(points: Iterable, center, radius: float) -> np.ndarray:
    """Lift points near ``center`` to R^d with ``center`` at the origin.

    Every point must lie within ``radius`` of the center and ``radius`` must be
    below ``R_CONV``; the lift then preserves all pairwise distances.
    """
    if not 0 <= radius < R_CONV:
        raise DomainError(f"lift radius {radius} must lie in [0, r_conv={R_CONV})")
    c = canonicalize(_as_coords(center))
    pts = np.array([canonicalize(_as_coords(p)) for p in points], dtype=float)
    if pts.size == 0:
        return np.zeros((0, c.size))
    pts = pts.reshape(len(pts), -1)
    if pts.shape[1] != c.size:
        raise InputError("dimension mismatch between points and center")
    lifted = minimal_image(pts - c)
    dist = np.linalg.norm(lifted, axis=1)
    if np.any(dist > radius):
        raise PreconditionError(
            f"point at toroidal distance {dist.max():.6g} exceeds lift radius {radius}")
    return lifted


def ball_volume(r: float, ctx: GeometryContext) -> float:
    """Volume omega_d r^d of an r-ball on the torus (r below the convexity radius)."""
    if not 0 <= r < ctx.r_conv:
        raise DomainError(f"radius {r} outside [0, r_conv={ctx.r_conv})")
    return ctx.omega_d * r ** ctx.dim


@lru_cache(maxsize=64)
def _intersection_volume_unit(delta: float, d: int) -> float:
    if delta >= 2.0:
        return 0.0
    upper = math.acos(delta / 2.0)
    val, _ = integrate.quad(lambda t: math.sin(t) ** d, 0.0, upper,
                            epsabs=1e-10, epsrel=1e-12, limit=200)
    return 2.0 * unit_ball_volume(d - 1) * val


def intersection_volume_unit(delta: float, ctx: GeometryContext) -> float:
    """Volume of the intersection of two unit d-balls whose centers are ``delta`` apart.

    Evaluates 2 omega_{d-1} * int_0^{arccos(delta/2)} sin^d(t) dt by adaptive
    quadrature.
    """
    delta = float(delta)
    if not 0.0 <= delta <= 2.0:
        raise DomainError(f"center separation {delta} outside [0, 2]")
    return _intersection_volume_unit(delta, ctx.dim)


def lens_area(delta: float, radius: float = 1.0) -> float:
    """Closed-form area of two overlapping discs of equal radius (planar lens)."""
    r = radius
    if delta >= 2 * r:
        return 0.0
    return 2 * r * r * math.acos(delta / (2 * r)) - 0.5 * delta * math.sqrt(4 * r * r - delta * delta)


def as_coord_array(points: Sequence, dim: int | None = None) -> np.ndarray:
    """Stack TorusPoints or coordinate rows into a canonical (n, d) float array."""
    arr = np.array([_as_coords(p) for p in points], dtype=float) if len(points) else None
    if arr is None:
        return np.zeros((0, dim or 0))
    if dim is not None and arr.shape[1] != dim:
        raise InputError(f"expected {dim}-dimensional points, got {arr.shape[1]}")
    return canonicalize(arr)
