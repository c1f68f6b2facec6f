"""Seeded homogeneous Poisson processes on the flat torus."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError, InputError
from .geometry import GeometryContext, TorusPoint, canonicalize, minimal_image


@dataclass(frozen=True)
class RngStream:
    """Independent random stream ``stream_index`` derived from ``master_seed``.

    Streams come from ``SeedSequence(master_seed, spawn_key=(stream_index,))``,
    so stream k is available without touching streams 0..k-1.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed < 2 ** 64:
            raise DomainError("master_seed must be a 64-bit unsigned integer")
        if self.stream_index < 0:
            raise DomainError("stream_index must be nonnegative")

    @property
    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))

    @property
    def seed(self) -> int:
        """64-bit digest identifying this stream (recorded in trial output)."""
        return int(self.seed_sequence.generate_state(1, np.uint64)[0])

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence))


@dataclass(frozen=True, eq=False)
class PointCloud:
    """A finite point set on T^d, stored as a canonical (N, d) array."""

    coords: np.ndarray
    intensity_n: float = float("nan")
    seed: int = 0
    dim: int = field(default=0)

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.ndim == 1 and c.size == 0:
            c = c.reshape(0, self.dim or 1)
        if c.ndim != 2:
            raise InputError("coords must be an (N, d) array")
        c = np.ascontiguousarray(canonicalize(c))
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)
        object.__setattr__(self, "dim", c.shape[1])

    def __len__(self) -> int:
        return self.coords.shape[0]

    @property
    def points(self) -> tuple:
        return tuple(TorusPoint(tuple(row)) for row in self.coords)

    @cached_property
    def kdtree(self) -> cKDTree:
        return cKDTree(self.coords, boxsize=1.0)

    def same_points(self, other: "PointCloud") -> bool:
        return self.coords.shape == other.coords.shape and np.array_equal(self.coords, other.coords)


def sample_poisson(n: float, ctx: GeometryContext, rng: RngStream | np.random.Generator) -> PointCloud:
    """Homogeneous Poisson process of intensity ``n`` on T^d.

    Draws N ~ Poisson(n), then N i.i.d. uniform points in [0, 1)^d.
    """
    if not (math.isfinite(n) and n > 0):
        raise DomainError(f"intensity must be positive and finite, got {n}")
    if isinstance(rng, RngStream):
        gen, seed = rng.generator(), rng.seed
    else:
        gen, seed = rng, 0
    count = int(gen.poisson(n))
    coords = gen.random((count, ctx.dim))
    return PointCloud(coords, intensity_n=float(n), seed=seed, dim=ctx.dim)


def count_in_ball(cloud: PointCloud, center, r: float, ctx: GeometryContext | None = None) -> int:
    """Number of cloud points within toroidal distance ``r`` (closed ball) of ``center``."""
    r_conv = ctx.r_conv if ctx is not None else 0.5
    if not 0 <= r < r_conv:
        raise DomainError(f"radius {r} outside [0, {r_conv})")
    if len(cloud) == 0:
        return 0
    c = canonicalize(np.atleast_1d(np.asarray(center, dtype=float)))
    if c.size != cloud.dim:
        raise InputError("dimension mismatch")
    diff = minimal_image(cloud.coords - c)
    return int(np.count_nonzero((diff * diff).sum(1) <= r * r))


def write_cloud_csv(cloud: PointCloud, path) -> None:
    """Write ``x0,...,x{d-1}`` header and one row per point at 17 significant digits.

    ``path`` may also be an open text stream.
    """
    if hasattr(path, "write"):
        _write_rows(cloud, path)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(cloud, fh)


def _write_rows(cloud: PointCloud, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([f"x{i}" for i in range(cloud.dim)])
    for row in cloud.coords:
        w.writerow([f"{v:.17g}" for v in row])


def read_cloud_csv(path) -> PointCloud:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputError(f"{path}: empty file")
    header = rows[0]
    if not header or any(h != f"x{i}" for i, h in enumerate(header)):
        raise InputError(f"{path}: header must be x0,...,x{{d-1}}")
    d = len(header)
    data = np.array([[float(v) for v in row] for row in rows[1:] if row], dtype=float)
    if data.size == 0:
        data = np.zeros((0, d))
    if data.shape[1] != d:
        raise InputError(f"{path}: rows do not match header width {d}")
    return PointCloud(data, dim=d)


def read_cloud(path: str | Path) -> PointCloud:
    return read_cloud_csv(path)
