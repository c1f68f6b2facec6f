"""Cech complexes on the flat torus.

A set of k+1 points spans a k-simplex of C(P, r) when the closed r-balls around
them share a point, i.e. when their smallest enclosing ball has radius <= r.
Candidates are cliques of the 2r-proximity graph, expanded in lexicographic
order; every miniball is computed in one Euclidean chart centred on the
simplex's lowest-index vertex.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, InputError
from .geometry import GeometryContext
from .sampling import PointCloud


@dataclass(frozen=True)
class Simplex:
    vertices: tuple
    filtration_radius: float = 0.0

    def __post_init__(self):
        v = tuple(int(x) for x in self.vertices)
        if any(a >= b for a, b in zip(v, v[1:])):
            raise InputError(f"simplex vertices must be strictly increasing: {v}")
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    def facets(self) -> Iterator[tuple]:
        v = self.vertices
        for j in range(len(v)):
            yield v[:j] + v[j + 1:]


@dataclass(frozen=True, eq=False)
class CechComplex:
    """Simplices of dimensions 0..max_sdim, one lexicographically sorted array per dimension.

    ``vertices[k]`` is an int array of shape (m_k, k+1) and ``radii[k]`` the
    matching miniball radii.
    """

    dim: int
    radius: float
    vertices: list = field(repr=False)
    radii: list = field(repr=False)

    @property
    def max_sdim(self) -> int:
        return len(self.vertices) - 1

    @property
    def n_vertices(self) -> int:
        return len(self.vertices[0]) if self.vertices else 0

    def counts(self) -> list[int]:
        return [len(v) for v in self.vertices]

    def simplices(self, k: int) -> list[Simplex]:
        if not 0 <= k <= self.max_sdim:
            return []
        return [Simplex(tuple(v), float(rad)) for v, rad in zip(self.vertices[k].tolist(), self.radii[k])]

    def __iter__(self) -> Iterator[Simplex]:
        for k in range(self.max_sdim + 1):
            yield from self.simplices(k)

    def __contains__(self, simplex) -> bool:
        v = tuple(simplex.vertices if isinstance(simplex, Simplex) else simplex)
        k = len(v) - 1
        if not 0 <= k <= self.max_sdim or len(self.vertices[k]) == 0:
            return False
        arr = self.vertices[k]
        lo, hi = 0, len(arr)
        while lo < hi:
            mid = (lo + hi) // 2
            if tuple(arr[mid]) < v:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(arr) and tuple(arr[lo]) == v

    def alternating_count(self) -> int:
        return int(sum((-1) ** k * c for k, c in enumerate(self.counts())))


def from_simplices(simplices: Sequence, dim: int, radius: float = float("nan"),
                   max_sdim: int | None = None) -> CechComplex:
    """Assemble a complex from explicit simplices (tuples or ``Simplex``); faces are added.

    Dimensions up to ``max_sdim`` (default ``max(dim + 1, top)``) are present, possibly empty.
    """
    radii: dict[tuple, float] = {}
    for s in simplices:
        if isinstance(s, Simplex):
            v, rad = s.vertices, s.filtration_radius
        else:
            v, rad = tuple(sorted(int(x) for x in s)), 0.0
        stack = [v]
        while stack:
            t = stack.pop()
            if t in radii and radii[t] >= rad:
                continue
            radii[t] = max(rad, radii.get(t, 0.0))
            if len(t) > 1:
                stack.extend(t[:j] + t[j + 1:] for j in range(len(t)))
    top = max((len(v) - 1 for v in radii), default=0)
    if max_sdim is None:
        max_sdim = max(top, dim + 1)
    verts, rads = [], []
    for k in range(max_sdim + 1):
        keys = sorted(v for v in radii if len(v) == k + 1)
        verts.append(np.array(keys, dtype=np.int64).reshape(-1, k + 1))
        rads.append(np.array([radii[v] for v in keys], dtype=float))
    return CechComplex(dim=dim, radius=radius, vertices=verts, radii=rads)


def miniball_radius(points) -> tuple[float, np.ndarray]:
    """Smallest enclosing ball of at most d+2 Euclidean points: ``(radius, center)``."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0 or len(pts) == 0:
        raise InputError("miniball of an empty point set")
    return kernels.miniball(pts)


def _check_radius(r: float, ctx: GeometryContext) -> None:
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    if r >= ctx.r_max:
        raise DomainError(f"radius {r} exceeds r_max = r_conv/3 = {ctx.r_max:.6g}")


def neighbor_graph(cloud: PointCloud, r: float) -> tuple[np.ndarray, np.ndarray]:
    """CSR adjacency (indptr, indices) of pairs at toroidal distance <= 2r."""
    return kernels.neighbor_graph(np.ascontiguousarray(cloud.coords), 2.0 * r)


def neighbor_pairs(cloud: PointCloud, r: float) -> np.ndarray:
    """All index pairs (i < j) at toroidal distance <= 2r, as an (m, 2) array."""
    if not 0 <= r < 1.0 / 6.0:
        raise DomainError(f"radius {r} outside [0, r_max)")
    indptr, indices = neighbor_graph(cloud, r)
    src = np.repeat(np.arange(len(cloud), dtype=np.int64), np.diff(indptr))
    keep = indices > src
    return np.column_stack([src[keep], indices[keep]])


def _enumerate(cloud: PointCloud, r: float, max_sdim: int, crit_upto: int, store: bool):
    indptr, indices = neighbor_graph(cloud, r)
    return kernels.cech_enumerate(np.ascontiguousarray(cloud.coords), indptr, indices,
                                  float(r), int(max_sdim), int(crit_upto), bool(store))


def build_complex(cloud: PointCloud, r: float, max_sdim: int | None = None,
                  ctx: GeometryContext | None = None) -> CechComplex:
    """Cech complex C(P, r) truncated at simplex dimension ``max_sdim`` (default d+1)."""
    ctx = ctx or GeometryContext(cloud.dim)
    if cloud.dim != ctx.dim:
        raise InputError("cloud dimension does not match the geometry context")
    _check_radius(r, ctx)
    if max_sdim is None:
        max_sdim = ctx.dim + 1
    if not 1 <= max_sdim <= ctx.dim + 1:
        raise InputError(f"max_sdim must lie in 1..{ctx.dim + 1}")
    simp, _, _ = _enumerate(cloud, r, max_sdim, 0, True)
    return CechComplex(dim=ctx.dim, radius=float(r),
                       vertices=[v for v, _ in simp], radii=[rad for _, rad in simp])


def write_complex(cplx: CechComplex, path) -> None:
    """One ``dim;v0,v1,...;radius`` line per simplex, sorted by (dim, vertices).

    A leading ``#`` line records the ambient dimension and build radius.
    """
    with open(path, "w") as fh:
        fh.write(f"# d={cplx.dim} r={cplx.radius:.17g} max_sdim={cplx.max_sdim}\n")
        for k in range(cplx.max_sdim + 1):
            for verts, rad in zip(cplx.vertices[k].tolist(), cplx.radii[k].tolist()):
                fh.write(f"{k};{','.join(map(str, verts))};{rad:.17g}\n")


def read_complex(path) -> CechComplex:
    meta = {}
    rows: dict[int, list] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    key, _, val = tok.partition("=")
                    meta[key] = val
                continue
            try:
                k_s, v_s, r_s = line.split(";")
                k = int(k_s)
                verts = tuple(int(x) for x in v_s.split(","))
                rad = float(r_s)
            except ValueError:
                raise InputError(f"{path}:{lineno}: malformed simplex line {line!r}") from None
            if len(verts) != k + 1:
                raise InputError(f"{path}:{lineno}: {k}-simplex needs {k + 1} vertices")
            rows.setdefault(k, []).append((verts, rad))
    top = max(rows, default=0)
    max_sdim = int(meta.get("max_sdim", top))
    dim = int(meta["d"]) if "d" in meta else max(max_sdim - 1, 1)
    radius = float(meta.get("r", "nan"))
    verts, rads = [], []
    for k in range(max_sdim + 1):
        items = sorted(rows.get(k, []))
        verts.append(np.array([v for v, _ in items], dtype=np.int64).reshape(-1, k + 1))
        rads.append(np.array([rad for _, rad in items], dtype=float))
    return CechComplex(dim=dim, radius=radius, vertices=verts, radii=rads)
