"""Critical points of the distance function rho(x) = min_p |x - p| on T^d.

A (k+1)-subset Y of the cloud generates an index-k critical point exactly when
the circumcenter C(Y) of its points lies strictly inside the simplex they span
and no other cloud point lies strictly inside the circumball B(Y); the
critical value is the circumradius R(Y). Counting these gives C_k(r), and
sum (-1)^k C_k(r) is the Euler characteristic of the Cech complex at r.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Delaunay, QhullError
from scipy.special import factorial, gammainc

from . import kernels
from .cech import _enumerate
from .errors import DegenerateInputError, DomainError, InputError
from .geometry import GeometryContext, TorusPoint, minimal_image
from .sampling import PointCloud


def circumsphere(lifted_points) -> tuple[np.ndarray, float, np.ndarray]:
    """Center, radius and barycentric coordinates of the sphere through k+1 affinely independent points.

    The center is taken in the affine hull of the points.
    """
    pts = np.atleast_2d(np.asarray(lifted_points, dtype=float))
    m, d = pts.shape
    if not 2 <= m <= d + 1:
        raise InputError(f"circumsphere needs 2..{d + 1} points in R^{d}, got {m}")
    A = pts[1:] - pts[0]
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= kernels.SV_CUTOFF * max(sv[0], 1e-300):
        raise DegenerateInputError("points are affinely dependent")
    c, r2, bary = kernels.circumsphere_local(pts)
    return np.asarray(c), math.sqrt(r2), np.asarray(bary)


@dataclass(frozen=True)
class CriticalCandidate:
    subset_indices: tuple
    center: TorusPoint
    circumradius: float
    index_k: int
    barycentric: tuple
    is_critical: bool


@dataclass(frozen=True, eq=False)
class CriticalCensus:
    """Critical points of index 1..d with value <= ``radius``; minima are the cloud points.

    ``vertices[k-1]`` (m, k+1), ``values[k-1]`` (m,), ``centers[k-1]`` (m, d)
    and ``barycentric[k-1]`` (m, k+1) describe the index-k points.
    """

    dim: int
    radius: float
    n_points: int
    vertices: list = field(repr=False)
    values: list = field(repr=False)
    centers: list = field(repr=False)
    barycentric: list = field(repr=False)
    ties: int = 0

    @property
    def counts(self) -> tuple:
        return (self.n_points,) + tuple(len(v) for v in self.values)

    @property
    def chi_morse(self) -> int:
        return int(sum((-1) ** k * c for k, c in enumerate(self.counts)))

    def counts_at(self, r: float) -> tuple:
        """C_0..C_d at a smaller radius ``r`` (critical points do not depend on r)."""
        if r > self.radius:
            raise DomainError(f"census was taken up to {self.radius}, cannot answer r={r}")
        return (self.n_points,) + tuple(int(np.count_nonzero(v <= r)) for v in self.values)

    def chi_at(self, r: float) -> int:
        return int(sum((-1) ** k * c for k, c in enumerate(self.counts_at(r))))

    def candidates(self, k: int) -> list[CriticalCandidate]:
        if not 1 <= k <= self.dim:
            raise InputError(f"index {k} outside 1..{self.dim}")
        return [CriticalCandidate(tuple(v), TorusPoint(tuple(c)), float(R), k, tuple(b), True)
                for v, R, c, b in zip(self.vertices[k - 1].tolist(), self.values[k - 1],
                                      self.centers[k - 1], self.barycentric[k - 1].tolist())]


def _check_radius(r: float, ctx: GeometryContext) -> None:
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    if r >= ctx.r_max:
        raise DomainError(f"radius {r} exceeds r_max = r_conv/3 = {ctx.r_max:.6g}")


def _census_from_kernel(crit, ties, n, d, r) -> CriticalCensus:
    return CriticalCensus(dim=d, radius=float(r), n_points=n,
                          vertices=[c[0] for c in crit], values=[c[1] for c in crit],
                          centers=[c[2] for c in crit], barycentric=[c[3] for c in crit],
                          ties=int(ties))


def enumerate_critical_points(cloud: PointCloud, r: float,
                              ctx: GeometryContext | None = None) -> CriticalCensus:
    """All critical points of index 0..d with critical value <= r."""
    ctx = ctx or GeometryContext(cloud.dim)
    _check_radius(r, ctx)
    d = ctx.dim
    _, crit, ties = _enumerate(cloud, r, 0, d, False)
    return _census_from_kernel(crit, ties, len(cloud), d, r)


def critical_candidate(cloud: PointCloud, subset, ctx: GeometryContext | None = None) -> CriticalCandidate:
    """Classify one subset Y: circumsphere data plus the two criticality conditions."""
    ctx = ctx or GeometryContext(cloud.dim)
    idx = tuple(sorted(int(i) for i in subset))
    if len(set(idx)) != len(idx) or not 2 <= len(idx) <= ctx.dim + 1:
        raise InputError("subset must hold 2..d+1 distinct indices")
    base = cloud.coords[idx[0]]
    lifted = minimal_image(cloud.coords[list(idx)] - base)
    c, R, bary = circumsphere(lifted)
    inside = bool(np.all(bary > kernels.BARY_TOL))
    others = np.setdiff1d(np.arange(len(cloud)), idx)
    diff = minimal_image(cloud.coords[others] - (base + c))
    empty = bool(np.all((diff * diff).sum(1) >= R * R * (1.0 - kernels.BALL_TOL)))
    return CriticalCandidate(idx, TorusPoint(tuple(base + c)), R, len(idx) - 1,
                             tuple(bary.tolist()), inside and empty)


def _lambda(n: float, r: float, ctx: GeometryContext) -> float:
    if n <= 0 or r < 0:
        raise DomainError("need n > 0 and r >= 0")
    return ctx.lambda_for_radius(r, n)


def expected_Ck(n: float, r: float, k: int, Dk: float, ctx: GeometryContext) -> float:
    """D_k n (1 - e^{-L} sum_{j<k} L^j / j!) with L = omega_d n r^d."""
    if not 1 <= k <= ctx.dim:
        raise DomainError(f"index {k} outside 1..{ctx.dim}")
    if not Dk > 0:
        raise DomainError("D_k must be positive")
    lam = _lambda(n, r, ctx)
    # regularized lower incomplete gamma P(k, L) = 1 - e^{-L} sum_{j<k} L^j/j!
    return float(Dk * n * gammainc(k, lam))


def euler_coefficients(D) -> np.ndarray:
    """A_0..A_{d-1} of E[chi] = n e^{-L} sum_j A_j L^j implied by D_1..D_d.

    A_j = -(1/j!) sum_{k>j} (-1)^k D_k; the identity A_0 = 1 holds iff
    sum_k (-1)^{k-1} D_k = 1.
    """
    D = np.asarray(D, dtype=float)
    d = len(D)
    signs = (-1.0) ** np.arange(1, d + 1)
    return np.array([-(signs[j:] * D[j:]).sum() / factorial(j) for j in range(d)])


def expected_euler(n: float, r: float, A, ctx: GeometryContext) -> float:
    """n e^{-L} (1 + sum_{j=1}^{d-1} A_j L^j)."""
    A = np.atleast_1d(np.asarray(A, dtype=float)) if len(np.atleast_1d(A)) else np.zeros(0)
    if len(A) != ctx.dim - 1:
        raise InputError(f"expected {ctx.dim - 1} coefficients A_1..A_(d-1), got {len(A)}")
    lam = _lambda(n, r, ctx)
    poly = 1.0 + sum(a * lam ** (j + 1) for j, a in enumerate(A))
    return float(n * math.exp(-lam) * poly)


# --- coverage -------------------------------------------------------------

def _lattice_net(dim: int, covering: float) -> tuple[int, float]:
    """Points per axis m and spacing 1/m of a periodic cubic net with covering radius <= ``covering``."""
    h = 2.0 * covering / math.sqrt(dim)
    m = max(1, math.ceil(1.0 / h))
    return m, 1.0 / m


def _net_max_distance(cloud: PointCloud, covering: float, chunk: int = 200_000,
                      stop_above: float = math.inf) -> float:
    """Largest distance from a net point to the cloud; returns early once it exceeds ``stop_above``."""
    m, h = _lattice_net(cloud.dim, covering)
    d = cloud.dim
    axis = (np.arange(m) + 0.5) * h
    tree = cloud.kdtree
    # slabs along the first axis keep memory bounded
    rest = np.array(list(itertools.product(range(m), repeat=d - 1)), dtype=float).reshape(-1, d - 1)
    rest = (rest + 0.5) * h
    per = max(1, chunk // max(len(rest), 1))
    worst = 0.0
    for start in range(0, m, per):
        xs = axis[start:start + per]
        grid = np.column_stack([np.repeat(xs, len(rest)), np.tile(rest, (len(xs), 1))])
        dist, _ = tree.query(grid, k=1)
        worst = max(worst, float(dist.max()))
        if worst > stop_above:
            break
    return worst


def _padded_copies(coords: np.ndarray, margin: float) -> np.ndarray:
    n, d = coords.shape
    out = []
    for shift in itertools.product((-1.0, 0.0, 1.0), repeat=d):
        p = coords + np.asarray(shift)
        keep = np.all((p >= -margin) & (p <= 1.0 + margin), axis=1)
        out.append(p[keep])
    return np.vstack(out)


def _delaunay_max_radius(cloud: PointCloud, margin: float) -> float:
    """Largest circumradius over Delaunay simplices of the padded cloud whose circumcenter lies in [0,1)^d."""
    pts = _padded_copies(cloud.coords, margin)
    tri = Delaunay(pts)
    S = pts[tri.simplices]
    A = S[:, 1:, :] - S[:, :1, :]
    b = 0.5 * (A * A).sum(-1)
    det = np.linalg.det(A)
    scale = np.abs(A).max(axis=(1, 2)) ** cloud.dim
    ok = np.abs(det) > 1e-12 * np.maximum(scale, 1e-300)
    off = np.linalg.solve(A[ok], b[ok][..., None])[..., 0]
    centers = S[ok, 0, :] + off
    radii = np.sqrt((off * off).sum(-1))
    inbox = np.all((centers >= 0.0) & (centers < 1.0), axis=1)
    return float(radii[inbox].max()) if inbox.any() else 0.0


def coverage_radius_1d(cloud: PointCloud) -> float:
    x = np.sort(cloud.coords[:, 0])
    gaps = np.diff(np.concatenate([x, [x[0] + 1.0]]))
    return float(gaps.max()) / 2.0


def is_covered(cloud: PointCloud, r: float, ctx: GeometryContext | None = None) -> bool:
    """Whether the closed r-balls around the cloud cover T^d, i.e. max rho <= r.

    A periodic net with covering radius r/4 settles most cases: a net point
    farther than r from the cloud witnesses non-coverage, and if every net
    point is within 3r/4 the triangle inequality certifies coverage. Otherwise
    rho <= 5r/4 everywhere, so the maximum of rho sits at a Voronoi vertex that
    a Delaunay triangulation of the cloud padded by 5r/4 finds exactly.
    """
    ctx = ctx or GeometryContext(cloud.dim)
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    if r >= ctx.r_max:
        raise DomainError(f"radius {r} exceeds r_max = r_conv/3 = {ctx.r_max:.6g}")
    if len(cloud) == 0:
        return False
    if cloud.dim == 1:
        return coverage_radius_1d(cloud) <= r
    worst = _net_max_distance(cloud, r / 4.0, stop_above=r)
    if worst > r:
        return False
    if worst <= 0.75 * r:
        return True
    try:
        return _delaunay_max_radius(cloud, 1.25 * r * (1.0 + 1e-9)) <= r
    except QhullError as exc:
        raise DegenerateInputError(f"coverage triangulation failed: {exc}") from None
