"""Theta-cycles: index-k critical points that provably create a new k-cycle.

A critical (k+1)-subset Y counts toward beta_k^eps(r) when its value R(Y)
lies in (r', r], the closed r''-ball around C(Y) holds no cloud point outside
Y, the shape parameter phi(Y) is at least eps, and the annulus
A_phi(Y) = {x : phi R <= |x - C(Y)| <= R} is already covered by the R-balls.
The last condition is certified on a finite net, so the count is a lower
bound for the number that satisfy it exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError
from .geometry import GeometryContext, TorusPoint, minimal_image
from .morse import CriticalCandidate, CriticalCensus, enumerate_critical_points
from .sampling import PointCloud

DEFAULT_EPSILON = 0.1
# relative net covering radius used when counting
DEFAULT_NET_ETA = 1.0 / 16.0


@dataclass(frozen=True)
class ThetaParams:
    epsilon: float
    lam: float
    r: float

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not self.lam > 1:
            raise DomainError(f"Theta-cycle windows need Lambda > 1, got {self.lam}")

    @property
    def delta(self) -> float:
        return self.lam ** -2

    @property
    def r_prime(self) -> float:
        return self.r * (1.0 - self.delta)

    @property
    def r_dprime(self) -> float:
        return self.r * (1.0 + math.sqrt(2.0 * self.delta))


@dataclass(frozen=True)
class ThetaCycle:
    candidate: CriticalCandidate
    phi: float
    annulus_certified: bool
    isolation_certified: bool
    epsilon: float = DEFAULT_EPSILON

    @property
    def counted(self) -> bool:
        return self.isolation_certified and self.phi >= self.epsilon and self.annulus_certified


def _lifted(cand: CriticalCandidate, cloud: PointCloud) -> np.ndarray:
    """Generating points as vectors from C(Y)."""
    return minimal_image(cloud.coords[list(cand.subset_indices)] - np.asarray(cand.center.coords))


def _facet_distances(V: np.ndarray) -> np.ndarray:
    """Distance from the origin to the affine hull of each facet of the simplex with vertex rows V."""
    k1 = len(V)
    out = np.empty(k1)
    for i in range(k1):
        F = np.delete(V, i, axis=0)
        B = (F[1:] - F[0]).T
        # project the origin onto aff(F)
        coef, *_ = np.linalg.lstsq(B, -F[0], rcond=None)
        out[i] = np.linalg.norm(F[0] + B @ coef)
    return out


def phi(candidate: CriticalCandidate, cloud: PointCloud) -> float:
    """inf over the boundary of the simplex of |x - C(Y)|, divided by 2 R(Y); 1 for index 1."""
    if not candidate.is_critical:
        raise InputError("phi is defined for critical candidates only")
    if candidate.index_k < 1:
        raise InputError("phi needs index k >= 1")
    if candidate.index_k == 1:
        return 1.0
    V = _lifted(candidate, cloud)
    return float(_facet_distances(V).min() / (2.0 * candidate.circumradius))


def _annulus_points(dim: int, R: float, phi_value: float, covering: float) -> np.ndarray:
    """Offsets covering A_phi (radii in [phi R, R]) within ``covering``.

    Points of a cubic lattice with covering radius covering/2 are kept when
    they fall in the shell [phi R - covering/2, R + covering/2], then moved
    radially into [phi R, R], which costs at most another covering/2. Only
    lattice columns that meet the shell are generated.
    """
    h = covering / math.sqrt(dim)
    inner = phi_value * R
    lo, hi = max(inner - covering / 2.0, 0.0), R + covering / 2.0
    m = int(math.ceil(hi / h))
    ax = (np.arange(-m, m) + 0.5) * h
    if dim == 1:
        pts = ax[(np.abs(ax) >= lo) & (np.abs(ax) <= hi)][:, None]
    else:
        Q = np.stack(np.meshgrid(*([ax] * (dim - 1)), indexing="ij"), axis=-1).reshape(-1, dim - 1)
        q2 = (Q * Q).sum(1)
        Q, q2 = Q[q2 <= hi * hi], q2[q2 <= hi * hi]
        zmax = np.sqrt(hi * hi - q2)
        zmin = np.sqrt(np.maximum(lo * lo - q2, 0.0))
        # lattice heights (j + 1/2) h with zmin <= height <= zmax, mirrored to negative z
        j0 = np.maximum(np.ceil(zmin / h - 0.5), 0).astype(np.int64)
        j1 = np.floor(zmax / h - 0.5).astype(np.int64)
        cnt = np.maximum(j1 - j0 + 1, 0)
        col = np.repeat(np.arange(len(Q)), cnt)
        j = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt) + np.repeat(j0, cnt)
        z = (j + 0.5) * h
        pts = np.vstack([np.column_stack([Q[col], z]), np.column_stack([Q[col], -z])])
    rad = np.sqrt((pts * pts).sum(1))
    keep = rad > 0
    pts, rad = pts[keep], rad[keep]
    return pts * (np.clip(rad, inner, R) / rad)[:, None]


def annulus_covered(candidate: CriticalCandidate, cloud: PointCloud, ctx: GeometryContext | None = None,
                    phi_value: float | None = None, net_eta: float = 0.5) -> bool:
    """Net certificate that A_phi(Y) lies inside the union of closed R(Y)-balls.

    A net of the annulus with covering radius s = min(phi/2, net_eta) R is
    checked point by point: each net point must lie within R - s of the cloud
    (closed inequality), which covers the whole annulus by the triangle
    inequality. With the default ``net_eta`` this is the (phi R/2)-net with
    threshold R (1 - phi/2); smaller values give a sharper certificate.
    """
    ctx = ctx or GeometryContext(cloud.dim)
    if phi_value is None:
        phi_value = phi(candidate, cloud)
    if not net_eta > 0:
        raise DomainError("net_eta must be positive")
    R = candidate.circumradius
    s = min(phi_value / 2.0, net_eta) * R
    C = np.asarray(candidate.center.coords)
    tree = cloud.kdtree
    bound = R - s
    # coarse pass: an annulus point farther than R from the cloud defeats any net
    coarse = _annulus_points(ctx.dim, R, phi_value, max(s, R / 4.0))
    dist, _ = tree.query(np.mod(C + coarse, 1.0), k=1)
    if np.any(dist > R):
        return False
    net = _annulus_points(ctx.dim, R, phi_value, s)
    for start in range(0, len(net), 200_000):
        dist, _ = tree.query(np.mod(C + net[start:start + 200_000], 1.0), k=1)
        if np.any(dist > bound):
            return False
    return True


def intersection_bound(r: float, R: float) -> float:
    """Radius sqrt(r^2 - R^2) around C(Y) that contains the intersection of the r-balls around Y."""
    if R > r:
        raise DomainError("the r-balls around Y do not intersect when R(Y) > r")
    return math.sqrt(r * r - R * R)


def _default_lambda(cloud: PointCloud, r: float, ctx: GeometryContext) -> float:
    n = cloud.intensity_n if math.isfinite(cloud.intensity_n) else float(len(cloud))
    return ctx.lambda_for_radius(r, n)


def count_theta_cycles(cloud: PointCloud, r: float, epsilon: float = DEFAULT_EPSILON,
                       ctx: GeometryContext | None = None, lam: float | None = None,
                       census: CriticalCensus | None = None,
                       net_eta: float = DEFAULT_NET_ETA) -> tuple[tuple, list]:
    """``(counts, cycles)``: counts[k-1] is beta_k^eps(r) for k = 1..d-1.

    ``lam`` sets delta = lam^-2 (default: omega_d n r^d with n the cloud's
    intensity, or its size). ``net_eta`` bounds the relative covering radius
    of the annulus net (see ``annulus_covered``). ``cycles`` lists every
    candidate in the value window with its certificates, counted or not.
    """
    ctx = ctx or GeometryContext(cloud.dim)
    d = ctx.dim
    if not 0 < r < ctx.r_max:
        raise DomainError(f"radius {r} outside (0, r_max = {ctx.r_max:.6g})")
    if len(cloud) == 0 or d < 2:
        return (0,) * max(d - 1, 0), []
    params = ThetaParams(epsilon, _default_lambda(cloud, r, ctx) if lam is None else lam, r)
    if census is None:
        census = enumerate_critical_points(cloud, r, ctx)
    elif census.radius < r:
        raise InputError("census radius is smaller than r")
    tree = cloud.kdtree
    counts = []
    cycles = []
    for k in range(1, d):
        vals = census.values[k - 1]
        sel = np.flatnonzero((vals > params.r_prime) & (vals <= r))
        if len(sel) == 0:
            counts.append(0)
            continue
        centers = census.centers[k - 1][sel]
        inside = tree.query_ball_point(centers, params.r_dprime, return_length=True)
        n_counted = 0
        for j, pos in enumerate(sel):
            cand = CriticalCandidate(tuple(census.vertices[k - 1][pos].tolist()),
                                     TorusPoint(tuple(centers[j])), float(vals[pos]), k,
                                     tuple(census.barycentric[k - 1][pos].tolist()), True)
            isolated = bool(inside[j] == k + 1)
            ph = phi(cand, cloud)
            covered = False
            if isolated and ph >= epsilon:
                covered = annulus_covered(cand, cloud, ctx, ph, net_eta)
            cyc = ThetaCycle(cand, ph, covered, isolated, epsilon)
            n_counted += cyc.counted
            cycles.append(cyc)
        counts.append(int(n_counted))
    return tuple(counts), cycles

