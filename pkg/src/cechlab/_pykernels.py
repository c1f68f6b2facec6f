"""Pure-Python kernels, used when the compiled extension is unavailable.

Function signatures and outputs match ``cechlab._ckernels`` exactly; the test
suite runs both on the same inputs.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

BARY_TOL = 1e-10
SV_CUTOFF = 1e-10
BALL_TOL = 1e-12
MAX_DIM = 6


def _minimal_image(delta):
    return delta - np.floor(delta + 0.5)


def neighbor_graph(coords, cutoff):
    """Symmetric CSR adjacency of pairs at toroidal distance <= cutoff (self excluded).

    Uses a periodic bucket grid with cell side >= cutoff, so only the 3^d
    surrounding cells are scanned; rows come back sorted.
    """
    coords = np.ascontiguousarray(coords, dtype=float)
    n, d = coords.shape
    c2 = cutoff * cutoff
    m = int(math.floor(1.0 / cutoff)) if cutoff > 0 else 1
    rows = [[] for _ in range(n)]
    if n == 0:
        return np.zeros(1, dtype=np.int64), np.zeros(0, dtype=np.int64)
    if m < 3:
        diff = _minimal_image(coords[:, None, :] - coords[None, :, :])
        dist2 = (diff * diff).sum(-1)
        np.fill_diagonal(dist2, np.inf)
        for i in range(n):
            rows[i] = np.flatnonzero(dist2[i] <= c2).tolist()
    else:
        while m > 3 and m ** d > 8 * n + 64:
            m -= 1
        cell = np.minimum((coords * m).astype(np.int64), m - 1)
        buckets = {}
        for i, key in enumerate(map(tuple, cell)):
            buckets.setdefault(key, []).append(i)
        offsets = list(itertools.product((-1, 0, 1), repeat=d))
        for key, members in buckets.items():
            mem = np.array(members)
            others = []
            for off in offsets:
                nb = tuple((k + o) % m for k, o in zip(key, off))
                if nb in buckets:
                    others.extend(buckets[nb])
            oth = np.array(others)
            diff = _minimal_image(coords[mem][:, None, :] - coords[oth][None, :, :])
            dist2 = (diff * diff).sum(-1)
            for a, i in enumerate(members):
                hit = oth[(dist2[a] <= c2) & (oth != i)]
                rows[i] = hit.tolist()
    indptr = np.zeros(n + 1, dtype=np.int64)
    for i in range(n):
        rows[i].sort()
        indptr[i + 1] = indptr[i] + len(rows[i])
    indices = np.fromiter(itertools.chain.from_iterable(rows), dtype=np.int64, count=int(indptr[-1]))
    return indptr, indices


def _solve_gram(G, b):
    # least-squares solve with singular-value cutoff for near-dependent supports
    lam, *_ = np.linalg.lstsq(G, b, rcond=SV_CUTOFF)
    return lam


def circumsphere_local(pts):
    """Circumcenter of points in their affine hull: (center, radius^2, barycentric)."""
    pts = np.asarray(pts, dtype=float)
    p0 = pts[0]
    if len(pts) == 1:
        return p0.copy(), 0.0, np.ones(1)
    A = pts[1:] - p0
    G = A @ A.T
    b = 0.5 * (A * A).sum(1)
    lam = _solve_gram(G, b)
    off = lam @ A
    bary = np.empty(len(pts))
    bary[0] = 1.0 - lam.sum()
    bary[1:] = lam
    return p0 + off, float(off @ off), bary


def _outside(p, c, r2):
    diff = p - c
    return float(diff @ diff) > r2 * (1.0 + BALL_TOL)


def _mtf(pts, order, end, support, d):
    if support:
        c, r2, _ = circumsphere_local(pts[support])
    else:
        c, r2 = None, -1.0
    if len(support) == d + 1:
        return c, r2
    for idx in range(end):
        p = order[idx]
        if c is None or _outside(pts[p], c, r2):
            c, r2 = _mtf(pts, order, idx, support + [p], d)
            order.insert(0, order.pop(idx))
    return c, r2


def miniball(points):
    """Smallest enclosing ball by Welzl's move-to-front recursion: (radius, center)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    n, d = pts.shape
    order = list(range(n))
    c, r2 = _mtf(pts, order, n, [], d)
    return math.sqrt(max(r2, 0.0)), c


class _Enumerator:
    def __init__(self, coords, indptr, indices, r, max_sdim, crit_upto, store_complex):
        self.coords = np.asarray(coords, dtype=float)
        self.indptr = np.asarray(indptr)
        self.indices = np.asarray(indices)
        self.r = float(r)
        self.max_sdim = max_sdim
        self.crit_upto = crit_upto
        self.store = store_complex
        self.depth = max(max_sdim if store_complex else 0, crit_upto)
        self.simp = [([], []) for _ in range(max_sdim + 1)]
        self.crit = [([], [], [], []) for _ in range(crit_upto)]
        self.ties = 0

    def row(self, v):
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def run(self):
        n = len(self.coords)
        for v0 in range(n):
            row = self.row(v0)
            self.v0 = v0
            self.gid = row
            self.L = _minimal_image(self.coords[row] - self.coords[v0])
            if self.store:
                self.simp[0][0].append((v0,))
                self.simp[0][1].append(0.0)
            upper = [i for i in range(len(row)) if row[i] > v0]
            if self.depth >= 1:
                self._extend([], np.zeros(self.coords.shape[1]), 0.0, upper)
        return self._pack()

    def _adjacent(self, a, b):
        row = self.row(a)
        i = np.searchsorted(row, b)
        return i < len(row) and row[i] == b

    def _extend(self, S, c, r2, cand):
        d = self.coords.shape[1]
        origin = np.zeros(d)
        for pos, u in enumerate(cand):
            T = S + [u]
            if not _outside(self.L[u], c, r2):
                c2, r2n = c, r2
            else:
                pts = np.vstack([origin, self.L[T]])
                rad, c2 = miniball(pts)
                r2n = rad * rad
            rad = math.sqrt(max(r2n, 0.0))
            if rad > self.r:
                continue
            k = len(T)
            if self.store and k <= self.max_sdim:
                self.simp[k][0].append((self.v0,) + tuple(int(self.gid[t]) for t in T))
                self.simp[k][1].append(rad)
            if k <= self.crit_upto:
                self._critical(T)
            if k < self.depth:
                gu = self.gid[u]
                nxt = [w for w in cand[pos + 1:] if self._adjacent(gu, self.gid[w])]
                if nxt:
                    self._extend(T, c2, r2n, nxt)

    def _critical(self, T):
        d = self.coords.shape[1]
        pts = np.vstack([np.zeros(d), self.L[T]])
        c, r2, bary = circumsphere_local(pts)
        if np.any(np.abs(bary) <= BARY_TOL):
            self.ties += 1
        if not np.all(bary > BARY_TOL):
            return
        R = math.sqrt(r2)
        if R > self.r:
            return
        members = set(T)
        diff = self.L - c
        d2 = (diff * diff).sum(1)
        for j in range(len(self.L)):
            if j in members:
                continue
            if d2[j] < r2 * (1.0 - BALL_TOL):
                return
            if d2[j] <= r2 * (1.0 + BALL_TOL):
                self.ties += 1
        out = self.crit[len(T) - 1]
        out[0].append((self.v0,) + tuple(int(self.gid[t]) for t in T))
        out[1].append(R)
        center = np.mod(c + self.coords[self.v0], 1.0)
        center[center >= 1.0] = 0.0
        out[2].append(center)
        out[3].append(bary)

    def _pack(self):
        d = self.coords.shape[1]
        simp = []
        for k, (verts, radii) in enumerate(self.simp):
            simp.append((np.array(verts, dtype=np.int64).reshape(-1, k + 1),
                         np.array(radii, dtype=float)))
        crit = []
        for k, (verts, vals, cents, bary) in enumerate(self.crit, start=1):
            crit.append((np.array(verts, dtype=np.int64).reshape(-1, k + 1),
                         np.array(vals, dtype=float),
                         np.array(cents, dtype=float).reshape(-1, d),
                         np.array(bary, dtype=float).reshape(-1, k + 1)))
        return simp, crit, self.ties


def cech_enumerate(coords, indptr, indices, r, max_sdim, crit_upto, store_complex=True):
    """Depth-first clique expansion of the proximity graph, filtered by miniball radius.

    Returns ``(simplices, critical, ties)``: ``simplices[k] = (verts, radii)``
    for k = 0..max_sdim in lexicographic order, ``critical[k-1] = (verts,
    values, centers, barycentric)`` for index k = 1..crit_upto, and a count of
    numerical ties seen during the critical-point tests.
    """
    en = _Enumerator(coords, indptr, indices, r, max_sdim, crit_upto, store_complex)
    return en.run()


def face_indices(faces, cofaces):
    """Row index in ``faces`` of each facet of each coface (vertex j deleted)."""
    faces = np.asarray(faces)
    cofaces = np.asarray(cofaces)
    lookup = {tuple(f): i for i, f in enumerate(faces.tolist())}
    M, kp1 = cofaces.shape
    out = np.empty((M, kp1), dtype=np.int64)
    for i, row in enumerate(cofaces.tolist()):
        for j in range(kp1):
            key = tuple(row[:j] + row[j + 1:])
            try:
                out[i, j] = lookup[key]
            except KeyError:
                raise ValueError(f"face {key} of {tuple(row)} missing from complex") from None
    return out


def transpose_incidence(fi, n_faces):
    """CSR (indptr, indices) listing, for each face, the cofaces that contain it (ascending)."""
    fi = np.asarray(fi, dtype=np.int64).reshape(len(fi), -1)
    flat = fi.ravel()
    owner = np.repeat(np.arange(len(fi), dtype=np.int64), fi.shape[1])
    order = np.argsort(flat, kind="stable")
    indptr = np.zeros(n_faces + 1, dtype=np.int64)
    np.cumsum(np.bincount(flat, minlength=n_faces), out=indptr[1:])
    return indptr, owner[order]


def gf2_reduce_csr(indptr, indices, n_rows, order, skip):
    """Left-to-right column reduction over GF(2) with columns in CSR form.

    Columns are visited in ``order``; those with ``skip[j]`` set are known to
    reduce to zero. Columns are held as Python ints used as bitsets. Returns
    ``(rank, low)`` with ``low[j] = -1`` for zero or skipped columns.
    """
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    M = len(indptr) - 1
    low = np.full(M, -1, dtype=np.int64)
    pivot = {}
    rank = 0
    for j in np.asarray(order).tolist():
        if skip[j]:
            continue
        col = 0
        for row in indices[indptr[j]:indptr[j + 1]].tolist():
            col ^= 1 << row
        while col:
            l = col.bit_length() - 1
            p = pivot.get(l)
            if p is None:
                pivot[l] = col
                low[j] = l
                rank += 1
                break
            col ^= p
    return rank, low


def gf2_reduce(cols, n_rows, order, skip):
    """Column reduction over GF(2); ``cols`` is an (M, k+1) array of row positions."""
    cols = np.asarray(cols, dtype=np.int64).reshape(len(cols), -1)
    indptr = np.arange(len(cols) + 1, dtype=np.int64) * cols.shape[1]
    return gf2_reduce_csr(indptr, cols.ravel(), n_rows, order, skip)
