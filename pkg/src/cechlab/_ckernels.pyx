# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# distutils: language = c++
"""Compiled hot loops: grid neighbor search, Cech clique expansion with
miniball filtering and critical-point tests, and GF(2) column reduction.

Mirrors ``cechlab._pykernels`` call for call.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor, fabs, fmod
from libcpp.vector cimport vector
from libcpp.algorithm cimport sort

cnp.import_array()

cdef double BARY_TOL = 1e-10
cdef double SV_CUTOFF = 1e-10
cdef double BALL_TOL = 1e-12

cdef enum:
    MAXD = 6
    MAXP = 8

BACKEND = "cython"


cdef inline double _mi(double x) noexcept nogil:
    return x - floor(x + 0.5)


cdef _vec_i64(vector[long long]& v, Py_ssize_t cols):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(v.size(), dtype=np.int64)
    cdef size_t i
    for i in range(v.size()):
        out[i] = v[i]
    return out.reshape(-1, cols)


cdef _vec_f64(vector[double]& v, Py_ssize_t cols):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(v.size(), dtype=np.float64)
    cdef size_t i
    for i in range(v.size()):
        out[i] = v[i]
    if cols == 0:
        return out
    return out.reshape(-1, cols)


def neighbor_graph(const double[:, ::1] coords, double cutoff):
    cdef Py_ssize_t n = coords.shape[0], d = coords.shape[1]
    cdef Py_ssize_t i, j, a, s, off, noff, t, cid, mult, cc, o
    cdef double c2 = cutoff * cutoff, dist2, dx
    cdef long m
    cdef vector[long long] rows
    cdef cnp.ndarray[cnp.int64_t, ndim=1] indptr = np.zeros(n + 1, dtype=np.int64)
    if n == 0:
        return indptr, np.zeros(0, dtype=np.int64)
    m = <long>floor(1.0 / cutoff) if cutoff > 0 else 1
    if m < 3:
        for i in range(n):
            for j in range(n):
                if j == i:
                    continue
                dist2 = 0.0
                for a in range(d):
                    dx = _mi(coords[j, a] - coords[i, a])
                    dist2 += dx * dx
                if dist2 <= c2:
                    rows.push_back(j)
            indptr[i + 1] = rows.size()
        return indptr, _vec_i64(rows, 1).ravel()

    while m > 3 and (<double>m) ** d > 8.0 * n + 64.0:
        m -= 1
    cdef Py_ssize_t ncell = 1
    for a in range(d):
        ncell *= m
    cdef vector[long] cellc = vector[long](n * d)
    cdef vector[long] cellid = vector[long](n)
    cdef vector[long] start = vector[long](ncell + 1, 0)
    cdef vector[long] order = vector[long](n)
    cdef vector[long] fill
    for i in range(n):
        cid = 0
        mult = 1
        for a in range(d):
            cc = <long>(coords[i, a] * m)
            if cc >= m:
                cc = m - 1
            if cc < 0:
                cc = 0
            cellc[i * d + a] = cc
            cid += cc * mult
            mult *= m
        cellid[i] = cid
        start[cid + 1] += 1
    for s in range(ncell):
        start[s + 1] += start[s]
    fill = start
    for i in range(n):
        order[fill[cellid[i]]] = i
        fill[cellid[i]] += 1
    noff = 1
    for a in range(d):
        noff *= 3
    cdef size_t row_begin
    for i in range(n):
        row_begin = rows.size()
        for off in range(noff):
            t = off
            cid = 0
            mult = 1
            for a in range(d):
                o = t % 3 - 1
                t //= 3
                cc = (cellc[i * d + a] + o + m) % m
                cid += cc * mult
                mult *= m
            for s in range(start[cid], start[cid + 1]):
                j = order[s]
                if j == i:
                    continue
                dist2 = 0.0
                for a in range(d):
                    dx = _mi(coords[j, a] - coords[i, a])
                    dist2 += dx * dx
                if dist2 <= c2:
                    rows.push_back(j)
        sort(rows.begin() + row_begin, rows.end())
        indptr[i + 1] = rows.size()
    return indptr, _vec_i64(rows, 1).ravel()


cdef int _gram_solve(double* G, double* b, int m, double* lam) noexcept nogil:
    """Solve G lam = b for symmetric PSD G (m x m, row-major, overwritten).

    Symmetric diagonal pivoting; directions with pivot below SV_CUTOFF times
    the largest diagonal are dropped (their coefficient is zero).
    Returns the numerical rank.
    """
    cdef int perm[MAXP]
    cdef double x[MAXP]
    cdef int i, j, step, p, rank = 0
    cdef double scale = 0.0, f, tmp
    for i in range(m):
        perm[i] = i
        if G[i * m + i] > scale:
            scale = G[i * m + i]
    for step in range(m):
        p = step
        for i in range(step + 1, m):
            if G[i * m + i] > G[p * m + p]:
                p = i
        if G[p * m + p] <= SV_CUTOFF * scale or G[p * m + p] <= 0.0:
            break
        if p != step:
            for j in range(m):
                tmp = G[step * m + j]; G[step * m + j] = G[p * m + j]; G[p * m + j] = tmp
            for i in range(m):
                tmp = G[i * m + step]; G[i * m + step] = G[i * m + p]; G[i * m + p] = tmp
            tmp = b[step]; b[step] = b[p]; b[p] = tmp
            j = perm[step]; perm[step] = perm[p]; perm[p] = j
        for i in range(step + 1, m):
            f = G[i * m + step] / G[step * m + step]
            for j in range(step, m):
                G[i * m + j] -= f * G[step * m + j]
            b[i] -= f * b[step]
        rank += 1
    for i in range(m):
        x[i] = 0.0
    for i in range(rank - 1, -1, -1):
        tmp = b[i]
        for j in range(i + 1, rank):
            tmp -= G[i * m + j] * x[j]
        x[i] = tmp / G[i * m + i]
    for i in range(m):
        lam[perm[i]] = x[i]
    return rank


cdef void _circumsphere(const double* pts, const int* idx, int np_, int d,
                        double* center, double* r2, double* bary) noexcept nogil:
    """Circumcenter of pts[idx[0..np_-1]] within their affine hull."""
    cdef double A[MAXP * MAXD]
    cdef double G[MAXP * MAXP]
    cdef double b[MAXP]
    cdef double lam[MAXP]
    cdef int i, j, a, m = np_ - 1
    cdef const double* p0 = pts + idx[0] * d
    cdef double s, off
    if m == 0:
        for a in range(d):
            center[a] = p0[a]
        r2[0] = 0.0
        if bary != NULL:
            bary[0] = 1.0
        return
    for i in range(m):
        s = 0.0
        for a in range(d):
            A[i * d + a] = pts[idx[i + 1] * d + a] - p0[a]
            s += A[i * d + a] * A[i * d + a]
        b[i] = 0.5 * s
    for i in range(m):
        for j in range(i, m):
            s = 0.0
            for a in range(d):
                s += A[i * d + a] * A[j * d + a]
            G[i * m + j] = s
            G[j * m + i] = s
    _gram_solve(G, b, m, lam)
    r2[0] = 0.0
    for a in range(d):
        off = 0.0
        for i in range(m):
            off += lam[i] * A[i * d + a]
        center[a] = p0[a] + off
        r2[0] += off * off
    if bary != NULL:
        s = 0.0
        for i in range(m):
            bary[i + 1] = lam[i]
            s += lam[i]
        bary[0] = 1.0 - s


cdef inline bint _outside(const double* p, const double* c, double r2, int d) noexcept nogil:
    cdef double s = 0.0, dx
    cdef int a
    for a in range(d):
        dx = p[a] - c[a]
        s += dx * dx
    return s > r2 * (1.0 + BALL_TOL)


cdef void _mtf(const double* pts, int d, int* order, int end, int* support, int ns,
               double* c, double* r2) noexcept nogil:
    cdef int idx, p, q
    if ns > 0:
        _circumsphere(pts, support, ns, d, c, r2, NULL)
    else:
        r2[0] = -1.0
    if ns == d + 1:
        return
    for idx in range(end):
        p = order[idx]
        if r2[0] < 0.0 or _outside(pts + p * d, c, r2[0], d):
            support[ns] = p
            _mtf(pts, d, order, idx, support, ns + 1, c, r2)
            for q in range(idx, 0, -1):
                order[q] = order[q - 1]
            order[0] = p


cdef double _miniball(const double* pts, int npts, int d, double* c) noexcept nogil:
    cdef int order[MAXP]
    cdef int support[MAXP]
    cdef double r2 = -1.0
    cdef int i
    for i in range(npts):
        order[i] = i
    _mtf(pts, d, order, npts, support, 0, c, &r2)
    return r2


def miniball(points):
    """Smallest enclosing ball (Welzl, move-to-front): (radius, center)."""
    cdef const double[:, ::1] P = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
    cdef int n = P.shape[0], d = P.shape[1]
    if n > MAXP or d > MAXD:
        raise ValueError("miniball kernel supports at most 8 points in dimension <= 6")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c = np.zeros(d)
    cdef double r2 = _miniball(&P[0, 0], n, d, <double*> c.data)
    return sqrt(r2 if r2 > 0 else 0.0), c


def circumsphere_local(points):
    cdef const double[:, ::1] P = np.ascontiguousarray(np.atleast_2d(points), dtype=float)
    cdef int n = P.shape[0], d = P.shape[1], i
    if n > MAXP or d > MAXD or n - 1 > MAXD:
        raise ValueError("too many points for the circumsphere kernel")
    cdef int idx[MAXP]
    for i in range(n):
        idx[i] = i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] c = np.zeros(d)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bary = np.zeros(n)
    cdef double r2 = 0.0
    _circumsphere(&P[0, 0], idx, n, d, <double*> c.data, &r2, <double*> bary.data)
    return c, r2, bary


cdef class _Enumerator:
    cdef const double[:, ::1] coords
    cdef const cnp.int64_t[::1] indptr
    cdef const cnp.int64_t[::1] indices
    cdef double r
    cdef int d, max_sdim, crit_upto, depth
    cdef bint store
    cdef long long v0
    cdef vector[double] L
    cdef vector[long long] gid
    cdef vector[vector[int]] cands
    cdef int T[MAXP]
    cdef double ball_c[MAXP * MAXD]
    cdef double ball_r2[MAXP]
    cdef double pts[MAXP * MAXD]
    cdef vector[vector[long long]] s_verts
    cdef vector[vector[double]] s_rad
    cdef vector[vector[long long]] c_verts
    cdef vector[vector[double]] c_val
    cdef vector[vector[double]] c_center
    cdef vector[vector[double]] c_bary
    cdef long long ties

    def __init__(self, coords, indptr, indices, double r, int max_sdim, int crit_upto, bint store):
        self.coords = coords
        self.indptr = indptr
        self.indices = indices
        self.r = r
        self.d = coords.shape[1]
        self.max_sdim = max_sdim
        self.crit_upto = crit_upto
        self.store = store
        self.depth = max(max_sdim if store else 0, crit_upto)
        if self.d > MAXD or self.depth + 1 > MAXP:
            raise ValueError("dimension too large for the compiled kernel")
        self.cands.resize(self.depth + 1)
        self.s_verts.resize(max_sdim + 1)
        self.s_rad.resize(max_sdim + 1)
        self.c_verts.resize(crit_upto + 1)
        self.c_val.resize(crit_upto + 1)
        self.c_center.resize(crit_upto + 1)
        self.c_bary.resize(crit_upto + 1)
        self.ties = 0

    cdef bint _adjacent(self, long long a, long long b) noexcept nogil:
        cdef long long lo = self.indptr[a], hi = self.indptr[a + 1], mid
        while lo < hi:
            mid = (lo + hi) >> 1
            if self.indices[mid] < b:
                lo = mid + 1
            else:
                hi = mid
        return lo < self.indptr[a + 1] and self.indices[lo] == b

    cdef void run(self):
        cdef Py_ssize_t n = self.coords.shape[0]
        cdef long long v, s, deg, j
        cdef int a, d = self.d
        for v in range(n):
            self.v0 = v
            deg = self.indptr[v + 1] - self.indptr[v]
            self.gid.resize(deg)
            self.L.resize(deg * d)
            self.cands[0].clear()
            for j in range(deg):
                s = self.indices[self.indptr[v] + j]
                self.gid[j] = s
                for a in range(d):
                    self.L[j * d + a] = _mi(self.coords[s, a] - self.coords[v, a])
                if s > v:
                    self.cands[0].push_back(<int>j)
            if self.store:
                self.s_verts[0].push_back(v)
                self.s_rad[0].push_back(0.0)
            for a in range(d):
                self.ball_c[a] = 0.0
            self.ball_r2[0] = 0.0
            if self.depth >= 1 and self.cands[0].size() > 0:
                self._extend(0)

    cdef void _extend(self, int depth):
        cdef vector[int]* cand = &self.cands[depth]
        cdef size_t pos, q, ncand = cand.size()
        cdef int u, w, k, a, i, d = self.d
        cdef double* cprev = &self.ball_c[depth * MAXD]
        cdef double* cnew = &self.ball_c[(depth + 1) * MAXD]
        cdef double r2, rad
        cdef long long gu
        for pos in range(ncand):
            u = cand[0][pos]
            self.T[depth] = u
            k = depth + 1
            if not _outside(&self.L[u * d], cprev, self.ball_r2[depth], d):
                for a in range(d):
                    cnew[a] = cprev[a]
                r2 = self.ball_r2[depth]
            else:
                for a in range(d):
                    self.pts[a] = 0.0
                for i in range(k):
                    for a in range(d):
                        self.pts[(i + 1) * d + a] = self.L[self.T[i] * d + a]
                r2 = _miniball(self.pts, k + 1, d, cnew)
            self.ball_r2[depth + 1] = r2
            rad = sqrt(r2 if r2 > 0 else 0.0)
            if rad > self.r:
                continue
            if self.store and k <= self.max_sdim:
                self.s_verts[k].push_back(self.v0)
                for i in range(k):
                    self.s_verts[k].push_back(self.gid[self.T[i]])
                self.s_rad[k].push_back(rad)
            if k <= self.crit_upto:
                self._critical(k)
            if k < self.depth:
                self.cands[depth + 1].clear()
                gu = self.gid[u]
                for q in range(pos + 1, ncand):
                    w = cand[0][q]
                    if self._adjacent(gu, self.gid[w]):
                        self.cands[depth + 1].push_back(w)
                if self.cands[depth + 1].size() > 0:
                    self._extend(depth + 1)

    cdef void _critical(self, int k):
        cdef int d = self.d, a, i
        cdef int idx[MAXP]
        cdef double c[MAXD]
        cdef double bary[MAXP]
        cdef double r2, R, d2, dx, x
        cdef long long j, deg = self.gid.size()
        cdef bint member, inside = True
        for a in range(d):
            self.pts[a] = 0.0
        for i in range(k):
            for a in range(d):
                self.pts[(i + 1) * d + a] = self.L[self.T[i] * d + a]
        for i in range(k + 1):
            idx[i] = i
        _circumsphere(self.pts, idx, k + 1, d, c, &r2, bary)
        for i in range(k + 1):
            if fabs(bary[i]) <= BARY_TOL:
                self.ties += 1
                break
        for i in range(k + 1):
            if not bary[i] > BARY_TOL:
                return
        R = sqrt(r2)
        if R > self.r:
            return
        for j in range(deg):
            member = False
            for i in range(k):
                if self.T[i] == j:
                    member = True
                    break
            if member:
                continue
            d2 = 0.0
            for a in range(d):
                dx = self.L[j * d + a] - c[a]
                d2 += dx * dx
            if d2 < r2 * (1.0 - BALL_TOL):
                return
            if d2 <= r2 * (1.0 + BALL_TOL):
                self.ties += 1
        self.c_verts[k].push_back(self.v0)
        for i in range(k):
            self.c_verts[k].push_back(self.gid[self.T[i]])
        self.c_val[k].push_back(R)
        for a in range(d):
            x = c[a] + self.coords[self.v0, a]
            x = x - floor(x)
            if x >= 1.0:
                x = 0.0
            self.c_center[k].push_back(x)
        for i in range(k + 1):
            self.c_bary[k].push_back(bary[i])


def cech_enumerate(coords, indptr, indices, double r, int max_sdim, int crit_upto, bint store_complex=True):
    coords = np.ascontiguousarray(coords, dtype=np.float64)
    indptr = np.ascontiguousarray(indptr, dtype=np.int64)
    indices = np.ascontiguousarray(indices, dtype=np.int64)
    if indices.size == 0:
        indices = np.zeros(1, dtype=np.int64)
    cdef _Enumerator en = _Enumerator(coords, indptr, indices, r, max_sdim, crit_upto, store_complex)
    en.run()
    cdef int k, d = en.d
    simp = []
    for k in range(max_sdim + 1):
        simp.append((_vec_i64(en.s_verts[k], k + 1), _vec_f64(en.s_rad[k], 0)))
    crit = []
    for k in range(1, crit_upto + 1):
        crit.append((_vec_i64(en.c_verts[k], k + 1), _vec_f64(en.c_val[k], 0),
                     _vec_f64(en.c_center[k], d), _vec_f64(en.c_bary[k], k + 1)))
    return simp, crit, int(en.ties)


cdef inline unsigned long long _mix(unsigned long long x) noexcept nogil:
    x ^= x >> 30
    x *= 0xbf58476d1ce4e5b9ULL
    x ^= x >> 27
    x *= 0x94d049bb133111ebULL
    x ^= x >> 31
    return x


def face_indices(faces, cofaces):
    """Row of ``faces`` holding each facet of each coface (column j drops vertex j).

    Vertex tuples are packed into one integer (base = max vertex + 1) and looked
    up in an open-addressing hash table built over ``faces``.
    """
    cdef const cnp.int64_t[:, ::1] F = np.ascontiguousarray(faces, dtype=np.int64).reshape(len(faces), -1)
    cdef const cnp.int64_t[:, ::1] C = np.ascontiguousarray(cofaces, dtype=np.int64).reshape(len(cofaces), -1)
    cdef Py_ssize_t M = C.shape[0], kp1 = C.shape[1], m = F.shape[0]
    cdef Py_ssize_t i, j, a
    cdef unsigned long long key, base, mask, h, size
    cdef long long slot
    out = np.empty((M, kp1), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] O = out
    if M == 0:
        return out
    if m == 0 or kp1 < 2:
        raise ValueError("faces missing from complex")
    base = <unsigned long long>max(int(np.max(C)), int(np.max(F))) + 1
    if float(base) ** (kp1 - 1) >= 2.0 ** 63:
        raise ValueError("vertex indices too large to pack")
    size = 1
    while size < 2 * <unsigned long long>m:
        size <<= 1
    mask = size - 1
    cdef vector[unsigned long long] keys
    cdef vector[long long] vals
    keys.assign(size, 0)
    vals.assign(size, -1)
    for i in range(m):
        key = 0
        for a in range(kp1 - 1):
            key = key * base + <unsigned long long>F[i, a]
        h = _mix(key) & mask
        while vals[h] >= 0:
            h = (h + 1) & mask
        keys[h] = key
        vals[h] = i
    for i in range(M):
        for j in range(kp1):
            key = 0
            for a in range(kp1):
                if a != j:
                    key = key * base + <unsigned long long>C[i, a]
            h = _mix(key) & mask
            slot = -1
            while vals[h] >= 0:
                if keys[h] == key:
                    slot = vals[h]
                    break
                h = (h + 1) & mask
            if slot < 0:
                raise ValueError(f"face of simplex {tuple(np.asarray(C[i]))} missing from complex")
            O[i, j] = slot
    return out


def transpose_incidence(fi, Py_ssize_t n_faces):
    """CSR (indptr, indices) listing, for each face, the cofaces that contain it.

    ``fi`` is the (M, k+1) output of ``face_indices``; coface ids come out ascending.
    """
    cdef const cnp.int64_t[:, ::1] A = np.ascontiguousarray(fi, dtype=np.int64).reshape(len(fi), -1)
    cdef Py_ssize_t M = A.shape[0], kp1 = A.shape[1], i, j, f
    indptr = np.zeros(n_faces + 1, dtype=np.int64)
    indices = np.empty(M * kp1, dtype=np.int64)
    cdef cnp.int64_t[::1] P = indptr
    cdef cnp.int64_t[::1] I = indices
    cdef vector[long long] fill
    for i in range(M):
        for j in range(kp1):
            P[A[i, j] + 1] += 1
    for f in range(n_faces):
        P[f + 1] += P[f]
    fill.assign(n_faces, 0)
    for i in range(M):
        for j in range(kp1):
            f = A[i, j]
            I[P[f] + fill[f]] = i
            fill[f] += 1
    return indptr, indices


cdef long long _reduce_csr(const cnp.int64_t[::1] Ptr, const cnp.int64_t[::1] Idx, Py_ssize_t n_rows,
                           const cnp.int64_t[::1] Ord, const cnp.uint8_t[::1] Skip,
                           cnp.int64_t[::1] low) except -1:
    cdef Py_ssize_t M = Ptr.shape[0] - 1, jj, j, a
    cdef vector[long long] pivot
    cdef vector[vector[int]] red
    cdef vector[int] cur, tmp
    cdef vector[int]* other
    cdef size_t x, y
    cdef long long l, p, rank = 0
    pivot.assign(n_rows, -1)
    red.resize(M)
    for jj in range(Ord.shape[0]):
        j = Ord[jj]
        if Skip[j]:
            continue
        cur.clear()
        for a in range(Ptr[j], Ptr[j + 1]):
            cur.push_back(<int>Idx[a])
        sort(cur.begin(), cur.end())
        while cur.size() > 0:
            l = cur.back()
            p = pivot[l]
            if p < 0:
                pivot[l] = j
                red[j] = cur
                low[j] = l
                rank += 1
                break
            other = &red[p]
            tmp.clear()
            x = 0
            y = 0
            while x < cur.size() and y < other.size():
                if cur[x] < other[0][y]:
                    tmp.push_back(cur[x]); x += 1
                elif cur[x] > other[0][y]:
                    tmp.push_back(other[0][y]); y += 1
                else:
                    x += 1; y += 1
            while x < cur.size():
                tmp.push_back(cur[x]); x += 1
            while y < other.size():
                tmp.push_back(other[0][y]); y += 1
            cur.swap(tmp)
    return rank


def gf2_reduce_csr(indptr, indices, Py_ssize_t n_rows, order, skip):
    """Column reduction over GF(2) for columns given in CSR form; returns ``(rank, low)``."""
    ptr = np.ascontiguousarray(indptr, dtype=np.int64)
    low_arr = np.full(len(ptr) - 1, -1, dtype=np.int64)
    rank = _reduce_csr(ptr, np.ascontiguousarray(indices, dtype=np.int64), n_rows,
                       np.ascontiguousarray(order, dtype=np.int64),
                       np.ascontiguousarray(skip, dtype=np.uint8), low_arr)
    return int(rank), low_arr


def gf2_reduce(cols, Py_ssize_t n_rows, order, skip):
    """Column reduction over GF(2); ``cols`` is an (M, k+1) array of row positions."""
    C = np.ascontiguousarray(cols, dtype=np.int64).reshape(len(cols), -1)
    indptr = np.arange(0, C.size + 1, max(C.shape[1], 1), dtype=np.int64)[:len(C) + 1]
    return gf2_reduce_csr(indptr, C.ravel(), n_rows, order, skip)
