"""Betti numbers of Cech complexes over GF(2).

Ranks come from a sparse column reduction of each coboundary matrix.
Simplices inside one dimension are ordered by (filtration radius, vertex
tuple), which keeps reduced columns short; rank does not depend on the order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from . import kernels
from .cech import CechComplex
from .errors import InputError


@dataclass(frozen=True)
class BettiVector:
    betti: tuple
    simplex_counts: tuple
    ranks: tuple
    # s_{top} - rank of the top boundary: cycles in the truncated top skeleton
    top_cycles: int

    @property
    def chi_from_betti(self) -> int:
        return int(sum((-1) ** k * b for k, b in enumerate(self.betti)))

    @property
    def alternating_simplex_sum(self) -> int:
        return int(sum((-1) ** k * s for k, s in enumerate(self.simplex_counts)))

    def matches_torus(self) -> bool:
        from math import comb
        d = len(self.betti) - 1
        return all(b == comb(d, k) for k, b in enumerate(self.betti))


def boundary_matrix(cplx: CechComplex, k: int) -> sparse.csc_matrix:
    """GF(2) boundary map from k-simplices to (k-1)-simplices, both in lexicographic order."""
    if not 1 <= k <= cplx.max_sdim:
        raise InputError(f"boundary dimension {k} outside 1..{cplx.max_sdim}")
    faces, cofaces = cplx.vertices[k - 1], cplx.vertices[k]
    m = len(cofaces)
    rows = kernels.face_indices(faces, cofaces).ravel() if m else np.zeros(0, dtype=np.int64)
    cols = np.repeat(np.arange(m), k + 1)
    data = np.ones(len(rows), dtype=np.uint8)
    return sparse.csc_matrix((data, (rows, cols)), shape=(len(faces), m))


def _filtration_order(cplx: CechComplex, k: int) -> tuple[np.ndarray, np.ndarray]:
    # rows are already lexicographic, so a stable sort on radius gives (radius, lex)
    perm = np.argsort(cplx.radii[k], kind="stable").astype(np.int64)
    pos = np.empty_like(perm)
    pos[perm] = np.arange(len(perm), dtype=np.int64)
    return perm, pos


def boundary_ranks(cplx: CechComplex) -> list[int]:
    """``ranks[k]`` = rank over GF(2) of the k-th boundary map, k = 1..max_sdim (``ranks[0] = 0``).

    Each rank is read off the transposed (coboundary) matrix, reduced from
    low dimension upward. A k-simplex that was a pivot row for the
    (k-1)-coboundary spans a zero column of the k-coboundary and is skipped.
    Rows are taken in reverse filtration order so that the pivot of a column
    is its earliest coface, which leaves most columns already reduced.
    """
    top = cplx.max_sdim
    ranks = [0] * (top + 1)
    perm_c, _ = _filtration_order(cplx, 0)
    skip = np.zeros(len(cplx.vertices[0]), dtype=np.uint8)
    for k in range(top):
        faces, cofaces = cplx.vertices[k], cplx.vertices[k + 1]
        perm_r, pos_r = _filtration_order(cplx, k + 1)
        n_rows = len(cofaces)
        if n_rows and len(faces):
            fi = kernels.face_indices(faces, cofaces)
            indptr, owner = kernels.transpose_incidence(fi, len(faces))
            rows = (n_rows - 1) - pos_r[owner]
            rank, low = kernels.gf2_reduce_csr(indptr, rows, n_rows, perm_c, skip)
            ranks[k + 1] = int(rank)
            paired = (n_rows - 1) - low[low >= 0]
        else:
            paired = np.zeros(0, dtype=np.int64)
        skip = np.zeros(n_rows, dtype=np.uint8)
        skip[perm_r[paired]] = 1
        perm_c = perm_r
    return ranks


def betti_numbers(cplx: CechComplex) -> BettiVector:
    """Betti numbers beta_0..beta_d; requires simplices up to dimension d+1."""
    d = cplx.dim
    if cplx.max_sdim < d + 1:
        raise InputError(f"betti numbers up to dimension {d} need max_sdim = {d + 1}, "
                         f"complex has {cplx.max_sdim}")
    counts = cplx.counts()
    ranks = boundary_ranks(cplx) + [0]
    betti = tuple(counts[k] - ranks[k] - ranks[k + 1] for k in range(d + 1))
    top = cplx.max_sdim
    return BettiVector(betti=betti, simplex_counts=tuple(counts), ranks=tuple(ranks[:top + 1]),
                       top_cycles=counts[top] - ranks[top])


def euler_characteristic(cplx: CechComplex) -> int:
    return betti_numbers(cplx).chi_from_betti
