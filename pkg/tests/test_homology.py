import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cechlab.cech import build_complex, from_simplices
from cechlab.errors import InputError
from cechlab.geometry import GeometryContext
from cechlab.homology import betti_numbers, boundary_matrix, boundary_ranks, euler_characteristic
from cechlab.morse import is_covered
from helpers import poisson_cloud
from oracles import betti_dense, gf2_rank_dense

HOLLOW = [(0, 1), (1, 2), (0, 2)]


def test_boundary_examples():
    edge = from_simplices([(0, 1)], dim=2)
    assert boundary_matrix(edge, 1).toarray().tolist() == [[1], [1]]
    hollow = from_simplices(HOLLOW, dim=2)
    assert gf2_rank_dense(boundary_matrix(hollow, 1).toarray()) == 2
    with pytest.raises(InputError):
        boundary_matrix(hollow, 0)
    with pytest.raises(InputError):
        boundary_matrix(hollow, 4)


def test_betti_examples():
    one = from_simplices([(0,)], dim=2)
    assert betti_numbers(one).betti == (1, 0, 0)
    assert euler_characteristic(one) == 1
    hollow = betti_numbers(from_simplices(HOLLOW, dim=2))
    assert hollow.betti[:2] == (1, 1)
    assert hollow.chi_from_betti == 0
    sphere = from_simplices(list(itertools.combinations(range(4), 3)), dim=3)
    assert betti_numbers(sphere).betti == (1, 0, 1, 0)
    # two components plus a filled triangle
    cplx = from_simplices([(0, 1, 2), (3, 4)], dim=2)
    assert betti_numbers(cplx).betti == (2, 0, 0)


def test_insufficient_max_sdim():
    cplx = build_complex(poisson_cloud(2, 100, 0), 0.05, max_sdim=2)
    with pytest.raises(InputError):
        betti_numbers(cplx)


def _torus_triangulation(m=3):
    """Standard m x m grid triangulation of T^2."""
    idx = lambda i, j: (i % m) * m + (j % m)
    tris = []
    for i in range(m):
        for j in range(m):
            tris.append((idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)))
            tris.append((idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)))
    return [tuple(sorted(t)) for t in tris]


def test_combinatorial_torus():
    bv = betti_numbers(from_simplices(_torus_triangulation(), dim=2))
    assert bv.betti == (1, 2, 1) and bv.matches_torus()


def test_covering_cloud_has_torus_homology():
    ctx = GeometryContext(2)
    cloud = poisson_cloud(2, 2000, 1)
    r = ctx.radius_for_lambda(1.5 * math.log(2000), 2000)
    assert is_covered(cloud, r, ctx)
    bv = betti_numbers(build_complex(cloud, r))
    assert bv.betti == (1, 2, 1) and bv.chi_from_betti == 0


@pytest.mark.parametrize("seed", range(40))
def test_matches_dense_reference(seed):
    rng = np.random.default_rng(seed)
    d = 1 + seed % 3
    n = int(rng.integers(5, 26))
    ctx = GeometryContext(d)
    cloud = poisson_cloud(d, n, seed)
    r = min(ctx.radius_for_lambda(rng.uniform(1, 8), n), 0.16)
    cplx = build_complex(cloud, r)
    simp = {k: [tuple(v) for v in cplx.vertices[k].tolist()] for k in range(d + 2)}
    assert list(betti_numbers(cplx).betti) == betti_dense(simp, d + 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2 ** 31), st.floats(0.5, 14.0))
def test_chain_complex_identities(d, seed, lam):
    ctx = GeometryContext(d)
    n = 150 if d < 3 else 60
    r = ctx.radius_for_lambda(lam, n)
    if r >= ctx.r_max:
        return
    cplx = build_complex(poisson_cloud(d, n, seed), r)
    for k in range(2, cplx.max_sdim + 1):
        prod = (boundary_matrix(cplx, k - 1).astype(np.int64) @ boundary_matrix(cplx, k).astype(np.int64))
        assert not np.any(prod.toarray() % 2)
    bv = betti_numbers(cplx)
    assert all(b >= 0 for b in bv.betti)
    # the truncated top skeleton adds its cycles to the alternating simplex sum
    assert bv.alternating_simplex_sum == bv.chi_from_betti + (-1) ** (d + 1) * bv.top_cycles
    ranks = boundary_ranks(cplx)
    for k in range(1, cplx.max_sdim + 1):
        if cplx.counts()[k] * cplx.counts()[k - 1] <= 4e6:
            assert ranks[k] == gf2_rank_dense(boundary_matrix(cplx, k).toarray())


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 2), st.integers(0, 2 ** 31), st.floats(2.0, 14.0))
def test_top_betti_is_coverage(d, seed, lam):
    n = 300
    ctx = GeometryContext(d)
    r = ctx.radius_for_lambda(lam, n)
    cloud = poisson_cloud(d, n, seed)
    bv = betti_numbers(build_complex(cloud, r))
    assert bv.betti[d] == int(is_covered(cloud, r, ctx))
