import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cechlab.cech import (CechComplex, Simplex, build_complex, from_simplices, miniball_radius, neighbor_pairs,
                          read_complex, write_complex)
from cechlab.errors import DomainError, InputError
from cechlab.geometry import GeometryContext, minimal_image, pairwise_toroidal
from helpers import cloud_of, poisson_cloud
from oracles import cech_brute, miniball_brute


def test_simplex_type():
    s = Simplex((1, 4, 7), 0.1)
    assert s.dim == 2
    assert list(s.facets()) == [(4, 7), (1, 7), (1, 4)]
    with pytest.raises(InputError):
        Simplex((3, 1))


def test_miniball_examples():
    r, c = miniball_radius([[0.3, 0.4]])
    assert r == 0 and np.allclose(c, [0.3, 0.4])
    r, c = miniball_radius([[0, 0], [1, 0]])
    assert r == pytest.approx(0.5) and np.allclose(c, [0.5, 0])
    # obtuse: the circumball (radius 1.3, center (0.5, -1.2)) is not the miniball
    r, c = miniball_radius([[0, 0], [1, 0], [0.5, 0.1]])
    assert r == pytest.approx(0.5, abs=1e-15) and np.allclose(c, [0.5, 0], atol=1e-15)
    with pytest.raises(InputError):
        miniball_radius(np.zeros((0, 2)))


@settings(max_examples=300)
@given(st.integers(1, 3), st.integers(1, 5), st.integers(0, 2 ** 32 - 1))
def test_miniball_properties(d, m, seed):
    m = min(m, d + 2)
    P = np.random.default_rng(seed).normal(size=(m, d))
    r, c = miniball_radius(P)
    dist = np.linalg.norm(P - c, axis=1)
    assert np.all(dist <= r + 1e-12)
    # tight: a slightly smaller ball at this center misses a point
    assert m == 1 or np.any(dist > r - 1e-6)
    assert r == pytest.approx(miniball_brute(P), rel=1e-9, abs=1e-12)


def test_build_pair_example():
    cloud = cloud_of([[0.45, 0.5], [0.55, 0.5]])
    assert build_complex(cloud, 0.06).counts()[:2] == [2, 1]
    assert build_complex(cloud, 0.04).counts()[:2] == [2, 0]
    one = build_complex(cloud_of([[0.2, 0.2]]), 0.1)
    assert one.counts() == [1, 0, 0, 0]


@pytest.mark.parametrize("trial", range(100))
def test_cech_vs_rips_witness(trial):
    rng = np.random.default_rng(trial)
    s = rng.uniform(0.02, 0.25)
    ang = rng.uniform(0, 2 * math.pi)
    base = rng.random(2)
    tri = np.array([[math.cos(ang + j * 2 * math.pi / 3), math.sin(ang + j * 2 * math.pi / 3)] for j in range(3)])
    pts = base + tri * s / math.sqrt(3)
    r = rng.uniform(s / 2 + 1e-9 * s, s / math.sqrt(3) - 1e-9 * s)
    cplx = build_complex(cloud_of(np.mod(pts, 1.0)), r)
    assert cplx.counts()[:3] == [3, 3, 0]


def test_domain_errors():
    cloud = poisson_cloud(2, 50, 0)
    with pytest.raises(DomainError, match="exceeds r_max"):
        build_complex(cloud, 1 / 6)
    with pytest.raises(DomainError):
        build_complex(cloud, 0.0)
    with pytest.raises(InputError):
        build_complex(cloud, 0.05, max_sdim=4)
    with pytest.raises(InputError):
        build_complex(cloud, 0.05, ctx=GeometryContext(3))


def test_neighbor_pairs_examples():
    assert len(neighbor_pairs(cloud_of([[0.0, 0.5], [0.5, 0.5]]), 0.1)) == 0
    pairs = neighbor_pairs(cloud_of([[0.01, 0.5], [0.99, 0.5]]), 0.05)
    assert pairs.tolist() == [[0, 1]]


@pytest.mark.parametrize("seed", range(100))
def test_neighbor_pairs_brute_force(seed):
    rng = np.random.default_rng(seed)
    d = 1 + seed % 3
    cloud = cloud_of(rng.random((rng.integers(2, 80), d)))
    r = rng.uniform(0.01, 0.16)
    D = pairwise_toroidal(cloud.coords)
    i, j = np.nonzero(np.triu(D <= 2 * r, 1))
    assert sorted(map(tuple, neighbor_pairs(cloud, r).tolist())) == sorted(zip(i.tolist(), j.tolist()))


@pytest.mark.parametrize("seed", range(30))
def test_build_matches_brute_force(seed):
    rng = np.random.default_rng(1000 + seed)
    d = 1 + seed % 3
    n = int(rng.integers(3, 16))
    cloud = cloud_of(rng.random((n, d)))
    r = rng.uniform(0.05, 0.16)
    cplx = build_complex(cloud, r)
    ref = cech_brute(cloud.coords, r, d + 1)
    for k in range(d + 2):
        assert [tuple(v) for v in cplx.vertices[k].tolist()] == ref[k]


def _check_complex_invariants(cplx: CechComplex):
    for k in range(1, cplx.max_sdim + 1):
        lookup = {tuple(v): rad for v, rad in zip(cplx.vertices[k - 1].tolist(), cplx.radii[k - 1])}
        for v, rad in zip(cplx.vertices[k].tolist(), cplx.radii[k]):
            assert all(a < b for a, b in zip(v, v[1:]))
            assert rad <= cplx.radius
            for f in Simplex(tuple(v)).facets():
                assert f in lookup and lookup[f] <= rad + 1e-15


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2 ** 31), st.floats(1.0, 12.0))
def test_face_closed_and_monotone(d, seed, lam):
    ctx = GeometryContext(d)
    n = 120 if d < 3 else 60
    r = ctx.radius_for_lambda(lam, n)
    if r >= ctx.r_max:
        return
    cplx = build_complex(poisson_cloud(d, n, seed), r)
    _check_complex_invariants(cplx)
    # lexicographic and sorted per dimension
    for k in range(cplx.max_sdim + 1):
        rows = [tuple(v) for v in cplx.vertices[k].tolist()]
        assert rows == sorted(rows)


def test_miniball_in_first_vertex_chart():
    cloud = poisson_cloud(3, 200, 4)
    r = 0.12
    cplx = build_complex(cloud, r)
    for k in range(1, 5):
        for v, rad in list(zip(cplx.vertices[k].tolist(), cplx.radii[k]))[:50]:
            lifted = minimal_image(cloud.coords[v] - cloud.coords[v[0]])
            assert rad == pytest.approx(miniball_brute(lifted), rel=1e-9)


def test_from_simplices_and_membership():
    cplx = from_simplices([(0, 1, 2), Simplex((2, 3), 0.2)], dim=2)
    assert cplx.counts() == [4, 4, 1, 0]
    assert (0, 2) in cplx and Simplex((1, 2)) in cplx and (0, 3) not in cplx
    assert cplx.alternating_count() == 1
    assert len(list(cplx)) == 9


def test_serialization_roundtrip(tmp_path):
    cloud = poisson_cloud(2, 100, 2)
    cplx = build_complex(cloud, 0.08)
    path = tmp_path / "c.txt"
    write_complex(cplx, path)
    lines = path.read_text().splitlines()
    assert lines[1].startswith("0;0;")
    assert lines[-1].split(";")[0] == "3" or cplx.counts()[3] == 0
    back = read_complex(path)
    assert back.dim == 2 and back.radius == cplx.radius and back.counts() == cplx.counts()
    for k in range(4):
        assert np.array_equal(back.vertices[k], cplx.vertices[k])
        assert np.array_equal(back.radii[k], cplx.radii[k])


def test_read_complex_errors(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1;0;0.1\n")
    with pytest.raises(InputError):
        read_complex(p)
    p.write_text("garbage\n")
    with pytest.raises(InputError):
        read_complex(p)
