import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cechlab.errors import DomainError, InputError, PreconditionError
from cechlab.geometry import (GeometryContext, TorusPoint, ball_volume, intersection_volume_unit, lens_area,
                              lift_cluster, pairwise_toroidal, toroidal_distance, unit_ball_volume)

coord = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)


def points(d):
    return st.lists(coord, min_size=d, max_size=d)


def test_torus_point_canonical():
    p = TorusPoint((1.25, -0.25, -1e-18))
    assert p.coords == (0.25, 0.75, 0.0)
    assert all(0 <= c < 1 for c in p.coords)
    with pytest.raises(InputError):
        TorusPoint((math.nan,))


def test_context_constants():
    ctx = GeometryContext(3)
    assert ctx.r_conv == 0.5 and ctx.r_max == ctx.r_conv / 3
    assert ctx.omega_d == pytest.approx(4 / 3 * math.pi, rel=1e-15)
    assert GeometryContext(2).omega_d == pytest.approx(math.pi, rel=1e-15)
    assert unit_ball_volume(1) == pytest.approx(2.0, rel=1e-15)
    lam = ctx.lambda_for_radius(ctx.radius_for_lambda(5.0, 300), 300)
    assert lam == pytest.approx(5.0, rel=1e-14)
    with pytest.raises(InputError):
        GeometryContext(0)


@pytest.mark.parametrize("a, b, expected", [
    ((0.1, 0.0), (0.9, 0.0), 0.2),
    ((0.3, 0.4), (0.3, 0.4), 0.0),
    ((0.0, 0.0), (0.5, 0.5), math.sqrt(2) / 2),
])
def test_distance_examples(a, b, expected):
    assert toroidal_distance(TorusPoint(a), TorusPoint(b)) == pytest.approx(expected, abs=1e-15)


def test_distance_dimension_mismatch():
    with pytest.raises(InputError):
        toroidal_distance((0.1, 0.2), (0.1, 0.2, 0.3))


def test_distance_matches_shift_search(rng):
    import itertools
    for d in (1, 2, 3):
        for _ in range(200):
            a, b = rng.random(d), rng.random(d)
            brute = min(np.linalg.norm(a - b + np.array(s)) for s in itertools.product((-1, 0, 1), repeat=d))
            assert toroidal_distance(a, b) == pytest.approx(brute, abs=1e-15)


@given(points(3), points(3), points(3))
def test_metric_axioms(a, b, c):
    dab, dba = toroidal_distance(a, b), toroidal_distance(b, a)
    assert dab == dba
    assert dab <= math.sqrt(3) / 2 + 1e-15
    assert toroidal_distance(a, c) <= dab + toroidal_distance(b, c) + 1e-12


@settings(max_examples=200)
@given(points(2), st.floats(0.01, 0.245), st.lists(st.tuples(st.floats(0, 1), st.floats(0, 2 * math.pi)),
                                                 min_size=1, max_size=8))
def test_lift_is_isometric(center, radius, polar):
    # admissible: cluster diameter below r_conv
    c = np.array(center)
    pts = [c + radius * rho * np.array([math.cos(t), math.sin(t)]) for rho, t in polar]
    lifted = lift_cluster([TorusPoint(tuple(p)) for p in pts], TorusPoint(tuple(c)), radius * (1 + 1e-9))
    canon = np.mod(np.array(pts), 1.0)
    assert np.allclose(np.linalg.norm(lifted[:, None] - lifted[None], axis=-1), pairwise_toroidal(canon),
                       atol=1e-12)


def test_lift_examples():
    out = lift_cluster([(0.95, 0.95)], (0.05, 0.05), 0.2)
    assert np.allclose(out, [[-0.1, -0.1]], atol=1e-15)
    assert np.allclose(lift_cluster([(0.3, 0.7)], (0.3, 0.7), 0.1), [[0.0, 0.0]])
    out = lift_cluster([(0.1, 0.0), (0.9, 0.0)], (0.0, 0.0), 0.15)
    assert np.allclose(out, [[0.1, 0.0], [-0.1, 0.0]], atol=1e-15)
    assert np.linalg.norm(out[0] - out[1]) == pytest.approx(toroidal_distance((0.1, 0), (0.9, 0)), abs=1e-15)


def test_lift_errors():
    with pytest.raises(PreconditionError):
        lift_cluster([(0.5, 0.5)], (0.0, 0.0), 0.3)
    with pytest.raises(DomainError):
        lift_cluster([(0.0, 0.0)], (0.0, 0.0), 0.5)


def test_ball_volume():
    assert GeometryContext(2).omega_d * 1.0 ** 2 == pytest.approx(math.pi)  # r = 1 lies outside the torus domain
    assert ball_volume(0.0, GeometryContext(2)) == 0.0
    assert ball_volume(0.1, GeometryContext(3)) == pytest.approx(4 / 3 * math.pi * 1e-3, rel=1e-14)
    with pytest.raises(DomainError):
        ball_volume(0.5, GeometryContext(2))
    with pytest.raises(DomainError):
        ball_volume(-0.1, GeometryContext(2))


@pytest.mark.parametrize("d", [1, 2, 3, 4])
def test_intersection_volume_endpoints(d):
    ctx = GeometryContext(d)
    assert intersection_volume_unit(0.0, ctx) == pytest.approx(ctx.omega_d, rel=1e-10)
    assert intersection_volume_unit(2.0, ctx) == 0.0
    with pytest.raises(DomainError):
        intersection_volume_unit(2.1, ctx)
    with pytest.raises(DomainError):
        intersection_volume_unit(-0.1, ctx)
    vals = [intersection_volume_unit(x, ctx) for x in np.linspace(0, 2, 41)]
    assert np.all(np.diff(vals) < 0)


def test_intersection_volume_lens_oracle():
    ctx = GeometryContext(2)
    assert intersection_volume_unit(1.0, ctx) == pytest.approx(2 * math.pi / 3 - math.sqrt(3) / 2, abs=1e-10)
    for delta in np.linspace(0, 2, 21):
        assert intersection_volume_unit(delta, ctx) == pytest.approx(lens_area(delta), abs=1e-9)


def test_intersection_volume_spherical_lens_d3():
    # two unit balls: pi (4 + D)(2 - D)^2 / 12
    ctx = GeometryContext(3)
    for delta in (0.2, 0.5, 1.0, 1.7):
        exact = math.pi * (4 + delta) * (2 - delta) ** 2 / 12
        assert intersection_volume_unit(delta, ctx) == pytest.approx(exact, abs=1e-9)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_intersection_first_order_law(d):
    ctx = GeometryContext(d)
    slope = unit_ball_volume(d - 1)
    res = [abs(intersection_volume_unit(x, ctx) - (ctx.omega_d - slope * x)) for x in (1e-2, 1e-3)]
    # quadratic remainder: a tenfold smaller delta shrinks the residual about a hundredfold
    assert res[1] < res[0] / 50
    assert res[0] < 1e-2


def test_intersection_monte_carlo_d4(rng):
    ctx = GeometryContext(4)
    delta = 0.7
    m = 400_000
    x = rng.uniform(-1, 1, (m, 4))
    inside = ((x * x).sum(1) <= 1) & (((x - [delta, 0, 0, 0]) ** 2).sum(1) <= 1)
    p = inside.mean()
    est, se = 16 * p, 16 * math.sqrt(p * (1 - p) / m)
    assert abs(est - intersection_volume_unit(delta, ctx)) <= 3 * se
