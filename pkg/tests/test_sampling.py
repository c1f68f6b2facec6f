import io
import math

import numpy as np
import pytest
from scipy import stats

from cechlab.errors import DomainError, InputError
from cechlab.geometry import GeometryContext, toroidal_distance
from cechlab.sampling import (PointCloud, RngStream, count_in_ball, read_cloud, sample_poisson,
                              write_cloud_csv)


def test_determinism():
    ctx = GeometryContext(2)
    a = sample_poisson(300, ctx, RngStream(42, 7))
    b = sample_poisson(300, ctx, RngStream(42, 7))
    c = sample_poisson(300, ctx, RngStream(42, 8))
    assert a.same_points(b) and a.seed == b.seed
    assert not a.same_points(c)
    assert a.coords.flags.writeable is False


def test_bad_intensity():
    ctx = GeometryContext(2)
    for n in (0, -1, math.inf, math.nan):
        with pytest.raises(DomainError):
            sample_poisson(n, ctx, RngStream(0))
    with pytest.raises(DomainError):
        RngStream(-1)
    with pytest.raises(DomainError):
        RngStream(2 ** 64)


def test_poisson_moments():
    ctx = GeometryContext(1)
    counts = np.array([len(sample_poisson(100, ctx, RngStream(3, i))) for i in range(10_000)])
    assert abs(counts.mean() - 100) <= 3 * math.sqrt(100 / 10_000)
    assert 0.9 <= counts.var(ddof=1) / counts.mean() <= 1.1


def test_uniform_coordinates():
    cloud = sample_poisson(20_000, GeometryContext(3), RngStream(9))
    for axis in range(3):
        assert stats.kstest(cloud.coords[:, axis], "uniform").pvalue > 1e-3
    assert np.all((cloud.coords >= 0) & (cloud.coords < 1))


def test_spatial_independence():
    ctx = GeometryContext(2)
    a, b = [], []
    for i in range(10_000):
        c = sample_poisson(50, ctx, RngStream(11, i)).coords
        a.append(np.count_nonzero((c[:, 0] < 0.1)))
        b.append(np.count_nonzero((c[:, 0] >= 0.5) & (c[:, 0] < 0.6)))
    a, b = np.array(a), np.array(b)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05
    assert abs(a.mean() - 5) < 3 * math.sqrt(5 / 10_000)
    assert abs(b.mean() - 5) < 3 * math.sqrt(5 / 10_000)


def test_ball_counts_are_poisson():
    ctx = GeometryContext(2)
    n, lam = 1000, 5.0
    r = ctx.radius_for_lambda(lam, n)
    counts = np.array([count_in_ball(sample_poisson(n, ctx, RngStream(5, i)), (0.5, 0.5), r, ctx)
                       for i in range(10_000)])
    assert abs(counts.mean() - lam) <= 3 * counts.std(ddof=1) / math.sqrt(len(counts))
    # chi-square goodness of fit with tail bins merged
    kmax = 12
    obs = np.array([np.count_nonzero(counts == k) for k in range(kmax)] + [np.count_nonzero(counts >= kmax)])
    p = np.append(stats.poisson.pmf(np.arange(kmax), lam), stats.poisson.sf(kmax - 1, lam))
    assert stats.chisquare(obs, p * len(counts)).pvalue > 1e-3


def test_count_in_ball_threshold():
    cloud = PointCloud(np.array([[0.02, 0.5], [0.5, 0.5]]))
    center = (0.95, 0.5)
    d = toroidal_distance(center, cloud.coords[0])
    assert count_in_ball(cloud, center, d * (1 - 1e-9)) == 0
    assert count_in_ball(cloud, center, d * (1 + 1e-9)) == 1
    empty = PointCloud(np.zeros((0, 2)), dim=2)
    assert count_in_ball(empty, center, 0.1) == 0
    with pytest.raises(DomainError):
        count_in_ball(cloud, center, 0.5)
    with pytest.raises(InputError):
        count_in_ball(cloud, (0.1, 0.1, 0.1), 0.1)


def test_csv_roundtrip(tmp_path):
    cloud = sample_poisson(50, GeometryContext(3), RngStream(1))
    path = tmp_path / "c.csv"
    write_cloud_csv(cloud, path)
    assert path.read_text().splitlines()[0] == "x0,x1,x2"
    back = read_cloud(path)
    assert back.same_points(cloud)
    buf = io.StringIO()
    write_cloud_csv(cloud, buf)
    assert buf.getvalue() == path.read_text()


def test_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n0.1,0.2\n")
    with pytest.raises(InputError):
        read_cloud(p)
    p.write_text("x0,x1\n0.1\n")
    with pytest.raises((InputError, ValueError)):
        read_cloud(p)
    p.write_text("x0,x1\n")
    assert len(read_cloud(p)) == 0
