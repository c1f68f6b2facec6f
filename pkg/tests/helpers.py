import numpy as np

from cechlab.geometry import GeometryContext
from cechlab.sampling import PointCloud, RngStream, sample_poisson

# lines appended by the acceptance suite, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def poisson_cloud(d: int, n: float, seed: int, stream: int = 0) -> PointCloud:
    return sample_poisson(n, GeometryContext(d), RngStream(seed, stream))


def cloud_of(points, d=None) -> PointCloud:
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return PointCloud(np.zeros((0, d or 2)), dim=d or 2)
    return PointCloud(arr.reshape(len(arr), -1))
