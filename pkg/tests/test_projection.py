import numpy as np
import pytest

from graphact import (BoundingBox, CameraIntrinsics, DepthGrid, RigidTransform,
                      backproject, bbox_center, depth_at, make_rng, project,
                      transform_point)
from graphact.projection import BehindCamera, NonPositiveDepth, NoValidDepth
from conftest import random_rotation

K = CameraIntrinsics(fx=500.0, fy=500.0, cx=320.0, cy=240.0, width=640, height=480)


@pytest.mark.parametrize("box,expected", [
    ((0, 0, 10, 10), (5.0, 5.0)),
    ((100, 40, 140, 80), (120.0, 60.0)),
    ((3, 3, 4, 4), (3.5, 3.5)),
])
def test_bbox_center(box, expected):
    b = BoundingBox("x", *map(float, box))
    assert tuple(bbox_center(b)) == expected


def test_depth_at_uniform_grid():
    grid = DepthGrid.constant(64, 48, 2.0)
    assert depth_at(grid, (10.2, 30.7)) == 2.0
    assert depth_at(grid, (0, 0)) == 2.0


def test_depth_at_median_fallback_unanimous():
    grid = DepthGrid.constant(9, 9, 1.0)
    grid.values[4, 4] = 0.0  # invalid center
    assert depth_at(grid, (4, 4)) == 1.0


def test_depth_at_median_of_valid_multiset():
    # neighborhood {1.0, 1.2, 5.0, invalid x6} -> median 1.2
    grid = DepthGrid.constant(3, 3, 0.0)
    grid.values[0, 0] = 1.0
    grid.values[0, 1] = 1.2
    grid.values[0, 2] = 5.0
    assert depth_at(grid, (1, 1)) == 1.2


def test_depth_at_no_valid_depth():
    grid = DepthGrid.constant(5, 5, -1.0)
    with pytest.raises(NoValidDepth):
        depth_at(grid, (2, 2))


def test_backproject_principal_point():
    assert np.allclose(backproject((320.0, 240.0), 1.5, K), [0.0, 0.0, 1.5], atol=0)


def test_backproject_offset_pixel():
    # (420-320)/500 * 1.0 = 0.2
    assert np.allclose(backproject((420.0, 240.0), 1.0, K), [0.2, 0.0, 1.0])


def test_backproject_unit_intrinsics():
    K1 = CameraIntrinsics(fx=1.0, fy=1.0, cx=0.0, cy=0.0, width=10, height=10)
    assert np.allclose(backproject((0.0, 0.0), 2.0, K1), [0.0, 0.0, 2.0], atol=0)


def test_backproject_rejects_nonpositive_depth():
    with pytest.raises(NonPositiveDepth):
        backproject((320.0, 240.0), 0.0, K)


def test_project_optical_axis():
    pix, z = project((0.0, 0.0, 1.5), K)
    assert tuple(pix) == (320.0, 240.0) and z == 1.5


def test_project_inverse_of_backproject_example():
    pix, z = project((0.2, 0.0, 1.0), K)
    assert np.allclose(pix, [420.0, 240.0]) and z == 1.0


def test_project_behind_camera():
    with pytest.raises(BehindCamera):
        project((0.0, 0.0, -0.1), K)


def test_roundtrip_random_points():
    rng = make_rng(11)
    for _ in range(1000):
        p = np.array([rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.1, 10)])
        pix, z = project(p, K)
        assert np.abs(backproject(pix, z, K) - p).max() < 1e-9


def test_backproject_scaling():
    rng = make_rng(12)
    for _ in range(100):
        pix = rng.uniform(0, 640), rng.uniform(0, 480)
        d = rng.uniform(0.1, 5.0)
        lam = rng.uniform(0.1, 10.0)
        assert np.abs(backproject(pix, lam * d, K) -
                      lam * backproject(pix, d, K)).max() < 1e-12


def test_transform_point_cases():
    assert np.array_equal(transform_point(RigidTransform.identity(), (1.0, 2.0, 3.0)),
                          [1.0, 2.0, 3.0])
    T = RigidTransform(np.eye(3), [0.0, 0.0, 1.0])
    assert np.allclose(transform_point(T, (1.0, 2.0, 3.0)), [1.0, 2.0, 4.0], atol=0)
    Rz90 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    got = transform_point(RigidTransform(Rz90, np.zeros(3)), (1.0, 0.0, 0.0))
    assert np.abs(got - np.array([0.0, 1.0, 0.0])).max() < 1e-12


def test_transform_preserves_pairwise_distances():
    rng = make_rng(13)
    for _ in range(50):
        T = RigidTransform(random_rotation(rng), rng.normal(size=3))
        a, b = rng.normal(size=3), rng.normal(size=3)
        da = np.linalg.norm(transform_point(T, a) - transform_point(T, b))
        assert abs(da - np.linalg.norm(a - b)) < 1e-12
