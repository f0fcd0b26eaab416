# test_avoid_geometry.py
import math

import numpy as np
import pytest

from avoid_errors import BoundingBoxError, ConfigError, EmptyRegion, NonPositiveDepth
from avoid_geometry import (
    CameraExtrinsics,
    CameraIntrinsics,
    RigidTransform,
    VehiclePose,
    camera_to_pixel,
    camera_to_vehicle,
    camera_to_vehicle_transform,
    global_to_vehicle,
    heading_from_compass,
    localize_obstacle,
    median_depth,
    normalize_angle,
    pixel_to_camera,
    vehicle_to_camera,
    vehicle_to_global,
)

K500 = CameraIntrinsics(500.0, 500.0, 320.0, 240.0)


# ── median depth ─────────────────────────────────────────────

def test_median_odd_count():
    dm = np.arange(1, 10, dtype=float).reshape(3, 3)
    assert median_depth(dm, (0, 0, 3, 3)) == 5.0


def test_median_even_count_is_mean_of_middle_pair():
    dm = np.array([[2.0, 4.0]])
    assert median_depth(dm, (0, 0, 2, 1)) == 3.0


def test_median_skips_invalid_cells():
    dm = np.array([[0.0, 0.0, 7.0], [np.nan, -1.0, np.inf]])
    assert median_depth(dm, (0, 0, 3, 2)) == 7.0


def test_median_empty_region():
    with pytest.raises(EmptyRegion):
        median_depth(np.zeros((4, 4)), (0, 0, 4, 4))


def test_median_bbox_outside_map():
    with pytest.raises(BoundingBoxError):
        median_depth(np.ones((4, 4)), (2, 2, 6, 3))
    with pytest.raises(ValueError):
        median_depth(np.ones((4, 4)), (3, 0, 3, 2))


# ── pixel → camera ───────────────────────────────────────────

@pytest.mark.parametrize("pixel,depth,expected", [
    ((320, 240), 5.0, (0.0, 0.0, 5.0)),
    ((820, 240), 2.0, (2.0, 0.0, 2.0)),
    ((70, 490), 4.0, (-2.0, 2.0, 4.0)),
])
def test_pixel_to_camera(pixel, depth, expected):
    assert pixel_to_camera(pixel, depth, K500) == pytest.approx(expected, abs=1e-12)


def test_pixel_to_camera_rejects_non_positive_depth():
    with pytest.raises(NonPositiveDepth):
        pixel_to_camera((320, 240), 0.0, K500)


def test_projection_inverts_backprojection():
    rng = np.random.default_rng(1)
    for _ in range(200):
        u, v = rng.uniform(0, 640), rng.uniform(0, 480)
        d = rng.uniform(0.5, 30)
        px = camera_to_pixel(pixel_to_camera((u, v), d, K500), K500)
        assert (px.u, px.v, px.depth) == pytest.approx((u, v, d), abs=1e-9)


def test_intrinsics_validation():
    with pytest.raises(ConfigError):
        CameraIntrinsics(0.0, 500.0, 320.0, 240.0)
    with pytest.raises(ConfigError):
        CameraIntrinsics(500.0, 500.0, math.nan, 240.0)


# ── camera → vehicle ─────────────────────────────────────────

def test_level_camera_is_pure_axis_permutation():
    t = camera_to_vehicle_transform(CameraExtrinsics(0.0, 0.0, (0.0, 0.0)))
    expected = np.array([[0, 0, 1], [-1, 0, 0], [0, -1, 0]], dtype=float)
    np.testing.assert_allclose(t.rotation, expected, atol=1e-15)
    np.testing.assert_allclose(t.translation, 0.0)


def test_translation_column():
    t = camera_to_vehicle_transform(CameraExtrinsics(0.0, 1.5))
    np.testing.assert_allclose(t.matrix()[:3, 3], [0.0, 0.0, 1.5])


def test_tilted_optical_axis_points_down():
    t = camera_to_vehicle_transform(CameraExtrinsics(math.radians(30), 0.0))
    np.testing.assert_allclose(t.rotation @ [0, 0, 1], [0.8660254, 0.0, -0.5], atol=1e-7)


def test_camera_to_vehicle_examples():
    level = camera_to_vehicle_transform(CameraExtrinsics(0.0, 1.5))
    assert camera_to_vehicle((0, 0, 5), level) == pytest.approx((5.0, 0.0, 1.5), abs=1e-12)
    tilted = camera_to_vehicle_transform(CameraExtrinsics(math.radians(30), 1.5))
    assert camera_to_vehicle((0, 0, 5), tilted) == pytest.approx((4.3301, 0.0, -1.0), abs=1e-4)
    assert camera_to_vehicle((1, 2, 3), RigidTransform.identity()) == (1.0, 2.0, 3.0)


def test_lateral_offset_moves_camera_left():
    t = camera_to_vehicle_transform(CameraExtrinsics(0.0, 1.0, (0.3, 0.2)))
    assert camera_to_vehicle((0, 0, 4), t) == pytest.approx((4.3, 0.2, 1.0))


@pytest.mark.parametrize("deg", [-80, -45, -10, 0, 5, 10, 30, 60, 89])
def test_transform_is_orthonormal(deg):
    r = camera_to_vehicle_transform(CameraExtrinsics(math.radians(deg), 1.2)).rotation
    np.testing.assert_allclose(r @ r.T, np.eye(3), atol=1e-9)
    assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-9)


def test_transforms_preserve_distances():
    rng = np.random.default_rng(2)
    t = camera_to_vehicle_transform(CameraExtrinsics(0.3, 1.4, (0.1, -0.2)))
    for _ in range(100):
        a, b = rng.normal(size=3) * 5, rng.normal(size=3) * 5
        assert np.linalg.norm(t.apply(a) - t.apply(b)) == pytest.approx(np.linalg.norm(a - b), abs=1e-9)


def test_rigid_transform_rejects_reflection():
    with pytest.raises(ConfigError):
        RigidTransform(np.diag([1.0, 1.0, -1.0]))


def test_inverse_round_trip():
    t = camera_to_vehicle_transform(CameraExtrinsics(0.2, 1.5, (0.4, 0.1)))
    p = (1.0, -2.0, 7.5)
    assert vehicle_to_camera(camera_to_vehicle(p, t), t) == pytest.approx(p, abs=1e-12)


def test_extrinsics_validation():
    with pytest.raises(ConfigError):
        CameraExtrinsics(tilt=math.pi / 2)
    with pytest.raises(ConfigError):
        CameraExtrinsics(height=-0.1)


# ── vehicle → global ─────────────────────────────────────────

@pytest.mark.parametrize("pose,p,expected", [
    ((100, 200, 0.0), (5, 0, 0), (105, 200, 0)),
    ((100, 200, math.pi / 2), (5, 0, 0), (100, 205, 0)),
    ((0, 0, math.pi), (5, 1, 0), (-5, -1, 0)),
])
def test_vehicle_to_global(pose, p, expected):
    assert vehicle_to_global(p, VehiclePose(*pose)) == pytest.approx(expected, abs=1e-9)


def test_global_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(200):
        pose = VehiclePose(*rng.uniform(-1e3, 1e3, 2), rng.uniform(-10, 10))
        off = tuple(rng.uniform(-1, 1, 2))
        p = tuple(rng.uniform(-50, 50, 3))
        back = global_to_vehicle(vehicle_to_global(p, pose, off), pose, off)
        assert back == pytest.approx(p, abs=1e-9)


def test_antenna_offset():
    # the GPS fix sits 1 m ahead of the vehicle origin
    pose = VehiclePose(10.0, 0.0, 0.0)
    assert vehicle_to_global((0, 0, 0), pose, (1.0, 0.0)) == pytest.approx((9.0, 0.0, 0.0))


def test_pose_heading_is_wrapped():
    assert VehiclePose(0, 0, 3 * math.pi).heading == pytest.approx(math.pi)
    assert VehiclePose(0, 0, -math.pi).heading == pytest.approx(math.pi)


def test_angle_helpers():
    assert normalize_angle(-math.pi) == pytest.approx(math.pi)
    assert normalize_angle(2 * math.pi + 0.1) == pytest.approx(0.1)
    assert heading_from_compass(0.0) == pytest.approx(math.pi / 2)
    assert heading_from_compass(90.0) == pytest.approx(0.0, abs=1e-12)
    assert heading_from_compass(180.0) == pytest.approx(-math.pi / 2)


# ── full chain ───────────────────────────────────────────────

def test_localize_equals_sequential_application():
    extr = CameraExtrinsics(math.radians(10), 1.5, (0.2, -0.1))
    pose = VehiclePose(50.0, -20.0, 0.7)
    dm = np.full((480, 640), 6.0)
    got = localize_obstacle((400.0, 260.0), dm, (380, 250, 420, 270), K500, extr, pose)
    p_cam = pixel_to_camera((400.0, 260.0), 6.0, K500)
    p_veh = camera_to_vehicle(p_cam, camera_to_vehicle_transform(extr))
    assert got == pytest.approx(vehicle_to_global(p_veh, pose), abs=1e-12)


def test_localize_principal_point():
    dm = np.full((10, 10), 5.0)
    g = localize_obstacle((320, 240), dm, (0, 0, 10, 10), K500, CameraExtrinsics(), VehiclePose(100, 200, 0))
    assert g == pytest.approx((105.0, 200.0, 0.0), abs=1e-12)


def test_localize_propagates_empty_region():
    with pytest.raises(EmptyRegion):
        localize_obstacle((320, 240), np.zeros((10, 10)), (0, 0, 10, 10), K500, CameraExtrinsics(),
                          VehiclePose(0, 0, 0))
