"""Camera model tests: intrinsics, spherical poses, relative poses, rays,
projection, and their round-trip invariants."""

import math

import numpy as np
import pytest

from epiview.camera import (
    CameraPose,
    Intrinsics,
    Ray,
    intrinsics_from_fov,
    pixel_ray,
    project_point,
    ray_directions,
    relative_pose,
    spherical_pose,
)


class TestIntrinsicsFromFov:
    def test_90_degrees_two_pixels(self):
        intr = intrinsics_from_fov(90.0, 2, 2)
        assert intr.focal == pytest.approx(1.0, abs=1e-12)
        assert intr.cx == 1.0 and intr.cy == 1.0

    def test_paper_fov_at_256(self):
        # Oracle: focal = width / (2 tan(fov/2)), evaluated independently.
        expected = 256.0 / (2.0 * math.tan(math.radians(40.26) / 2.0))
        intr = intrinsics_from_fov(40.26, 256, 256)
        assert intr.focal == expected
        assert expected == pytest.approx(349.2097688513841)

    def test_linear_in_width(self):
        big = intrinsics_from_fov(40.26, 256, 256)
        small = intrinsics_from_fov(40.26, 32, 32)
        assert small.focal == pytest.approx(big.focal * 32 / 256, rel=1e-12)

    def test_scaled_matches_fov_at_feature_resolution(self):
        big = intrinsics_from_fov(40.26, 256, 256)
        feat = big.scaled(32, 32)
        direct = intrinsics_from_fov(40.26, 32, 32)
        assert feat.focal == pytest.approx(direct.focal, rel=1e-12)
        assert feat.cx == direct.cx and feat.cy == direct.cy

    @pytest.mark.parametrize("fov", [0.0, 180.0, -10.0, 200.0])
    def test_rejects_out_of_range_fov(self, fov):
        with pytest.raises(ValueError):
            intrinsics_from_fov(fov, 16, 16)

    def test_rejects_empty_image(self):
        with pytest.raises(ValueError):
            intrinsics_from_fov(60.0, 0, 16)


class TestSphericalPose:
    def test_front_view(self):
        pose = spherical_pose(0.0, 0.0, 3.5)
        np.testing.assert_allclose(pose.position, [0.0, 0.0, 3.5], atol=1e-12)
        np.testing.assert_allclose(pose.optical_axis, [0.0, 0.0, -1.0], atol=1e-12)

    def test_side_view(self):
        pose = spherical_pose(0.0, 90.0, 3.5)
        np.testing.assert_allclose(pose.position, [3.5, 0.0, 0.0], atol=1e-12)

    def test_top_pole_uses_fallback_up(self):
        pose = spherical_pose(90.0, 0.0, 3.5)
        np.testing.assert_allclose(pose.position, [0.0, 3.5, 0.0], atol=1e-9)
        # the frame must still be a proper rotation looking straight down
        np.testing.assert_allclose(pose.optical_axis, [0.0, -1.0, 0.0], atol=1e-9)
        assert np.linalg.det(pose.rotation) == pytest.approx(1.0, abs=1e-9)

    def test_rejects_bad_elevation_and_distance(self):
        with pytest.raises(ValueError):
            spherical_pose(91.0, 0.0, 3.5)
        with pytest.raises(ValueError):
            spherical_pose(0.0, 0.0, 0.0)

    def test_origin_projects_to_principal_point(self):
        intr = intrinsics_from_fov(40.26, 256, 256)
        rng = np.random.default_rng(11)
        for _ in range(50):
            el = rng.uniform(-90.0, 90.0)
            az = rng.uniform(0.0, 360.0)
            pose = spherical_pose(el, az, 3.5)
            u, v, depth = project_point(pose, intr, [0.0, 0.0, 0.0])
            assert abs(u - intr.cx) <= 1e-6
            assert abs(v - intr.cy) <= 1e-6
            assert depth == pytest.approx(3.5, abs=1e-9)


class TestRelativePose:
    def test_identity(self):
        pose = spherical_pose(12.0, 34.0, 3.5)
        rel = relative_pose(pose, pose)
        np.testing.assert_allclose(rel.rotation, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(rel.translation, np.zeros(3), atol=1e-12)

    def test_inverse_composition(self):
        a = spherical_pose(20.0, 40.0, 3.5)
        b = spherical_pose(-35.0, 250.0, 3.5)
        ab = relative_pose(a, b)
        ba = relative_pose(b, a)
        np.testing.assert_allclose(ba.rotation @ ab.rotation, np.eye(3), atol=1e-9)
        np.testing.assert_allclose(
            ba.rotation @ ab.translation + ba.translation, np.zeros(3), atol=1e-9
        )

    def test_point_mapping_against_direct_projection(self):
        # Oracle: map random world points into both camera frames directly.
        src = spherical_pose(0.0, 0.0, 3.5)
        tgt = spherical_pose(0.0, 90.0, 3.5)
        rel = relative_pose(src, tgt)
        rng = np.random.default_rng(5)
        for _ in range(10):
            x_world = rng.uniform(-0.5, 0.5, 3)
            x_src = src.rotation.T @ (x_world - src.position)
            x_tgt = tgt.rotation.T @ (x_world - tgt.position)
            np.testing.assert_allclose(rel.apply(x_src), x_tgt, atol=1e-9)

    def test_chain_composition(self):
        a = spherical_pose(10.0, 15.0, 3.5)
        b = spherical_pose(45.0, 120.0, 2.0)
        c = spherical_pose(-60.0, 300.0, 5.0)
        ab = relative_pose(a, b)
        bc = relative_pose(b, c)
        ac = relative_pose(a, c)
        np.testing.assert_allclose(bc.rotation @ ab.rotation, ac.rotation, atol=1e-9)
        np.testing.assert_allclose(
            bc.rotation @ ab.translation + bc.translation, ac.translation, atol=1e-9
        )

    def test_compositions_stay_orthonormal(self):
        rng = np.random.default_rng(3)
        poses = [
            spherical_pose(rng.uniform(-89, 89), rng.uniform(0, 360), 3.5)
            for _ in range(8)
        ]
        r = np.eye(3)
        for i in range(len(poses) - 1):
            r = relative_pose(poses[i], poses[i + 1]).rotation @ r
            assert np.linalg.norm(r.T @ r - np.eye(3)) <= 1e-9


class TestPixelRay:
    def test_center_pixel_is_optical_axis(self):
        intr = intrinsics_from_fov(40.26, 33, 33)  # odd: a pixel sits on the axis
        for el, az in [(0.0, 0.0), (30.0, 100.0), (-45.0, 280.0)]:
            pose = spherical_pose(el, az, 3.5)
            ray = pixel_ray(pose, intr, 16, 16)
            np.testing.assert_allclose(ray.direction, pose.optical_axis, atol=1e-9)

    def test_directions_are_unit(self):
        intr = intrinsics_from_fov(60.0, 8, 8)
        pose = spherical_pose(25.0, 45.0, 3.5)
        for u in range(8):
            for v in range(8):
                ray = pixel_ray(pose, intr, u, v)
                assert abs(np.linalg.norm(ray.direction) - 1.0) <= 1e-9

    def test_grid_matches_scalar_rays(self):
        intr = intrinsics_from_fov(55.0, 5, 4)
        pose = spherical_pose(-10.0, 200.0, 3.5)
        grid = ray_directions(pose, intr)
        for v in range(4):
            for u in range(5):
                np.testing.assert_allclose(
                    grid[v, u], pixel_ray(pose, intr, u, v).direction, atol=1e-12
                )

    def test_rejects_out_of_bounds_pixel(self):
        intr = intrinsics_from_fov(60.0, 8, 8)
        pose = spherical_pose(0.0, 0.0, 3.5)
        with pytest.raises(ValueError):
            pixel_ray(pose, intr, 8, 0)
        with pytest.raises(ValueError):
            pixel_ray(pose, intr, 0, -1)

    def test_roundtrip_through_projection(self):
        intr = intrinsics_from_fov(40.26, 256, 256)
        rng = np.random.default_rng(17)
        for _ in range(1000):
            pose = spherical_pose(rng.uniform(-89, 89), rng.uniform(0, 360), 3.5)
            u = int(rng.integers(0, 256))
            v = int(rng.integers(0, 256))
            depth = rng.uniform(1.0, 10.0)
            ray = pixel_ray(pose, intr, u, v)
            # walk along the ray, normalizing for the axis/direction angle
            cos_angle = -(pose.rotation.T @ ray.direction)[2]
            point = ray.origin + (depth / cos_angle) * ray.direction
            pu, pv, pdepth = project_point(pose, intr, point)
            assert abs(pu - (u + 0.5)) <= 1e-6
            assert abs(pv - (v + 0.5)) <= 1e-6
            assert pdepth == pytest.approx(depth, abs=1e-9)


class TestProjectPoint:
    def test_on_axis_point(self):
        intr = intrinsics_from_fov(40.26, 256, 256)
        pose = spherical_pose(0.0, 0.0, 3.5)
        u, v, depth = project_point(pose, intr, [0.0, 0.0, 0.0])
        assert (u, v) == (intr.cx, intr.cy)
        assert depth == pytest.approx(3.5, abs=1e-12)

    def test_behind_camera_is_marked(self):
        intr = intrinsics_from_fov(40.26, 64, 64)
        pose = spherical_pose(0.0, 0.0, 3.5)
        assert project_point(pose, intr, [0.0, 0.0, 10.0]) is None

    def test_ray_projection_duality(self):
        intr = intrinsics_from_fov(70.0, 32, 32)
        pose = spherical_pose(33.0, 190.0, 3.5)
        ray = pixel_ray(pose, intr, 7, 21)
        u, v, _ = project_point(pose, intr, ray.origin + 2.0 * ray.direction)
        assert abs(u - 7.5) <= 1e-6
        assert abs(v - 21.5) <= 1e-6


class TestValueTypes:
    def test_pose_rejects_improper_rotation(self):
        flip = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(ValueError):
            CameraPose(flip, np.zeros(3))

    def test_pose_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            CameraPose(np.eye(3) * 1.001, np.zeros(3))

    def test_ray_requires_unit_direction(self):
        with pytest.raises(ValueError):
            Ray([0.0, 0.0, 0.0], [0.0, 0.0, 2.0])

    def test_default_principal_point_is_center(self):
        intr = Intrinsics(100.0, 64, 48)
        assert intr.cx == 32.0 and intr.cy == 24.0

    def test_intrinsics_matrix_layout(self):
        intr = Intrinsics(100.0, 64, 48)
        np.testing.assert_array_equal(
            intr.matrix(), [[100.0, 0.0, 32.0], [0.0, 100.0, 24.0], [0.0, 0.0, 1.0]]
        )
