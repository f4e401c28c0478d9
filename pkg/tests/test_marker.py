import numpy as np
import pytest

from voxelglass.spaces import (
    BehindCamera,
    DegenerateCorners,
    MarkerObservation,
    PinholeCamera,
    Pose,
    estimate_marker_pose,
    project_marker,
)
from voxelglass.spaces.marker import marker_corners_3d, reprojection_error
from voxelglass.spaces.pose import nearest_rotation, rotation_angle


def facing_pose(rng, d_range=(0.4, 2.0), tilt_max_deg=60.0):
    """Random marker pose roughly facing the camera (tabletop scenario)."""
    tilt_axis = rng.normal(size=2)
    tilt_axis /= np.linalg.norm(tilt_axis)
    tilt = rng.uniform(0.0, np.radians(tilt_max_deg))
    roll = rng.uniform(-np.pi, np.pi)
    rot = (Pose.from_axis_angle([tilt_axis[0], tilt_axis[1], 0.0], tilt).rotation
           @ Pose.from_axis_angle([0, 0, 1], roll).rotation)
    d = rng.uniform(*d_range)
    t = np.array([rng.uniform(-0.25, 0.25) * d, rng.uniform(-0.18, 0.18) * d, d])
    return Pose(nearest_rotation(rot), t)


class TestRoundTrip:
    def test_noiseless_recovery(self):
        rng = np.random.default_rng(21)
        cam = PinholeCamera.default()
        for _ in range(100):
            pose = facing_pose(rng)
            est = estimate_marker_pose(cam, project_marker(cam, pose, 0.15))
            assert rotation_angle(est.rotation @ pose.rotation.T) < 1e-6
            assert np.linalg.norm(est.translation - pose.translation) < 1e-6

    def test_centered_marker_distance(self):
        cam = PinholeCamera.default()
        pose = Pose(np.eye(3), [0.0, 0.0, 1.7])
        est = estimate_marker_pose(cam, project_marker(cam, pose, 0.1))
        assert np.allclose(est.translation, [0, 0, 1.7], atol=1e-6)

    def test_raw_dlt_also_recovers_noiseless(self):
        rng = np.random.default_rng(33)
        cam = PinholeCamera.default()
        pose = facing_pose(rng)
        est = estimate_marker_pose(cam, project_marker(cam, pose, 0.15), refine_iterations=0)
        assert rotation_angle(est.rotation @ pose.rotation.T) < 1e-6
        assert np.linalg.norm(est.translation - pose.translation) < 1e-6


class TestDegenerate:
    def test_collinear_corners(self):
        cam = PinholeCamera.default()
        corners = np.array([[10, 10], [20, 20], [30, 30], [40, 40]], dtype=float)
        with pytest.raises(DegenerateCorners):
            estimate_marker_pose(cam, MarkerObservation(0.1, corners))

    def test_coincident_corners(self):
        cam = PinholeCamera.default()
        corners = np.tile([100.0, 100.0], (4, 1))
        with pytest.raises(DegenerateCorners):
            estimate_marker_pose(cam, MarkerObservation(0.1, corners))

    def test_projection_rejects_behind_camera(self):
        cam = PinholeCamera.default()
        with pytest.raises(BehindCamera):
            project_marker(cam, Pose(np.eye(3), [0, 0, -1.0]), 0.1)

    def test_observation_validation(self):
        with pytest.raises(ValueError):
            MarkerObservation(0.0, np.zeros((4, 2)))
        with pytest.raises(ValueError):
            MarkerObservation(0.1, np.zeros((3, 2)))


class TestNoise:
    def test_median_errors_under_half_pixel_noise(self):
        rng = np.random.default_rng(55)
        cam = PinholeCamera.default()
        rot_errs, rel_t_errs = [], []
        for _ in range(300):
            pose = facing_pose(rng)
            obs = project_marker(cam, pose, 0.15)
            noisy = MarkerObservation(0.15, obs.corners + rng.uniform(-0.5, 0.5, (4, 2)))
            est = estimate_marker_pose(cam, noisy)
            rot_errs.append(np.degrees(rotation_angle(est.rotation @ pose.rotation.T)))
            rel_t_errs.append(np.linalg.norm(est.translation - pose.translation)
                              / np.linalg.norm(pose.translation))
        assert np.median(rot_errs) <= 2.0
        assert np.median(rel_t_errs) <= 0.02

    def test_refined_fits_at_least_as_well_as_truth(self):
        # reprojection-error oracle: the estimator minimizes pixel error, so in
        # median it cannot fit the noisy corners worse than the true pose does
        rng = np.random.default_rng(56)
        cam = PinholeCamera.default()
        est_err, true_err = [], []
        for _ in range(120):
            pose = facing_pose(rng)
            obs = project_marker(cam, pose, 0.15)
            noisy = MarkerObservation(0.15, obs.corners + rng.uniform(-0.5, 0.5, (4, 2)))
            est = estimate_marker_pose(cam, noisy)
            est_err.append(reprojection_error(cam, est, noisy))
            true_err.append(reprojection_error(cam, pose, noisy))
        assert np.median(est_err) <= np.median(true_err)


class TestGeometryHelpers:
    def test_canonical_corners(self):
        c = marker_corners_3d(0.2)
        assert np.allclose(c[:, 2], 0)
        assert np.allclose(np.abs(c[:, :2]), 0.1)

    def test_projection_matches_manual_pinhole(self):
        cam = PinholeCamera(500, 550, 320, 240)
        pose = Pose(np.eye(3), [0.05, -0.02, 1.0])
        obs = project_marker(cam, pose, 0.1)
        world = pose.apply(marker_corners_3d(0.1))
        manual = np.stack([
            500 * world[:, 0] / world[:, 2] + 320,
            550 * world[:, 1] / world[:, 2] + 240,
        ], axis=1)
        assert np.allclose(obs.corners, manual)
