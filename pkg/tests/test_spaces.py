import numpy as np
import pytest

from voxelglass.spaces import (
    CyclicSpaceEdge,
    DisconnectedSpace,
    ModelTransform,
    Pose,
    SpaceGraph,
    SpaceId,
    UnknownSpace,
    apply_hand_delta,
    build_render_matrix,
    compose,
    invert,
)
from voxelglass.spaces.pose import matrix_to_quat, quat_to_matrix, rotation_angle


def random_pose(rng):
    q = rng.normal(size=4)
    return Pose(quat_to_matrix(q), rng.normal(size=3))


class TestPose:
    def test_compose_identity(self):
        rng = np.random.default_rng(1)
        p = random_pose(rng)
        out = compose(Pose.identity(), p)
        assert np.allclose(out.rotation, p.rotation)
        assert np.allclose(out.translation, p.translation)

    def test_inverse_cancels(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            p = random_pose(rng)
            out = compose(invert(p), p)
            assert np.allclose(out.rotation, np.eye(3), atol=1e-9)
            assert np.allclose(out.translation, 0, atol=1e-9)

    def test_hand_multiplied_chain(self):
        sensor2world = Pose.from_translation(0.0, 1.6, 0.0)
        marker2sensor = Pose.from_translation(0.0, 0.0, 0.5)
        marker2world = compose(sensor2world, marker2sensor)
        assert np.allclose(marker2world.translation, [0.0, 1.6, 0.5])

    def test_closure_keeps_orthonormality(self):
        rng = np.random.default_rng(3)
        p = random_pose(rng)
        for _ in range(200):
            p = compose(p, random_pose(rng))
        r = p.rotation
        assert np.allclose(r.T @ r, np.eye(3), atol=1e-6)
        assert np.linalg.det(r) == pytest.approx(1.0, abs=1e-6)

    def test_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            Pose(np.eye(3) * 2.0, np.zeros(3))

    def test_quaternion_round_trip(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            p = random_pose(rng)
            q = matrix_to_quat(p.rotation)
            assert np.allclose(quat_to_matrix(q), p.rotation, atol=1e-9)


class TestSpaceGraph:
    def _graph(self):
        g = SpaceGraph()
        g.set_edge(SpaceId.SENSOR, SpaceId.WORLD, Pose.from_translation(0, 1.6, 0))
        g.set_edge(SpaceId.MARKER, SpaceId.SENSOR, Pose.from_translation(0, 0, 0.5))
        return g

    def test_resolve_self_identity(self):
        g = self._graph()
        p = g.resolve(SpaceId.WORLD, SpaceId.WORLD)
        assert np.allclose(p.as_matrix(), np.eye(4))

    def test_marker_to_world_chain(self):
        g = self._graph()
        p = g.resolve(SpaceId.MARKER, SpaceId.WORLD)
        assert np.allclose(p.translation, [0, 1.6, 0.5])

    def test_unknown_space(self):
        g = self._graph()
        with pytest.raises(UnknownSpace):
            g.resolve(SpaceId.HAND_LEFT, SpaceId.WORLD)

    def test_disconnected_space(self):
        g = SpaceGraph()
        g.set_edge(SpaceId.MARKER, SpaceId.SENSOR, Pose())
        with pytest.raises(DisconnectedSpace):
            g.resolve(SpaceId.MARKER, SpaceId.WORLD)

    def test_cycle_rejected(self):
        g = self._graph()
        with pytest.raises(CyclicSpaceEdge):
            g.set_edge(SpaceId.SENSOR, SpaceId.MARKER, Pose())

    def test_path_independence(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            g = SpaceGraph()
            g.set_edge(SpaceId.SENSOR, SpaceId.WORLD, random_pose(rng))
            g.set_edge(SpaceId.MARKER, SpaceId.SENSOR, random_pose(rng))
            g.set_edge(SpaceId.HAND_LEFT, SpaceId.WORLD, random_pose(rng))
            a, b, c = SpaceId.MARKER, SpaceId.HAND_LEFT, SpaceId.SENSOR
            direct = g.resolve(a, c)
            chained = compose(g.resolve(b, c), g.resolve(a, b))
            assert np.allclose(direct.as_matrix(), chained.as_matrix(), atol=1e-9)

    def test_marker_update_leaves_sensor_alone(self):
        g = self._graph()
        sensor_before = g.resolve(SpaceId.SENSOR, SpaceId.WORLD)
        marker_before = g.resolve(SpaceId.MARKER, SpaceId.WORLD)
        g.update_marker(Pose.from_translation(0.3, 0.0, 0.9), weight=0.5)
        marker_after = g.resolve(SpaceId.MARKER, SpaceId.WORLD)
        sensor_after = g.resolve(SpaceId.SENSOR, SpaceId.WORLD)
        assert np.allclose(sensor_before.as_matrix(), sensor_after.as_matrix())
        assert not np.allclose(marker_before.as_matrix(), marker_after.as_matrix())

    def test_marker_blend_converges(self):
        g = self._graph()
        target = Pose.from_translation(1.0, 2.0, 3.0)
        for _ in range(80):
            g.update_marker(target, weight=0.3)
        pose = g.resolve(SpaceId.MARKER, SpaceId.SENSOR)
        assert np.allclose(pose.translation, target.translation, atol=1e-6)


class TestRenderMatrix:
    def test_all_identity(self):
        m = build_render_matrix(np.eye(4), np.eye(4), None, ModelTransform())
        assert np.allclose(m, np.eye(4))

    def test_marker_translation_column(self):
        m = build_render_matrix(
            np.eye(4), np.eye(4), Pose.from_translation(1, 0, 0), ModelTransform()
        )
        assert np.allclose(m[:3, 3], [1, 0, 0])

    def test_matches_brute_force_product(self):
        rng = np.random.default_rng(12)
        proj = np.diag([1.2, 0.8, -1.1, 1.0])
        proj[3, 2] = -1.0
        view = random_pose(rng).as_matrix()
        marker = random_pose(rng)
        model = ModelTransform(scale=(0.5, 2.0, 1.5),
                               rotation=random_pose(rng).rotation,
                               translation=rng.normal(size=3))
        got = build_render_matrix(proj, view, marker, model)
        want = proj @ view @ marker.as_matrix() @ model.as_matrix()
        assert np.allclose(got, want, atol=1e-12)

    def test_singular_projection_rejected(self):
        with pytest.raises(ValueError):
            build_render_matrix(np.zeros((4, 4)), np.eye(4), None, ModelTransform())


class TestHandDelta:
    def test_simple_shift(self):
        m = apply_hand_delta(ModelTransform(), (0.1, 0, 0), 1.0)
        assert np.allclose(m.translation, [0.1, 0, 0])

    def test_zero_sensitivity(self):
        base = ModelTransform(translation=(1, 2, 3))
        m = apply_hand_delta(base, (5, 5, 5), 0.0)
        assert np.allclose(m.translation, base.translation)

    def test_linearity(self):
        base = ModelTransform()
        twice_half = apply_hand_delta(apply_hand_delta(base, (0.2, 0, 0), 0.5), (0.2, 0, 0), 0.5)
        once_full = apply_hand_delta(base, (0.2, 0, 0), 1.0)
        assert np.allclose(twice_half.translation, once_full.translation)

    def test_rotation_scale_untouched(self):
        rng = np.random.default_rng(5)
        base = ModelTransform(scale=(1, 2, 3), rotation=random_pose(rng).rotation)
        m = apply_hand_delta(base, (0.1, 0.2, 0.3), 0.7)
        assert np.allclose(m.rotation, base.rotation)
        assert np.allclose(m.scale, base.scale)
