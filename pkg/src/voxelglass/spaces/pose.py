"""Rigid poses: 3x3 rotation + translation, composable like 4x4 matrices.

A ``Pose`` maps points from its own frame into a parent frame:
``p_parent = R @ p_child + t``.  Composition follows matrix-product
semantics, so ``compose(a, b)`` applies ``b`` first, then ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ORTHO_TOL = 1e-6


def _check_rotation(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {r.shape}")
    if not np.allclose(r.T @ r, np.eye(3), atol=ORTHO_TOL):
        raise ValueError("rotation is not orthonormal within tolerance")
    if not abs(np.linalg.det(r) - 1.0) < ORTHO_TOL:
        raise ValueError("rotation determinant is not +1")
    return r


@dataclass(frozen=True)
class Pose:
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "rotation", _check_rotation(self.rotation))
        t = np.asarray(self.translation, dtype=float).reshape(3)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def from_translation(x: float, y: float, z: float) -> "Pose":
        return Pose(np.eye(3), np.array([x, y, z], dtype=float))

    @staticmethod
    def from_axis_angle(axis, angle: float, translation=(0.0, 0.0, 0.0)) -> "Pose":
        axis = np.asarray(axis, dtype=float)
        n = np.linalg.norm(axis)
        if n == 0.0:
            return Pose(np.eye(3), np.asarray(translation, dtype=float))
        axis = axis / n
        k = np.array(
            [
                [0.0, -axis[2], axis[1]],
                [axis[2], 0.0, -axis[0]],
                [-axis[1], axis[0], 0.0],
            ]
        )
        r = np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)
        return Pose(r, np.asarray(translation, dtype=float))

    @staticmethod
    def from_matrix(m: np.ndarray) -> "Pose":
        m = np.asarray(m, dtype=float)
        if m.shape != (4, 4):
            raise ValueError("expected a 4x4 homogeneous matrix")
        return Pose(m[:3, :3], m[:3, 3])

    @staticmethod
    def from_quaternion(q, translation=(0.0, 0.0, 0.0)) -> "Pose":
        """Build from a (w, x, y, z) quaternion; normalizes first."""
        return Pose(quat_to_matrix(q), np.asarray(translation, dtype=float))

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def quaternion(self) -> np.ndarray:
        """Rotation as a unit quaternion (w, x, y, z), w >= 0."""
        return matrix_to_quat(self.rotation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform one point or an (n, 3) array of points."""
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    def renormalized(self) -> "Pose":
        """Snap the rotation to the nearest orthonormal matrix (polar projection)."""
        return Pose(nearest_rotation(self.rotation), self.translation)


def compose(a: Pose, b: Pose) -> Pose:
    """Pose equivalent to applying ``b`` first, then ``a`` (matrix product a @ b)."""
    r = a.rotation @ b.rotation
    t = a.rotation @ b.translation + a.translation
    return Pose(nearest_rotation(r), t)


def invert(a: Pose) -> Pose:
    rt = a.rotation.T
    return Pose(rt, -(rt @ a.translation))


def nearest_rotation(m: np.ndarray) -> np.ndarray:
    """Closest proper rotation to ``m`` in the Frobenius sense, via SVD."""
    u, _, vt = np.linalg.svd(np.asarray(m, dtype=float))
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


def quat_to_matrix(q) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(4)
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValueError("zero quaternion")
    w, x, y, z = q / n
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(r: np.ndarray) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    tr = np.trace(r)
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s]
        )
    elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
        s = np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        q = np.array(
            [(r[2, 1] - r[1, 2]) / s, 0.25 * s, (r[0, 1] + r[1, 0]) / s, (r[0, 2] + r[2, 0]) / s]
        )
    elif r[1, 1] > r[2, 2]:
        s = np.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        q = np.array(
            [(r[0, 2] - r[2, 0]) / s, (r[0, 1] + r[1, 0]) / s, 0.25 * s, (r[1, 2] + r[2, 1]) / s]
        )
    else:
        s = np.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        q = np.array(
            [(r[1, 0] - r[0, 1]) / s, (r[0, 2] + r[2, 0]) / s, (r[1, 2] + r[2, 1]) / s, 0.25 * s]
        )
    q = q / np.linalg.norm(q)
    if q[0] < 0:
        q = -q
    return q


def rotation_angle(r: np.ndarray) -> float:
    """Rotation angle in radians of a rotation matrix."""
    c = (np.trace(r) - 1.0) / 2.0
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def slerp_blend(a: np.ndarray, b: np.ndarray, weight: float) -> np.ndarray:
    """Blend rotation ``a`` toward ``b`` by ``weight`` (normalized quaternion lerp)."""
    qa = matrix_to_quat(a)
    qb = matrix_to_quat(b)
    if np.dot(qa, qb) < 0:
        qb = -qb
    q = (1.0 - weight) * qa + weight * qb
    return quat_to_matrix(q)
