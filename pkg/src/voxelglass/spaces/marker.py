"""Planar marker pose recovery from four corner observations.

The detector itself lives outside this engine; what arrives here is the
pixel positions of a square marker's four corners.  A homography is fitted
to the plane-to-image correspondences by direct linear transform, and
decomposed against the camera intrinsics into a rigid marker-to-sensor pose:

    [b1 b2 b3] = K^-1 H,  scale = 1 / ||b1||,
    r1 = scale*b1, r2 = scale*b2, r3 = r1 x r2, t = scale*b3,

with the rotation snapped to the nearest orthonormal matrix afterwards.

Corner order convention: the marker frame puts corner k at
(+-s/2, +-s/2, 0) in the order (-,-), (+,-), (+,+), (-,+), i.e.
counter-clockwise starting at the bottom-left when the marker faces you.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pose import Pose, nearest_rotation


class DegenerateCorners(ValueError):
    """Corner set is collinear or spans (almost) no area."""


class BehindCamera(ValueError):
    """Recovered marker depth is not in front of the camera."""


@dataclass(frozen=True)
class PinholeCamera:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int = 640
    height: int = 480

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx <= self.width and 0 <= self.cy <= self.height):
            raise ValueError("principal point must lie inside the image")

    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    @staticmethod
    def default() -> "PinholeCamera":
        return PinholeCamera(fx=600.0, fy=600.0, cx=320.0, cy=240.0, width=640, height=480)


@dataclass(frozen=True)
class MarkerObservation:
    marker_size: float
    corners: np.ndarray  # (4, 2) pixel coordinates in canonical order

    def __post_init__(self):
        if self.marker_size <= 0:
            raise ValueError("marker_size must be positive")
        c = np.asarray(self.corners, dtype=float)
        if c.shape != (4, 2):
            raise ValueError("corners must be a (4, 2) array")
        object.__setattr__(self, "corners", c)


def marker_corners_3d(size: float) -> np.ndarray:
    h = size / 2.0
    return np.array(
        [[-h, -h, 0.0], [h, -h, 0.0], [h, h, 0.0], [-h, h, 0.0]]
    )


def project_marker(cam: PinholeCamera, pose: Pose, marker_size: float) -> MarkerObservation:
    """Synthetic projection of a marker at ``pose`` (marker -> sensor frame).

    Used for generating test observations; the inverse of
    ``estimate_marker_pose`` on noiseless data.
    """
    pts = pose.apply(marker_corners_3d(marker_size))
    z = pts[:, 2]
    if np.any(z <= 0):
        raise BehindCamera("marker corner at or behind the camera plane")
    u = cam.fx * pts[:, 0] / z + cam.cx
    v = cam.fy * pts[:, 1] / z + cam.cy
    return MarkerObservation(marker_size, np.stack([u, v], axis=1))


def _normalizing_similarity(pts: np.ndarray) -> np.ndarray:
    """Hartley conditioning: translate centroid to origin, mean radius sqrt(2)."""
    centroid = pts.mean(axis=0)
    d = np.linalg.norm(pts - centroid, axis=1).mean()
    s = np.sqrt(2.0) / d if d > 0 else 1.0
    return np.array(
        [[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]]
    )


def _homography_dlt(plane_pts: np.ndarray, pixel_pts: np.ndarray) -> np.ndarray:
    """Homography H with pixel ~ H @ (X, Y, 1) from four exact correspondences."""
    t_plane = _normalizing_similarity(plane_pts)
    t_pix = _normalizing_similarity(pixel_pts)
    ph = np.column_stack([plane_pts, np.ones(len(plane_pts))]) @ t_plane.T
    qh = np.column_stack([pixel_pts, np.ones(len(pixel_pts))]) @ t_pix.T

    rows = []
    for (x, y, _), (u, v, _) in zip(ph, qh):
        rows.append([x, y, 1, 0, 0, 0, -u * x, -u * y, -u])
        rows.append([0, 0, 0, x, y, 1, -v * x, -v * y, -v])
    a = np.asarray(rows)
    _, _, vt = np.linalg.svd(a)
    h_norm = vt[-1].reshape(3, 3)
    h = np.linalg.inv(t_pix) @ h_norm @ t_plane
    if abs(h[2, 2]) > 1e-12:
        h = h / h[2, 2]
    return h


def estimate_marker_pose(cam: PinholeCamera, obs: MarkerObservation,
                         refine_iterations: int = 10) -> Pose:
    """Recover the marker-to-sensor pose from one corner observation.

    The homography decomposition gives the initial estimate; a short
    Gauss-Newton pass then minimizes pixel reprojection error, which keeps
    the recovered rotation stable under corner noise.  Set
    ``refine_iterations=0`` for the raw algebraic solution.
    """
    corners = obs.corners
    # Degeneracy: the quadrilateral must span real area (shoelace formula).
    x, y = corners[:, 0], corners[:, 1]
    area = 0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))
    span = max(np.ptp(x), np.ptp(y), 1.0)
    if area < 1e-9 * span * span:
        raise DegenerateCorners("corners are collinear or coincident")

    plane = marker_corners_3d(obs.marker_size)[:, :2]
    h = _homography_dlt(plane, corners)

    b = np.linalg.inv(cam.matrix()) @ h
    n1 = np.linalg.norm(b[:, 0])
    if n1 < 1e-12:
        raise DegenerateCorners("homography column degenerate")
    scale = 1.0 / n1
    # The homography sign is arbitrary; pick the one placing the marker in front.
    if b[2, 2] * scale < 0:
        scale = -scale
    r1 = scale * b[:, 0]
    r2 = scale * b[:, 1]
    t = scale * b[:, 2]
    if t[2] <= 1e-12:
        raise BehindCamera(f"marker depth {t[2]:.3g} not positive")
    r3 = np.cross(r1, r2)
    rotation = nearest_rotation(np.column_stack([r1, r2, r3]))
    pose = Pose(rotation, t)
    if refine_iterations > 0:
        pose = _refine_pose(cam, obs, pose, refine_iterations)
    return pose


def _refine_pose(cam: PinholeCamera, obs: MarkerObservation, pose: Pose, iterations: int) -> Pose:
    """Gauss-Newton reprojection refinement over (rotation, translation)."""
    pts = marker_corners_3d(obs.marker_size)
    target = obs.corners.reshape(-1)
    r, t = pose.rotation, pose.translation
    for _ in range(iterations):
        pc = pts @ r.T + t
        z = pc[:, 2]
        if np.any(z <= 1e-9):
            break
        u = cam.fx * pc[:, 0] / z + cam.cx
        v = cam.fy * pc[:, 1] / z + cam.cy
        residual = np.stack([u, v], axis=1).reshape(-1) - target
        jac = np.zeros((8, 6))
        for i in range(4):
            px, py, pz = pc[i]
            du = np.array([cam.fx / pz, 0.0, -cam.fx * px / pz**2])
            dv = np.array([0.0, cam.fy / pz, -cam.fy * py / pz**2])
            # left-perturbation: d(pc)/d(omega) = -[pc]_x
            skew = np.array([[0.0, -pz, py], [pz, 0.0, -px], [-py, px, 0.0]])
            jac[2 * i, :3] = du @ (-skew)
            jac[2 * i, 3:] = du
            jac[2 * i + 1, :3] = dv @ (-skew)
            jac[2 * i + 1, 3:] = dv
        delta, *_ = np.linalg.lstsq(jac, -residual, rcond=None)
        omega, dt = delta[:3], delta[3:]
        angle = np.linalg.norm(omega)
        if angle > 1e-15:
            axis = omega / angle
            k = np.array(
                [[0.0, -axis[2], axis[1]], [axis[2], 0.0, -axis[0]], [-axis[1], axis[0], 0.0]]
            )
            d_rot = np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)
            r = nearest_rotation(d_rot @ r)
        t = t + dt
        if np.linalg.norm(delta) < 1e-12:
            break
    if t[2] <= 1e-12:
        raise BehindCamera(f"refined marker depth {t[2]:.3g} not positive")
    return Pose(r, t)


def reprojection_error(cam: PinholeCamera, pose: Pose, obs: MarkerObservation) -> float:
    """Mean pixel distance between observed corners and the pose's projection."""
    proj = project_marker(cam, pose, obs.marker_size)
    return float(np.linalg.norm(proj.corners - obs.corners, axis=1).mean())
