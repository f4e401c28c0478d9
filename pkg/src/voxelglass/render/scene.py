"""Scene description for the CPU renderers.

Conventions: right-handed world, GL-style cameras (view space looks down -z,
clip via perspective divide into [-1,1]^3).  The volume occupies the unit
cube [0,1]^3 in model space; the model transform places it in the world.
Pixel row 0 is the top of the image.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..dicom.volume import VolumeDataset
from ..spaces.model import ModelTransform
from ..spaces.pose import Pose
from ..xfer.transfer import TransferFunction


class ResolutionMismatch(ValueError):
    """Spectator background does not match the PV view resolution."""


class RenderMethod(enum.Enum):
    TEXTURE_BASED = "texture"
    VIEW_ALIGNED = "view-aligned"
    RAYCAST = "raycast"


@dataclass(frozen=True)
class RenderSettings:
    method: RenderMethod = RenderMethod.RAYCAST
    resolution: tuple[int, int] = (256, 256)  # (w, h) per view
    slice_count: int = 256
    step_size: float = 1.0 / 512.0  # world units along the ray
    early_termination_alpha: float = 0.98
    background: tuple[float, float, float] = (0.0, 0.0, 0.0)
    workers: int = 1

    def __post_init__(self):
        if self.slice_count < 2:
            raise ValueError("slice_count must be >= 2")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.resolution[0] < 16 or self.resolution[1] < 16:
            raise ValueError("resolution must be at least 16x16")
        if not (0.0 < self.early_termination_alpha <= 1.0):
            raise ValueError("early_termination_alpha must be in (0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class CutPlane:
    enabled: bool = False
    point: np.ndarray = field(default_factory=lambda: np.zeros(3))
    normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float).reshape(3))
        n = np.asarray(self.normal, dtype=float).reshape(3)
        norm = np.linalg.norm(n)
        if abs(norm - 1.0) > 1e-6:
            if norm < 1e-12:
                raise ValueError("cut plane normal must be nonzero")
            n = n / norm
        object.__setattr__(self, "normal", n)


@dataclass(frozen=True)
class View:
    view: np.ndarray  # 4x4 world -> view (rigid)
    proj: np.ndarray  # 4x4 view -> clip

    def __post_init__(self):
        v = np.asarray(self.view, dtype=float)
        p = np.asarray(self.proj, dtype=float)
        if v.shape != (4, 4) or p.shape != (4, 4):
            raise ValueError("view and proj must be 4x4")
        r = v[:3, :3]
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-6):
            raise ValueError("view matrix must be rigid")
        object.__setattr__(self, "view", v)
        object.__setattr__(self, "proj", p)

    @property
    def eye(self) -> np.ndarray:
        """Camera position in world coordinates."""
        r = self.view[:3, :3]
        return -(r.T @ self.view[:3, 3])

    @property
    def forward(self) -> np.ndarray:
        """Unit viewing direction in world coordinates."""
        return -self.view[2, :3]

    @property
    def near(self) -> float:
        p = self.proj
        if abs(p[3, 2] + 1.0) < 1e-9:  # perspective
            return p[2, 3] / (p[2, 2] - 1.0)
        return (p[2, 3] + 1.0) / p[2, 2] if p[2, 2] != 0 else 0.0


@dataclass(frozen=True)
class ViewRig:
    left: View
    right: View
    pv: Optional[View] = None

    def views(self) -> dict[str, View]:
        out = {"left": self.left, "right": self.right}
        if self.pv is not None:
            out["pv"] = self.pv
        return out

    @staticmethod
    def stereo(
        eye_center,
        target,
        up=(0.0, 1.0, 0.0),
        baseline: float = 0.064,
        fov_y_deg: float = 90.0,
        aspect: float = 1.0,
        near: float = 0.1,
        far: float = 20.0,
        with_pv: bool = True,
    ) -> "ViewRig":
        """Symmetric two-eye rig, optionally with a centered spectator camera."""
        eye_center = np.asarray(eye_center, dtype=float)
        target = np.asarray(target, dtype=float)
        proj = make_perspective(fov_y_deg, aspect, near, far)
        fwd = target - eye_center
        fwd = fwd / np.linalg.norm(fwd)
        right_dir = np.cross(fwd, np.asarray(up, dtype=float))
        right_dir = right_dir / np.linalg.norm(right_dir)
        offset = right_dir * (baseline / 2.0)
        left = View(make_look_at(eye_center - offset, target - offset, up), proj)
        right = View(make_look_at(eye_center + offset, target + offset, up), proj)
        pv = View(make_look_at(eye_center, target, up), proj) if with_pv else None
        return ViewRig(left, right, pv)


@dataclass(frozen=True)
class Framebuffer:
    width: int
    height: int
    pixels: np.ndarray  # (h, w, 4) float32, rgb composited over background, a = coverage

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float32)
        if px.shape != (self.height, self.width, 4):
            raise ValueError(f"pixels shape {px.shape} != ({self.height}, {self.width}, 4)")
        if not np.all(np.isfinite(px)):
            raise ValueError("framebuffer contains non-finite values")
        object.__setattr__(self, "pixels", px)

    def rgb8(self) -> np.ndarray:
        return np.clip(self.pixels[..., :3] * 255.0 + 0.5, 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class Scene:
    volume: VolumeDataset
    tf: TransferFunction
    model: ModelTransform = field(default_factory=ModelTransform)
    cut: CutPlane = field(default_factory=CutPlane)
    rig: ViewRig = None  # type: ignore[assignment]
    settings: RenderSettings = field(default_factory=RenderSettings)

    def __post_init__(self):
        if self.rig is None:
            object.__setattr__(self, "rig", ViewRig.stereo((0.0, 0.0, 0.0), (0.0, 0.0, -1.0)))

    def with_model(self, model: ModelTransform) -> "Scene":
        return replace(self, model=model)

    def anchored_model(self, marker2world: Optional[Pose]) -> ModelTransform:
        """Model transform re-rooted at the marker frame when one is present."""
        if marker2world is None:
            return self.model
        r = marker2world.rotation @ self.model.rotation
        t = marker2world.rotation @ self.model.translation + marker2world.translation
        return ModelTransform(self.model.scale, r, t)


def make_perspective(fov_y_deg: float, aspect: float, near: float, far: float) -> np.ndarray:
    if not (0 < near < far):
        raise ValueError("need 0 < near < far")
    f = 1.0 / np.tan(np.radians(fov_y_deg) / 2.0)
    m = np.zeros((4, 4))
    m[0, 0] = f / aspect
    m[1, 1] = f
    m[2, 2] = -(far + near) / (far - near)
    m[2, 3] = -2.0 * far * near / (far - near)
    m[3, 2] = -1.0
    return m


def make_orthographic(height: float, aspect: float, near: float, far: float) -> np.ndarray:
    if not (near < far):
        raise ValueError("need near < far")
    m = np.eye(4)
    m[0, 0] = 2.0 / (height * aspect)
    m[1, 1] = 2.0 / height
    m[2, 2] = -2.0 / (far - near)
    m[2, 3] = -(far + near) / (far - near)
    return m


def make_look_at(eye, target, up=(0.0, 1.0, 0.0)) -> np.ndarray:
    eye = np.asarray(eye, dtype=float)
    fwd = np.asarray(target, dtype=float) - eye
    n = np.linalg.norm(fwd)
    if n < 1e-12:
        raise ValueError("eye and target coincide")
    fwd = fwd / n
    right = np.cross(fwd, np.asarray(up, dtype=float))
    rn = np.linalg.norm(right)
    if rn < 1e-12:
        raise ValueError("up is parallel to the view direction")
    right = right / rn
    true_up = np.cross(right, fwd)
    m = np.eye(4)
    m[0, :3] = right
    m[1, :3] = true_up
    m[2, :3] = -fwd
    m[:3, 3] = -(m[:3, :3] @ eye)
    return m
