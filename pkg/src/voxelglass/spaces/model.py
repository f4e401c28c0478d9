"""Model transform (scale, rotation, translation) and the render matrix chain."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .pose import Pose, _check_rotation


@dataclass(frozen=True)
class ModelTransform:
    """Object placement composed as translation @ rotation @ scale."""

    scale: np.ndarray = field(default_factory=lambda: np.ones(3))
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        s = np.asarray(self.scale, dtype=float)
        if s.ndim == 0:
            s = np.full(3, float(s))
        s = s.reshape(3)
        if np.any(s <= 0):
            raise ValueError("scale components must be positive")
        object.__setattr__(self, "scale", s)
        object.__setattr__(self, "rotation", _check_rotation(self.rotation))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float).reshape(3))

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation * self.scale[np.newaxis, :]
        m[:3, 3] = self.translation
        return m

    def with_translation(self, t) -> "ModelTransform":
        return ModelTransform(self.scale, self.rotation, np.asarray(t, dtype=float))

    @staticmethod
    def centered(scale=1.0, rotation=None, center=(0.0, 0.0, 0.0)) -> "ModelTransform":
        """Place the unit-cube volume with its center at ``center``.

        The cube spans [0,1]^3 in model space, so the translation compensates
        for the rotated, scaled half-extent offset.
        """
        rotation = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
        s = np.asarray(scale, dtype=float)
        if s.ndim == 0:
            s = np.full(3, float(s))
        offset = rotation @ (s * 0.5)
        return ModelTransform(s, rotation, np.asarray(center, dtype=float) - offset)


def build_render_matrix(proj: np.ndarray, view: np.ndarray,
                        marker2world: Optional[Pose],
                        model: ModelTransform) -> np.ndarray:
    """Full clip-from-model matrix, with the marker frame spliced in when present."""
    proj = np.asarray(proj, dtype=float)
    view = np.asarray(view, dtype=float)
    if abs(np.linalg.det(proj)) < 1e-15:
        raise ValueError("projection matrix is singular")
    chain = proj @ view
    if marker2world is not None:
        chain = chain @ marker2world.as_matrix()
    return chain @ model.as_matrix()


def apply_hand_delta(model: ModelTransform, delta_world, sensitivity: float) -> ModelTransform:
    """Shift the model by a hand movement scaled for finer control."""
    delta = np.asarray(delta_world, dtype=float).reshape(3)
    return model.with_translation(model.translation + sensitivity * delta)
