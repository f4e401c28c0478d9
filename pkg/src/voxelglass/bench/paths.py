"""Scripted benchmark paths: fixed-distance rotations and a straight approach.

Rotation paths spin the volume a full turn about its own axis over the path
duration at a fixed distance from the viewer; the approach path translates
it linearly from ``distance_start`` to ``distance_end`` along the viewing
axis.  The camera stays at the origin looking down -z throughout.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from ..spaces.model import ModelTransform
from ..spaces.pose import Pose


class PathKind(enum.Enum):
    ROTATE_Y = "rotate_y"
    ROTATE_X = "rotate_x"
    APPROACH_Z = "approach_z"


@dataclass(frozen=True)
class ScriptedPath:
    kind: PathKind
    distance_start: float = 2.0
    distance_end: float = 2.0
    duration: float = 10.0

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        if self.distance_start < 0 or self.distance_end < 0:
            raise ValueError("distances must be nonnegative")

    @property
    def name(self) -> str:
        if self.kind is PathKind.APPROACH_Z:
            return f"approach_z_{self.distance_start:g}m_to_{self.distance_end:g}m"
        return f"{self.kind.value}_{self.distance_start:g}m"

    def model_at(self, t: float, scale) -> ModelTransform:
        """Model transform at path time t (seconds), volume scaled by ``scale``."""
        frac = np.clip(t / self.duration, 0.0, 1.0)
        if self.kind is PathKind.APPROACH_Z:
            d = self.distance_start + (self.distance_end - self.distance_start) * frac
            rot = np.eye(3)
        else:
            d = self.distance_start
            axis = [0.0, 1.0, 0.0] if self.kind is PathKind.ROTATE_Y else [1.0, 0.0, 0.0]
            rot = Pose.from_axis_angle(axis, 2.0 * np.pi * frac).rotation
        return ModelTransform.centered(scale=scale, rotation=rot, center=(0.0, 0.0, -d))


def default_paths(duration: float = 10.0) -> list[ScriptedPath]:
    """The five-path matrix: x/y rotations at 1 m and 2 m, approach 2 m to 0."""
    return [
        ScriptedPath(PathKind.ROTATE_Y, 1.0, 1.0, duration),
        ScriptedPath(PathKind.ROTATE_Y, 2.0, 2.0, duration),
        ScriptedPath(PathKind.ROTATE_X, 1.0, 1.0, duration),
        ScriptedPath(PathKind.ROTATE_X, 2.0, 2.0, duration),
        ScriptedPath(PathKind.APPROACH_Z, 2.0, 0.0, duration),
    ]
