from .pose import Pose, compose, invert
from .graph import SpaceId, SpaceGraph, UnknownSpace, DisconnectedSpace, CyclicSpaceEdge
from .marker import (
    PinholeCamera,
    MarkerObservation,
    DegenerateCorners,
    BehindCamera,
    estimate_marker_pose,
    project_marker,
)
from .model import ModelTransform, build_render_matrix, apply_hand_delta

__all__ = [
    "Pose",
    "compose",
    "invert",
    "SpaceId",
    "SpaceGraph",
    "UnknownSpace",
    "DisconnectedSpace",
    "CyclicSpaceEdge",
    "PinholeCamera",
    "MarkerObservation",
    "DegenerateCorners",
    "BehindCamera",
    "estimate_marker_pose",
    "project_marker",
    "ModelTransform",
    "build_render_matrix",
    "apply_hand_delta",
]
