"""Free-hand gesture interpretation driving the model transform and cut plane.

One grabbing hand translates the volume (scaled by sensitivity).  Two
grabbing hands rotate and scale it: the rotation is the minimal rotation
carrying the anchored inter-hand direction to the current one, the scale
factor is the ratio of hand distances, both applied about the volume's
center as it stood when the gesture started.  With the cut-plane tool
selected, a grabbing hand's palm orients the cutting plane instead.

Anchors are captured when a gesture starts and cleared on release; hands
that drop out of tracking release implicitly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..render.scene import CutPlane
from ..spaces.model import ModelTransform
from ..spaces.pose import nearest_rotation
from .hands import HandFrame

MIN_ANCHOR_DISTANCE = 0.01  # meters; below this, scale/rotation updates freeze


class GestureMode(enum.Enum):
    IDLE = "idle"
    ONE_HAND_TRANSLATE = "one_hand_translate"
    TWO_HAND_MANIPULATE = "two_hand_manipulate"
    CUT_PLANE_CONTROL = "cut_plane_control"


class Tool(enum.Enum):
    MANIPULATE = "manipulate"
    CUT_PLANE = "cut_plane"


@dataclass(frozen=True)
class _Anchors:
    hand: Optional[str] = None  # "left"/"right" for one-hand mode
    left_pos: Optional[np.ndarray] = None
    right_pos: Optional[np.ndarray] = None
    model: Optional[ModelTransform] = None


@dataclass(frozen=True)
class GestureState:
    mode: GestureMode = GestureMode.IDLE
    anchors: Optional[_Anchors] = None

    def __post_init__(self):
        if (self.mode == GestureMode.IDLE) != (self.anchors is None):
            raise ValueError("anchors must be present exactly when a gesture is active")


def _minimal_rotation(v_from: np.ndarray, v_to: np.ndarray) -> np.ndarray:
    """Smallest rotation aligning unit v_from to unit v_to (roll ignored)."""
    axis = np.cross(v_from, v_to)
    s = np.linalg.norm(axis)
    c = float(np.dot(v_from, v_to))
    if s < 1e-12:
        if c > 0:
            return np.eye(3)
        # opposite directions: rotate pi about any perpendicular axis
        helper = np.array([1.0, 0.0, 0.0]) if abs(v_from[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        axis = np.cross(v_from, helper)
        axis /= np.linalg.norm(axis)
        s, c = 0.0, -1.0
    else:
        axis = axis / s
    angle = np.arctan2(s, c)
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


def _two_hand_update(anchors: _Anchors, left: np.ndarray, right: np.ndarray) -> ModelTransform:
    base = anchors.model
    v0 = anchors.right_pos - anchors.left_pos
    v1 = right - left
    n0 = np.linalg.norm(v0)
    n1 = np.linalg.norm(v1)
    if n0 < MIN_ANCHOR_DISTANCE or n1 < MIN_ANCHOR_DISTANCE:
        return base
    factor = n1 / n0
    rot_delta = _minimal_rotation(v0 / n0, v1 / n1)

    # Rotate/scale about the volume center as of the gesture start.
    center = base.as_matrix()[:3, :3] @ np.array([0.5, 0.5, 0.5]) + base.translation
    new_rot = nearest_rotation(rot_delta @ base.rotation)
    new_scale = base.scale * factor
    new_t = center + factor * (rot_delta @ (base.translation - center))
    return ModelTransform(new_scale, new_rot, new_t)


def update_gesture(state: GestureState, model: ModelTransform, cut: CutPlane,
                   frame: HandFrame, sensitivity: float = 1.0,
                   tool: Tool = Tool.MANIPULATE):
    """One step of the gesture state machine.

    Returns (state', model', cut').  Inputs are never mutated.
    """
    left_grab = frame.left.present and frame.left.grabbing
    right_grab = frame.right.present and frame.right.grabbing

    if tool == Tool.CUT_PLANE:
        hand = frame.right if right_grab else (frame.left if left_grab else None)
        if hand is None:
            return GestureState(), model, cut
        normal = hand.palm.rotation @ np.array([0.0, 0.0, 1.0])
        new_cut = CutPlane(enabled=True, point=hand.palm.translation.copy(), normal=normal)
        anchors = _Anchors(hand="right" if right_grab else "left",
                           left_pos=frame.left.palm.translation.copy(),
                           right_pos=frame.right.palm.translation.copy(),
                           model=model)
        return GestureState(GestureMode.CUT_PLANE_CONTROL, anchors), model, new_cut

    if left_grab and right_grab:
        lp = frame.left.palm.translation
        rp = frame.right.palm.translation
        if state.mode != GestureMode.TWO_HAND_MANIPULATE:
            anchors = _Anchors(left_pos=lp.copy(), right_pos=rp.copy(), model=model)
            return GestureState(GestureMode.TWO_HAND_MANIPULATE, anchors), model, cut
        new_model = _two_hand_update(state.anchors, lp, rp)
        return state, new_model, cut

    if left_grab or right_grab:
        name = "left" if left_grab else "right"
        hand = frame.left if left_grab else frame.right
        pos = hand.palm.translation
        if state.mode != GestureMode.ONE_HAND_TRANSLATE or state.anchors.hand != name:
            anchors = _Anchors(hand=name,
                               left_pos=pos.copy() if name == "left" else None,
                               right_pos=pos.copy() if name == "right" else None,
                               model=model)
            return GestureState(GestureMode.ONE_HAND_TRANSLATE, anchors), model, cut
        anchor_pos = state.anchors.left_pos if name == "left" else state.anchors.right_pos
        base = state.anchors.model
        new_model = base.with_translation(
            base.translation + sensitivity * (pos - anchor_pos)
        )
        return state, new_model, cut

    return GestureState(), model, cut
