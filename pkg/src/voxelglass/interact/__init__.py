from .hands import HandPose, HandFrame, parse_hand_stream, format_hand_stream
from .sketch import (
    PressureMap,
    SketchStroke,
    PlaneCanvas,
    virtual_pressure,
    pressure_to_width,
    sketch_step,
    render_annotation_mask,
)
from .gestures import GestureMode, Tool, GestureState, update_gesture

__all__ = [
    "HandPose",
    "HandFrame",
    "parse_hand_stream",
    "format_hand_stream",
    "PressureMap",
    "SketchStroke",
    "PlaneCanvas",
    "virtual_pressure",
    "pressure_to_width",
    "sketch_step",
    "render_annotation_mask",
    "GestureMode",
    "Tool",
    "GestureState",
    "update_gesture",
]
