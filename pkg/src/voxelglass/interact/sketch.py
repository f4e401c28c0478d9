"""Virtual-plane sketching with pressure-sensitive stroke width.

A canvas is a bounded rectangle on a plane in world space; its normal points
toward the user.  The fingertip's signed offset from the plane,

    d = n . (tip - plane_point),    projected tip P_v = tip - d n,

acts as virtual pressure: pushing *through* the plane (d < 0) maps linearly
to stroke width between ``width_min`` and ``width_max``, saturating at
``depth_max`` penetration.  Hovering within ``touch_radius`` in front counts
as light contact at minimum width; beyond it there is no contact at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class PressureMap:
    width_min: float = 0.001
    width_max: float = 0.008
    depth_max: float = 0.030
    touch_radius: float = 0.010

    def __post_init__(self):
        if not (0.0 <= self.width_min <= self.width_max):
            raise ValueError("need 0 <= width_min <= width_max")
        if self.depth_max <= 0:
            raise ValueError("depth_max must be positive")


@dataclass
class SketchStroke:
    points: list = field(default_factory=list)  # (u, v, width) tuples
    color: tuple = (1.0, 0.1, 0.1, 1.0)


@dataclass
class PlaneCanvas:
    plane_point: np.ndarray = field(default_factory=lambda: np.zeros(3))
    plane_normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    extent: tuple[float, float] = (0.4, 0.3)  # meters (width, height)
    strokes: list = field(default_factory=list)

    def __post_init__(self):
        self.plane_point = np.asarray(self.plane_point, dtype=float).reshape(3)
        n = np.asarray(self.plane_normal, dtype=float).reshape(3)
        norm = np.linalg.norm(n)
        if abs(norm - 1.0) > 1e-6:
            raise ValueError("plane normal must be unit length")
        self.plane_normal = n / norm
        if min(self.extent) <= 0:
            raise ValueError("extent must be positive")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        """In-plane (u, v) basis derived deterministically from the normal."""
        n = self.plane_normal
        helper = np.array([0.0, 1.0, 0.0]) if abs(n[1]) < 0.9 else np.array([1.0, 0.0, 0.0])
        u = np.cross(helper, n)
        u /= np.linalg.norm(u)
        return u, np.cross(n, u)

    def to_canvas(self, point_world: np.ndarray) -> tuple[float, float]:
        u, v = self.axes()
        rel = np.asarray(point_world, dtype=float) - self.plane_point
        return float(rel @ u), float(rel @ v)


def virtual_pressure(tip, canvas: PlaneCanvas) -> tuple[float, np.ndarray]:
    """Signed plane offset d and the orthogonal projection of the tip."""
    tip = np.asarray(tip, dtype=float).reshape(3)
    n = canvas.plane_normal
    d = float(n @ (tip - canvas.plane_point))
    return d, tip - d * n


def pressure_to_width(d: float, pm: PressureMap) -> float:
    """Stroke width for a plane offset; 0 means no contact."""
    if d > pm.touch_radius:
        return 0.0
    penetration = max(0.0, -d)
    if penetration >= pm.depth_max:
        return pm.width_max
    return pm.width_min + (pm.width_max - pm.width_min) * (penetration / pm.depth_max)


def sketch_step(canvas: PlaneCanvas, tip, pm: PressureMap,
                active_stroke: Optional[SketchStroke],
                color=(1.0, 0.1, 0.1, 1.0)) -> Optional[SketchStroke]:
    """Advance one sketch frame; returns the stroke still being drawn, if any.

    On first contact a fresh stroke is created and registered with the
    canvas.  Contact outside the canvas extent appends the clamped point and
    ends the stroke; retreating past ``touch_radius`` just ends it.
    """
    d, p_v = virtual_pressure(tip, canvas)
    width = pressure_to_width(d, pm)
    in_contact = width > 0.0 or abs(d) <= pm.touch_radius
    if not in_contact:
        return None

    u, v = canvas.to_canvas(p_v)
    half_w, half_h = canvas.extent[0] / 2.0, canvas.extent[1] / 2.0
    inside = -half_w <= u <= half_w and -half_h <= v <= half_h
    cu = min(max(u, -half_w), half_w)
    cv = min(max(v, -half_h), half_h)

    if active_stroke is None:
        active_stroke = SketchStroke(color=tuple(color))
        canvas.strokes.append(active_stroke)
    active_stroke.points.append((cu, cv, width))
    return active_stroke if inside else None


def render_annotation_mask(canvas: PlaneCanvas, pixels_per_meter: float = 1000.0,
                           strokes=None) -> np.ndarray:
    """Raster RGBA mask of strokes, aligned to the canvas rectangle.

    Pixel (0,0) is the canvas's top-left corner (u=-w/2, v=+h/2).
    """
    w_px = max(int(round(canvas.extent[0] * pixels_per_meter)), 1)
    h_px = max(int(round(canvas.extent[1] * pixels_per_meter)), 1)
    img = np.zeros((h_px, w_px, 4), dtype=np.float32)
    half_w, half_h = canvas.extent[0] / 2.0, canvas.extent[1] / 2.0
    ys, xs = np.mgrid[0:h_px, 0:w_px]
    px_u = (xs + 0.5) / pixels_per_meter - half_w
    px_v = half_h - (ys + 0.5) / pixels_per_meter

    for stroke in (canvas.strokes if strokes is None else strokes):
        pts = stroke.points
        if not pts:
            continue
        color = np.asarray(stroke.color, dtype=np.float32)
        stamps = []
        for (u0, v0, w0), (u1, v1, w1) in zip(pts, pts[1:] or pts):
            seg_len = float(np.hypot(u1 - u0, v1 - v0))
            n = max(int(seg_len * pixels_per_meter * 2), 1)
            for i in range(n + 1):
                t = i / n
                stamps.append((u0 + t * (u1 - u0), v0 + t * (v1 - v0), w0 + t * (w1 - w0)))
        if len(pts) == 1:
            stamps = [pts[0]]
        for u, v, width in stamps:
            r = max(width / 2.0, 0.5 / pixels_per_meter)
            mask = (px_u - u) ** 2 + (px_v - v) ** 2 <= r * r
            img[mask] = color
    return img
