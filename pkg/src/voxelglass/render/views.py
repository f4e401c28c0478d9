"""Public render entry points: per-method, stereo, and spectator compositing."""

from __future__ import annotations

import numpy as np

from .raycast import render_raycast_internal
from .slicing import render_texture_based_internal, render_view_aligned_internal
from .scene import Framebuffer, RenderMethod, ResolutionMismatch, Scene, View

_INTERNAL = {
    RenderMethod.TEXTURE_BASED: render_texture_based_internal,
    RenderMethod.VIEW_ALIGNED: render_view_aligned_internal,
    RenderMethod.RAYCAST: render_raycast_internal,
}


def _resolve_view(scene: Scene, view) -> View:
    if isinstance(view, View):
        return view
    views = scene.rig.views()
    if view not in views:
        raise ValueError(f"rig has no view {view!r}")
    return views[view]


def _over_background(scene: Scene, rgb: np.ndarray, alpha: np.ndarray) -> Framebuffer:
    bg = np.asarray(scene.settings.background, dtype=np.float32)
    out = np.empty(rgb.shape[:2] + (4,), dtype=np.float32)
    out[..., :3] = rgb + (1.0 - alpha)[..., np.newaxis] * bg
    out[..., 3] = alpha
    w, h = scene.settings.resolution
    return Framebuffer(w, h, out)


def render_view(scene: Scene, view="left") -> Framebuffer:
    """Render one view with the method selected in the scene settings."""
    v = _resolve_view(scene, view)
    rgb, alpha = _INTERNAL[scene.settings.method](scene, v)
    return _over_background(scene, rgb, alpha)


def render_raycast(scene: Scene, view="left") -> Framebuffer:
    rgb, alpha = render_raycast_internal(scene, _resolve_view(scene, view))
    return _over_background(scene, rgb, alpha)


def render_view_aligned(scene: Scene, view="left") -> Framebuffer:
    rgb, alpha = render_view_aligned_internal(scene, _resolve_view(scene, view))
    return _over_background(scene, rgb, alpha)


def render_texture_based(scene: Scene, view="left") -> Framebuffer:
    rgb, alpha = render_texture_based_internal(scene, _resolve_view(scene, view))
    return _over_background(scene, rgb, alpha)


def render_stereo(scene: Scene) -> dict[str, Framebuffer]:
    """Left and right views rendered independently from identical scene state."""
    return {name: render_view(scene, name) for name in ("left", "right")}


def composite_spectator(scene: Scene, background: np.ndarray) -> Framebuffer:
    """Hologram rendered from the PV view, blended over a camera image.

    ``background`` is (h, w, 3), uint8 or float in [0,1]; a fully transparent
    volume returns it bit-exactly.
    """
    if scene.rig.pv is None:
        raise ValueError("rig has no pv view")
    w, h = scene.settings.resolution
    bg = np.asarray(background)
    if bg.shape[:2] != (h, w) or bg.shape[2:] != (3,):
        raise ResolutionMismatch(f"background {bg.shape} != pv resolution ({h}, {w}, 3)")
    bg_f = (bg.astype(np.float32) / 255.0) if bg.dtype == np.uint8 else bg.astype(np.float32)

    rgb, alpha = _INTERNAL[scene.settings.method](scene, scene.rig.pv)
    out = np.empty((h, w, 4), dtype=np.float32)
    out[..., :3] = rgb + (1.0 - alpha)[..., np.newaxis] * bg_f
    out[..., 3] = alpha
    return Framebuffer(w, h, out)


def render_spectator_only(scene: Scene, background: np.ndarray) -> Framebuffer:
    """Spectator mode: skip the eye views entirely, produce only the PV composite."""
    return composite_spectator(scene, background)
