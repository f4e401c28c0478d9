from .scene import (
    RenderMethod,
    RenderSettings,
    CutPlane,
    View,
    ViewRig,
    Framebuffer,
    Scene,
    ResolutionMismatch,
    make_perspective,
    make_orthographic,
    make_look_at,
)
from .sampling import sample_volume
from .geometry import slice_cube
from .compositing import (
    composite_front_to_back,
    composite_back_to_front,
    correct_alpha,
    REFERENCE_STEP,
)
from .views import (
    render_raycast,
    render_texture_based,
    render_view_aligned,
    render_view,
    render_stereo,
    composite_spectator,
    render_spectator_only,
)
from .image_io import write_ppm, write_png, encode_png, decode_png, psnr

__all__ = [
    "RenderMethod",
    "RenderSettings",
    "CutPlane",
    "View",
    "ViewRig",
    "Framebuffer",
    "Scene",
    "ResolutionMismatch",
    "make_perspective",
    "make_orthographic",
    "make_look_at",
    "sample_volume",
    "slice_cube",
    "composite_front_to_back",
    "composite_back_to_front",
    "correct_alpha",
    "REFERENCE_STEP",
    "render_raycast",
    "render_texture_based",
    "render_view_aligned",
    "render_view",
    "render_stereo",
    "composite_spectator",
    "render_spectator_only",
    "write_ppm",
    "write_png",
    "encode_png",
    "decode_png",
    "psnr",
]
