"""Proxy-geometry slicing renderers: object-aligned and view-aligned.

Both methods composite a back-to-front stack of slice planes through the
volume with the OVER operator:

* texture-based: slices fixed along the volume axis most parallel to the
  view direction (ties prefer z, then y, then x), one full cube cross-quad
  per slice;
* view-aligned: slices perpendicular to the viewing direction, each bounded
  by the plane/cube intersection polygon.

Every covered pixel gets its sample by intersecting its own ray with the
slice plane (exact perspective-correct interpolation); pixels whose
intersection falls outside the cube, behind the near plane, or on the culled
side of the cut plane contribute nothing, which is exactly the footprint the
proxy polygon would rasterize.  Per-sample alpha is corrected by the actual
along-ray spacing between consecutive planes, so the two methods and the
raycaster converge to the same image on smooth data.

For speed, slices are processed in chunks: one batched sampling pass per
chunk, then an exact closed-form OVER fold (transmittance cumprod along the
slice axis), which is algebraically identical to slice-at-a-time
compositing.
"""

from __future__ import annotations

import numpy as np

from .compositing import REFERENCE_STEP
from .geometry import CUBE_CORNERS, slice_cube_batch
from .sampling import _Prepared
from .scene import Scene, View
from ._pool import run_banded

SLICE_CHUNK = 24


def render_view_aligned_internal(scene: Scene, view: View):
    prep = _Prepared(scene)
    settings = scene.settings
    a = prep.model_mat[:3, :3]
    b = prep.model_mat[:3, 3]
    fwd = view.forward
    eye = view.eye

    corners_w = CUBE_CORNERS @ a.T + b
    depths = (corners_w - eye) @ fwd
    d0 = max(float(depths.min()), view.near + 1e-9)
    d1 = float(depths.max())
    h = settings.resolution[1]
    if d1 <= d0:
        return _empty_band(settings, 0, h)

    count = settings.slice_count
    spacing = (d1 - d0) / count
    plane_depths = d0 + (np.arange(count) + 0.5) * spacing
    normal_m = a.T @ fwd
    offsets = plane_depths + fwd @ eye - fwd @ b
    verts, vcounts = slice_cube_batch(normal_m, offsets)
    order = np.arange(count)[::-1]  # descending depth: back to front

    def band(row0, row1):
        return _composite_slices(
            prep, view, settings, normal_m, offsets, verts, vcounts, order,
            abs(spacing), row0, row1,
        )

    return run_banded(band, h, settings.workers)


def render_texture_based_internal(scene: Scene, view: View):
    prep = _Prepared(scene)
    settings = scene.settings
    a = prep.model_mat[:3, :3]
    fwd = view.forward

    axes_w = a / np.linalg.norm(a, axis=0, keepdims=True)
    scores = np.abs(fwd @ axes_w)
    best = scores.max()
    axis = next(i for i in (2, 1, 0) if scores[i] >= best - 1e-9)

    count = settings.slice_count
    positions = (np.arange(count) + 0.5) / count
    normal_m = np.zeros(3)
    normal_m[axis] = 1.0

    # Full cube cross-section quad at each axis position.
    uv = [i for i in range(3) if i != axis]
    quad = np.zeros((4, 3))
    quad[:, uv[0]] = [0.0, 1.0, 1.0, 0.0]
    quad[:, uv[1]] = [0.0, 0.0, 1.0, 1.0]
    verts = np.zeros((count, 6, 3))
    verts[:, :4] = quad[np.newaxis]
    verts[:, :4, axis] = positions[:, np.newaxis]
    vcounts = np.full(count, 4, dtype=np.int32)

    # Back-to-front: order by world depth of the slice planes.
    depth_coef = fwd @ a[:, axis]
    order = np.arange(count)[::-1] if depth_coef > 0 else np.arange(count)

    def band(row0, row1):
        return _composite_slices(
            prep, view, settings, normal_m, positions, verts, vcounts, order,
            1.0 / count, row0, row1,
        )

    return run_banded(band, settings.resolution[1], settings.workers)


def _empty_band(settings, row0, row1):
    w = settings.resolution[0]
    rows = row1 - row0
    return np.zeros((rows, w, 3), dtype=np.float32), np.zeros((rows, w), dtype=np.float32)


def _slice_bboxes(verts, vcounts, full, width, height):
    """Projected integer pixel bbox per slice polygon.

    Returns (x0, x1, y0, y1) int arrays; slices whose projection is unsafe
    (a vertex at or behind the eye plane) get the full image as a safe
    superset, and empty polygons get an inverted bbox.
    """
    k = len(vcounts)
    ones = np.ones((k, verts.shape[1], 1))
    clip = np.concatenate([verts, ones], axis=2) @ full.T  # (k, 6, 4)
    w_clip = clip[..., 3]
    pad = np.arange(verts.shape[1])[np.newaxis, :] >= vcounts[:, np.newaxis]

    unsafe = ((w_clip <= 1e-12) & ~pad).any(axis=1)
    w_safe = np.where(np.abs(w_clip) < 1e-30, 1e-30, w_clip)
    sx = (clip[..., 0] / w_safe * 0.5 + 0.5) * width - 0.5
    sy = (0.5 - clip[..., 1] / w_safe * 0.5) * height - 0.5
    sx_min = np.where(pad, np.inf, sx).min(axis=1)
    sx_max = np.where(pad, -np.inf, sx).max(axis=1)
    sy_min = np.where(pad, np.inf, sy).min(axis=1)
    sy_max = np.where(pad, -np.inf, sy).max(axis=1)

    x0 = np.maximum(np.ceil(sx_min), 0).astype(np.int64)
    x1 = np.minimum(np.floor(sx_max), width - 1).astype(np.int64)
    y0 = np.maximum(np.ceil(sy_min), 0).astype(np.int64)
    y1 = np.minimum(np.floor(sy_max), height - 1).astype(np.int64)

    x0 = np.where(unsafe, 0, x0)
    x1 = np.where(unsafe, width - 1, x1)
    y0 = np.where(unsafe, 0, y0)
    y1 = np.where(unsafe, height - 1, y1)

    empty = vcounts < 3
    x1 = np.where(empty, -1, x1)
    return x0, x1, y0, y1


def _composite_slices(prep, view: View, settings, normal_m, offsets, verts, vcounts,
                      order, delta_c, row0, row1):
    """Chunked back-to-front OVER compositing of plane slices into one band.

    Planes are ``normal_m . p = offsets[k]`` in model space; ``delta_c`` is
    the offset spacing between consecutive planes (per-ray opacity
    correction).  ``order`` walks the planes back to front.
    """
    w, h = settings.resolution
    rows = row1 - row0
    acc_rgb = np.zeros((rows * w, 3), dtype=np.float32)
    acc_a = np.zeros(rows * w, dtype=np.float32)

    origins, dirs = prep.rays(view, w, h, row0, row1)
    o_f = origins.reshape(-1, 3).astype(np.float32)
    d_f = dirs.reshape(-1, 3).astype(np.float32)
    ndoto = (o_f @ normal_m).astype(np.float64)
    ndotd = (d_f @ normal_m).astype(np.float64)
    bad_dir = np.abs(ndotd) < 1e-12
    safe_ndotd = np.where(bad_dir, 1.0, ndotd)
    inv_ndotd = 1.0 / safe_ndotd
    # Along-ray spacing between consecutive planes, as a multiple of the
    # reference step; capped to keep grazing rays numerically tame.
    ratio = np.clip(np.abs(delta_c * inv_ndotd) / REFERENCE_STEP, 0.0, 1e6)
    ratio = np.where(bad_dir, 0.0, ratio).astype(np.float32)

    full = view.proj @ view.view @ prep.model_mat
    x0s, x1s, y0s, y1s = _slice_bboxes(verts, vcounts, full, w, h)

    ordered = [k for k in order if x1s[k] >= x0s[k] and y1s[k] >= row0 and y0s[k] <= row1 - 1]
    for c0 in range(0, len(ordered), SLICE_CHUNK):
        chunk = ordered[c0:c0 + SLICE_CHUNK]
        cx0 = min(int(x0s[k]) for k in chunk)
        cx1 = max(int(x1s[k]) for k in chunk)
        cy0 = max(min(int(y0s[k]) for k in chunk), row0)
        cy1 = min(max(int(y1s[k]) for k in chunk), row1 - 1)
        if cx1 < cx0 or cy1 < cy0:
            continue
        # Flat band indices of the chunk's bbox rectangle.
        ys = np.arange(cy0 - row0, cy1 - row0 + 1)
        xs = np.arange(cx0, cx1 + 1)
        pix = (ys[:, np.newaxis] * w + xs[np.newaxis, :]).ravel()

        n_pix = pix.size
        ck = len(chunk)
        offs = offsets[np.asarray(chunk)]  # back-to-front plane offsets
        ts = (offs[:, np.newaxis] - ndoto[pix][np.newaxis, :]) * inv_ndotd[pix][np.newaxis, :]
        # Near-plane clip and direction guard: invalid intersections vanish.
        invalid = (ts < 0.0) | bad_dir[pix][np.newaxis, :]

        pts = (o_f[pix][np.newaxis, :, :]
               + ts[..., np.newaxis].astype(np.float32) * d_f[pix][np.newaxis, :, :])
        rgba = prep.sample_rgba(pts.reshape(-1, 3)).reshape(ck, n_pix, 4)
        alpha = 1.0 - np.exp(ratio[pix][np.newaxis, :]
                             * np.log1p(-np.minimum(rgba[..., 3], 1.0 - 1e-7)))
        alpha[invalid] = 0.0

        # Closed-form OVER of the chunk (front-to-back = reversed chunk order),
        # then folded behind nothing / in front of the accumulated image.
        a_fb = alpha[::-1]
        c_fb = rgba[::-1, :, :3]
        transm = np.cumprod(1.0 - a_fb, axis=0)
        t_before = np.empty_like(transm)
        t_before[0] = 1.0
        t_before[1:] = transm[:-1]
        chunk_rgb = np.einsum("kn,knc->nc", t_before * a_fb, c_fb)
        chunk_a = 1.0 - transm[-1]

        acc_rgb[pix] = chunk_rgb + (1.0 - chunk_a)[:, np.newaxis] * acc_rgb[pix]
        acc_a[pix] = chunk_a + (1.0 - chunk_a) * acc_a[pix]

    return acc_rgb.reshape(rows, w, 3), acc_a.reshape(rows, w)
