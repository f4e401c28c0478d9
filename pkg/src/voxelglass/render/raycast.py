"""Per-pixel raycasting with front-to-back accumulation and early termination.

Rays start on the near plane, enter the volume where the slab test says so,
and march at a fixed world-space step.  Accumulation is front-to-back
(C += (1-A) a c, A += (1-A) a) with per-sample opacity corrected for the step
size; rays retire once their alpha crosses the termination threshold, which
is what keeps this method's cost nearly flat as the volume fills the view.

Steps are processed in batches of STEP_CHUNK with a closed-form
transmittance fold (identical algebra to stepping one sample at a time);
termination is checked at chunk granularity.
"""

from __future__ import annotations

import numpy as np

from .compositing import REFERENCE_STEP
from .geometry import ray_cube_range
from .sampling import _Prepared
from .scene import Scene, View
from ._pool import run_banded

STEP_CHUNK = 8


def render_raycast_internal(scene: Scene, view: View):
    """Premultiplied (rgb, alpha) float32 buffers for one view."""
    prep = _Prepared(scene)

    def band(row0: int, row1: int):
        return _raycast_band(prep, view, scene, row0, row1)

    return run_banded(band, scene.settings.resolution[1], scene.settings.workers)


def _raycast_band(prep: _Prepared, view: View, scene: Scene, row0: int, row1: int):
    settings = scene.settings
    w = settings.resolution[0]
    rows = row1 - row0
    origins, dirs = prep.rays(view, w, settings.resolution[1], row0, row1)
    o = origins.reshape(-1, 3)
    d = dirs.reshape(-1, 3)

    t_near, t_far = ray_cube_range(o, d)
    t_start = np.maximum(t_near, 0.0)
    hit = t_far > t_start

    acc_rgb = np.zeros((rows * w, 3), dtype=np.float32)
    acc_a = np.zeros(rows * w, dtype=np.float32)

    idx = np.flatnonzero(hit)
    if idx.size == 0:
        return acc_rgb.reshape(rows, w, 3), acc_a.reshape(rows, w)

    step = settings.step_size
    ratio = np.float32(step / REFERENCE_STEP)
    term = np.float32(settings.early_termination_alpha)
    step_offsets = (np.arange(STEP_CHUNK) + 0.5) * step

    o_c = o[idx].astype(np.float32)
    d_c = d[idx].astype(np.float32)
    t = t_start[idx]
    t_end = t_far[idx]
    rgb_c = np.zeros((idx.size, 3), dtype=np.float32)
    a_c = np.zeros(idx.size, dtype=np.float32)

    while idx.size:
        ts = (t[np.newaxis, :] + step_offsets[:, np.newaxis]).astype(np.float32)
        beyond = ts > t_end[np.newaxis, :].astype(np.float32)
        pts = o_c[np.newaxis, :, :] + ts[..., np.newaxis] * d_c[np.newaxis, :, :]
        rgba = prep.sample_rgba(pts.reshape(-1, 3)).reshape(STEP_CHUNK, idx.size, 4)
        alpha = rgba[..., 3]
        if ratio != 1.0:
            alpha = 1.0 - np.exp(ratio * np.log1p(-np.minimum(alpha, 1.0 - 1e-7)))
        alpha = np.where(beyond, 0.0, alpha)

        # Closed-form front-to-back fold of the chunk behind what accumulated.
        transm = np.cumprod(1.0 - alpha, axis=0)
        t_before = np.empty_like(transm)
        t_before[0] = 1.0
        t_before[1:] = transm[:-1]
        chunk_rgb = np.einsum("kn,knc->nc", t_before * alpha, rgba[..., :3])
        chunk_a = 1.0 - transm[-1]
        rgb_c += (1.0 - a_c)[:, np.newaxis] * chunk_rgb
        a_c += (1.0 - a_c) * chunk_a

        t = t + STEP_CHUNK * step
        done = (t > t_end) | (a_c >= term)
        if done.any():
            retired = np.flatnonzero(done)
            acc_rgb[idx[retired]] = rgb_c[retired]
            acc_a[idx[retired]] = a_c[retired]
            keep = ~done
            idx = idx[keep]
            o_c = o_c[keep]
            d_c = d_c[keep]
            t = t[keep]
            t_end = t_end[keep]
            rgb_c = rgb_c[keep]
            a_c = a_c[keep]

    return acc_rgb.reshape(rows, w, 3), acc_a.reshape(rows, w)
