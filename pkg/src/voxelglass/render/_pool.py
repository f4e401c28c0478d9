"""Row-band fan-out for the renderers.

Bands are independent (per-pixel accumulation), so stitching is a plain
concatenate and the result is identical for any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def run_banded(band_fn, height: int, workers: int):
    """Run ``band_fn(row0, row1) -> (rgb, alpha)`` over row bands and stitch."""
    if workers <= 1 or height < 2 * workers:
        return band_fn(0, height)
    bounds = np.linspace(0, height, workers + 1).astype(int)
    spans = [(int(bounds[i]), int(bounds[i + 1])) for i in range(workers) if bounds[i] < bounds[i + 1]]
    with ThreadPoolExecutor(max_workers=len(spans)) as pool:
        parts = list(pool.map(lambda s: band_fn(*s), spans))
    rgb = np.concatenate([p[0] for p in parts], axis=0)
    alpha = np.concatenate([p[1] for p in parts], axis=0)
    return rgb, alpha
