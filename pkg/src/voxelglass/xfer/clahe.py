"""Contrast-limited adaptive histogram equalization over a 3D volume.

The volume is partitioned into ``blocks`` sub-blocks per axis.  Each block
gets an intensity histogram; counts above ``clip_limit`` times the uniform
bin height are clipped and their excess spread evenly over all bins
(re-clipping and re-spreading until the excess is gone, so a fully clipped
histogram really is uniform).  Each block's CDF becomes an intensity mapping,
and every voxel is remapped by trilinearly blending the mappings of the eight
nearest block centers, clamping to edge blocks at the boundary.

This runs as a preprocessing pass producing a derived volume; renderers then
sample the result like any other volume.  Equalization happens in the stored
bit depth (12-bit for CT) before any display truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dicom.volume import VolumeDataset


class BlockLargerThanVolume(ValueError):
    """More blocks requested along an axis than there are voxels."""


@dataclass(frozen=True)
class ClaheParams:
    blocks: tuple[int, int, int] = (8, 8, 8)  # (bx, by, bz)
    clip_limit: float = 4.0  # multiple of the uniform bin height; math.inf disables
    bins: int = 256

    def __post_init__(self):
        if min(self.blocks) < 1:
            raise ValueError("block counts must be >= 1")
        if self.clip_limit < 1.0:
            raise ValueError("clip_limit must be >= 1.0")
        if self.bins not in (256, 4096):
            raise ValueError("bins must be 256 or 4096")


def _cdf_to_levels(cdf: np.ndarray, maxval: int) -> np.ndarray:
    """Map a CDF to output levels spanning [0, maxval].

    Normalized by the first occupied bin's mass (the usual equalization
    convention), so the lowest occupied bin lands at 0 and the full output
    range stays available.  A single-bin histogram maps to full scale.
    """
    cdf_min = cdf[np.flatnonzero(cdf > 0)[0]]
    denom = 1.0 - cdf_min
    if denom <= 0.0:
        return cdf * maxval
    return np.clip((cdf - cdf_min) / denom, 0.0, 1.0) * maxval


def _clip_histogram(hist: np.ndarray, limit: float) -> np.ndarray:
    """Clip counts at ``limit`` and spread the excess uniformly (iterated)."""
    h = hist.astype(np.float64)
    excess = np.clip(h - limit, 0.0, None).sum()
    h = np.minimum(h, limit)
    tol = 1e-9 * max(hist.sum(), 1.0)
    for _ in range(256):
        if excess <= tol:
            break
        h += excess / h.size
        excess = np.clip(h - limit, 0.0, None).sum()
        h = np.minimum(h, limit)
    return h


def clahe3d(volume: VolumeDataset, params: ClaheParams) -> VolumeDataset:
    """Equalized copy of ``volume``; dims, spacing, and bit depth unchanged."""
    nx, ny, nz = volume.dims
    bx, by, bz = params.blocks
    if bx > nx or by > ny or bz > nz:
        raise BlockLargerThanVolume(f"blocks {params.blocks} exceed dims {volume.dims}")

    bins = params.bins
    maxval = volume.max_value
    vox = volume.voxels  # (nz, ny, nx)
    # Bin index per voxel: v * bins >> bits (v >> 4 for the 12-bit/256 case).
    bin_idx = ((vox.astype(np.int64) * bins) >> volume.bits_stored).astype(np.int32)

    # Block membership per axis index.
    block_of_x = (np.arange(nx, dtype=np.int64) * bx // nx).astype(np.int32)
    block_of_y = (np.arange(ny, dtype=np.int64) * by // ny).astype(np.int32)
    block_of_z = (np.arange(nz, dtype=np.int64) * bz // nz).astype(np.int32)

    # Per-block clipped-CDF mappings into [0, maxval].
    mapping = np.empty((bz, by, bx, bins), dtype=np.float64)
    flat_block = (
        block_of_z[:, None, None].astype(np.int64) * (by * bx)
        + block_of_y[None, :, None] * bx
        + block_of_x[None, None, :]
    )
    combined = flat_block * bins + bin_idx
    hist_all = np.bincount(combined.ravel(), minlength=bz * by * bx * bins)
    hist_all = hist_all.reshape(bz, by, bx, bins)
    for kz in range(bz):
        for ky in range(by):
            for kx in range(bx):
                hist = hist_all[kz, ky, kx]
                n = hist.sum()
                if n == 0:
                    mapping[kz, ky, kx] = np.linspace(0.0, maxval, bins)
                    continue
                if math.isfinite(params.clip_limit):
                    limit = params.clip_limit * n / bins
                    h = _clip_histogram(hist, limit)
                else:
                    h = hist.astype(np.float64)
                cdf = np.cumsum(h) / h.sum()
                mapping[kz, ky, kx] = _cdf_to_levels(cdf, maxval)

    # Trilinear blend of the 8 nearest block-center mappings, clamping at edges.
    def axis_interp(coord_count: int, block_count: int, dim: int):
        g = (np.arange(coord_count, dtype=np.float64) + 0.0) * block_count / dim - 0.5
        i0f = np.floor(g)
        frac = g - i0f
        i0 = np.clip(i0f, 0, block_count - 1).astype(np.int32)
        i1 = np.clip(i0f + 1, 0, block_count - 1).astype(np.int32)
        return i0, i1, frac

    ix0, ix1, fx = axis_interp(nx, bx, nx)
    iy0, iy1, fy = axis_interp(ny, by, ny)
    iz0, iz1, fz = axis_interp(nz, bz, nz)

    out = np.empty_like(vox)
    yy0 = iy0[:, None]
    yy1 = iy1[:, None]
    wy = fy[:, None]
    xx0 = ix0[None, :]
    xx1 = ix1[None, :]
    wx = fx[None, :]
    for z in range(nz):
        mz = (1.0 - fz[z]) * mapping[iz0[z]] + fz[z] * mapping[iz1[z]]  # (by, bx, bins)
        b = bin_idx[z]
        v00 = mz[yy0, xx0, b]
        v01 = mz[yy0, xx1, b]
        v10 = mz[yy1, xx0, b]
        v11 = mz[yy1, xx1, b]
        plane = (
            (1.0 - wy) * ((1.0 - wx) * v00 + wx * v01)
            + wy * ((1.0 - wx) * v10 + wx * v11)
        )
        out[z] = np.floor(plane + 0.5).astype(np.uint16)

    return VolumeDataset(
        dims=volume.dims,
        spacing=volume.spacing,
        voxels=out,
        bits_stored=volume.bits_stored,
    )


def global_equalize_oracle(volume: VolumeDataset, bins: int = 256) -> np.ndarray:
    """Plain histogram equalization by sorted empirical CDF (reference path).

    Independent of :func:`clahe3d`: ranks the binned voxel values and maps
    each voxel by the fraction of voxels at or below its bin, using the same
    lowest-occupied-bin normalization convention.
    """
    maxval = volume.max_value
    b = ((volume.voxels.astype(np.int64) * bins) >> volume.bits_stored).ravel()
    sorted_bins = np.sort(b)
    cdf = np.searchsorted(sorted_bins, b, side="right") / b.size
    cdf_min = np.searchsorted(sorted_bins, sorted_bins[0], side="right") / b.size
    denom = 1.0 - cdf_min
    if denom <= 0.0:
        levels = cdf * maxval
    else:
        levels = np.clip((cdf - cdf_min) / denom, 0.0, 1.0) * maxval
    return np.floor(levels + 0.5).astype(np.uint16).reshape(volume.voxels.shape)
