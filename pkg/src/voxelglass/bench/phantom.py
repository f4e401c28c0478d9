"""Synthetic CT-like test volume: nested ellipsoids at 12-bit depth.

Stands in for a real scan when none is available; shells of different
intensity give the renderers interior structure, opacity gradients, and a
dense core so early ray termination has something to bite on.
"""

from __future__ import annotations

import numpy as np

from ..dicom.volume import VolumeDataset


def make_phantom(dims: tuple[int, int, int] = (256, 256, 144),
                 spacing: tuple[float, float, float] = (1.4, 1.4, 2.5)) -> VolumeDataset:
    nx, ny, nz = dims
    x = (np.arange(nx) + 0.5) / nx * 2.0 - 1.0
    y = (np.arange(ny) + 0.5) / ny * 2.0 - 1.0
    z = (np.arange(nz) + 0.5) / nz * 2.0 - 1.0
    zz, yy, xx = np.meshgrid(z, y, x, indexing="ij")

    def shell(cx, cy, cz, rx, ry, rz, edge=0.08):
        r = np.sqrt(((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 + ((zz - cz) / rz) ** 2)
        return np.clip((1.0 - r) / edge, 0.0, 1.0)

    vol = np.zeros((nz, ny, nx), dtype=np.float32)
    vol += 1100.0 * shell(0.0, 0.0, 0.0, 0.85, 0.80, 0.90)      # body
    vol += 900.0 * shell(0.25, 0.10, 0.05, 0.35, 0.30, 0.45)    # organ
    vol += 1700.0 * shell(-0.30, -0.15, -0.10, 0.22, 0.25, 0.30)  # dense mass
    vol -= 600.0 * shell(0.05, -0.35, 0.20, 0.18, 0.15, 0.25)   # cavity
    vol = np.clip(vol, 0.0, 4095.0)
    return VolumeDataset(dims=dims, spacing=spacing, voxels=vol.astype(np.uint16))
