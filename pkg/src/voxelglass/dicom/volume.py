"""Stack sorted 2D slices into a 3D voxel grid with physical spacing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import parser
from .parser import DicomDataset, DicomError


class InconsistentDimensions(DicomError):
    """Slices disagree on rows/cols/bit depth."""


class NonUniformSpacing(DicomError):
    """Inter-slice gaps deviate more than 10% from their median."""


class DuplicatePosition(DicomError):
    """Two slices share a position along the stack normal."""


@dataclass(frozen=True)
class SliceMeta:
    rows: int
    cols: int
    pixel_spacing: tuple[float, float]  # mm per pixel: (row, col)
    position: tuple[float, float, float]  # mm, ImagePositionPatient
    bits_stored: int = 12
    row_dir: Optional[tuple[float, float, float]] = None
    col_dir: Optional[tuple[float, float, float]] = None

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ValueError("rows and cols must be positive")
        if min(self.pixel_spacing) <= 0:
            raise ValueError("pixel spacing must be positive")
        if not (8 <= self.bits_stored <= 16):
            raise ValueError("bits_stored must be within [8, 16]")


@dataclass
class VolumeDataset:
    dims: tuple[int, int, int]  # (nx, ny, nz)
    spacing: tuple[float, float, float]  # mm per voxel per axis
    voxels: np.ndarray  # uint16, shape (nz, ny, nx), x fastest
    bits_stored: int = 12
    value_range: tuple[int, int] = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        nx, ny, nz = self.dims
        v = np.ascontiguousarray(self.voxels, dtype=np.uint16)
        if v.size != nx * ny * nz:
            raise ValueError(f"voxel count {v.size} != {nx}*{ny}*{nz}")
        v = v.reshape(nz, ny, nx)
        if v.size and int(v.max()) >= (1 << self.bits_stored):
            raise ValueError(f"voxel value exceeds {self.bits_stored}-bit range")
        self.voxels = v
        if self.value_range is None:
            self.value_range = (int(v.min()), int(v.max())) if v.size else (0, 0)

    @property
    def max_value(self) -> int:
        return (1 << self.bits_stored) - 1

    def normalized(self) -> np.ndarray:
        """Voxels as float32 in [0, 1]."""
        return self.voxels.astype(np.float32) / np.float32(self.max_value)


def stack_normal(meta: SliceMeta) -> np.ndarray:
    """Direction slices are stacked along: row x col cosines, else +z."""
    if meta.row_dir is not None and meta.col_dir is not None:
        n = np.cross(np.asarray(meta.row_dir, float), np.asarray(meta.col_dir, float))
        norm = np.linalg.norm(n)
        if norm > 1e-9:
            return n / norm
    return np.array([0.0, 0.0, 1.0])


def assemble_volume(slices: Sequence[tuple[SliceMeta, np.ndarray]]) -> VolumeDataset:
    """Order slices along the stack normal and fuse them into one grid.

    Input order does not matter; the output voxel array is identical for any
    permutation of the same slices.
    """
    if len(slices) < 2:
        raise InconsistentDimensions("need at least 2 slices")
    first = slices[0][0]
    for meta, grid in slices:
        if (meta.rows, meta.cols, meta.bits_stored) != (first.rows, first.cols, first.bits_stored):
            raise InconsistentDimensions(
                f"slice {meta.rows}x{meta.cols}@{meta.bits_stored} != "
                f"{first.rows}x{first.cols}@{first.bits_stored}"
            )
        if grid.shape != (meta.rows, meta.cols):
            raise InconsistentDimensions(f"grid shape {grid.shape} != meta rows/cols")

    normal = stack_normal(first)
    positions = np.array([m.position for m, _ in slices], dtype=float)
    dists = positions @ normal

    # Collinearity: perpendicular offsets must agree across slices.
    perp = positions - np.outer(dists, normal)
    if np.ptp(perp, axis=0).max() > 1e-3:
        raise DicomError("slice positions are not collinear along the stack normal")

    order = np.argsort(dists, kind="stable")
    sorted_d = dists[order]
    gaps = np.diff(sorted_d)
    if np.any(np.abs(gaps) < 1e-9):
        raise DuplicatePosition("two slices at the same stack position")
    median_gap = float(np.median(gaps))
    if np.any(np.abs(gaps - median_gap) > 0.10 * abs(median_gap)):
        raise NonUniformSpacing(
            f"inter-slice gaps {gaps.min():.4g}..{gaps.max():.4g} vs median {median_gap:.4g}"
        )

    stack = np.stack([np.asarray(slices[i][1], dtype=np.uint16) for i in order], axis=0)
    spacing = (first.pixel_spacing[1], first.pixel_spacing[0], abs(median_gap))
    return VolumeDataset(
        dims=(first.cols, first.rows, len(slices)),
        spacing=spacing,
        voxels=stack,
        bits_stored=first.bits_stored,
    )


def slice_from_dataset(ds: DicomDataset) -> tuple[SliceMeta, np.ndarray]:
    """Extract one slice (metadata + sample grid) from a parsed dataset."""
    rows = ds.require(parser.TAG_ROWS).value[0]
    cols = ds.require(parser.TAG_COLUMNS).value[0]
    bits_alloc = ds.require(parser.TAG_BITS_ALLOCATED).value[0]
    bits_stored = ds.require(parser.TAG_BITS_STORED).value[0]
    if bits_alloc != 16:
        raise DicomError(f"only 16-bit allocated samples supported, got {bits_alloc}")
    spacing_vals = [float(s) for s in ds.require(parser.TAG_PIXEL_SPACING).strings()]
    position = tuple(float(s) for s in ds.require(parser.TAG_IMAGE_POSITION).strings())
    orient = ds.get(parser.TAG_IMAGE_ORIENTATION)
    row_dir = col_dir = None
    if orient is not None:
        cosines = [float(s) for s in orient.strings()]
        row_dir, col_dir = tuple(cosines[:3]), tuple(cosines[3:6])

    raw = ds.require(parser.TAG_PIXEL_DATA).raw
    expected = rows * cols * 2
    if len(raw) < expected:
        raise DicomError(f"pixel data has {len(raw)} bytes, expected {expected}")
    grid = np.frombuffer(raw[:expected], dtype="<u2").reshape(rows, cols)

    meta = SliceMeta(
        rows=rows,
        cols=cols,
        pixel_spacing=(spacing_vals[0], spacing_vals[1]),
        position=position,  # type: ignore[arg-type]
        bits_stored=bits_stored,
        row_dir=row_dir,
        col_dir=col_dir,
    )
    return meta, grid
