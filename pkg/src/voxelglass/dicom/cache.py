"""Lossless single-file volume cache.

Layout (all little-endian):

    offset  size  field
    0       4     magic "VXG1"
    4       12    u32 nx, ny, nz
    16      12    f32 spacing x, y, z (mm)
    28      2     u16 bits_stored
    30      8     u64 payload byte length
    38      n     u16 voxel samples, x fastest, then y, then z
    38+n    4     u32 CRC-32 of the payload
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .parser import DicomError
from .volume import VolumeDataset

MAGIC = b"VXG1"
_HEADER = struct.Struct("<4sIIIfffHQ")


class BadMagic(DicomError):
    """File does not start with the VXG1 marker."""


class ChecksumMismatch(DicomError):
    """Payload CRC does not match the trailer."""


def save_volume_cache(volume: VolumeDataset, path) -> None:
    payload = np.ascontiguousarray(volume.voxels, dtype="<u2").tobytes()
    header = _HEADER.pack(
        MAGIC,
        *volume.dims,
        *(float(s) for s in volume.spacing),
        volume.bits_stored,
        len(payload),
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(payload)))


def load_volume_cache(path) -> VolumeDataset:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size or data[:4] != MAGIC:
        raise BadMagic("not a VXG1 volume cache")
    magic, nx, ny, nz, sx, sy, sz, bits, payload_len = _HEADER.unpack_from(data)
    end = _HEADER.size + payload_len
    if len(data) < end + 4:
        raise DicomError("volume cache truncated")
    payload = data[_HEADER.size:end]
    (crc,) = struct.unpack_from("<I", data, end)
    if zlib.crc32(payload) != crc:
        raise ChecksumMismatch("payload CRC mismatch")
    if payload_len != nx * ny * nz * 2:
        raise DicomError(f"payload length {payload_len} != {nx}*{ny}*{nz}*2")
    voxels = np.frombuffer(payload, dtype="<u2").reshape(nz, ny, nx)
    return VolumeDataset(dims=(nx, ny, nz), spacing=(sx, sy, sz), voxels=voxels, bits_stored=bits)
