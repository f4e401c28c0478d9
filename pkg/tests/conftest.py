import struct

import numpy as np
import pytest

from voxelglass.dicom.volume import VolumeDataset
from voxelglass.xfer import OpacityCurve, TransferFunction


def encode_element(tag, vr, raw):
    head = struct.pack("<HH", *tag) + vr.encode()
    if vr in ("OB", "OW", "OF", "SQ", "UT", "UN"):
        return head + b"\x00\x00" + struct.pack("<I", len(raw)) + raw
    return head + struct.pack("<H", len(raw)) + raw


def make_dcm_bytes(rows=2, cols=2, bits_stored=12, pixels=None, position=(0.0, 0.0, 0.0),
                   spacing=(0.5, 0.5), extra=(), series_uid=None, patient_name=None,
                   transfer_syntax="1.2.840.10008.1.2.1"):
    """Hand-built explicit-VR little-endian .dcm file for tests."""

    def evenpad(s, pad=b" "):
        b = s.encode()
        return b + pad if len(b) % 2 else b

    if pixels is None:
        pixels = np.arange(rows * cols, dtype="<u2") % (1 << bits_stored)
    pixels = np.asarray(pixels, dtype="<u2")

    elements = [((0x0002, 0x0010), "UI", evenpad(transfer_syntax, b"\x00"))]
    if patient_name is not None:
        elements.append(((0x0010, 0x0010), "PN", evenpad(patient_name)))
    elements.append(((0x0010, 0x0020), "LO", evenpad("P123456")))
    if series_uid is not None:
        elements.append(((0x0020, 0x000E), "UI", evenpad(series_uid, b"\x00")))
    elements.append(((0x0020, 0x0032), "DS", evenpad("\\".join(f"{v:g}" for v in position))))
    elements.append(((0x0020, 0x0037), "DS", evenpad("1\\0\\0\\0\\1\\0")))
    elements.append(((0x0028, 0x0010), "US", struct.pack("<H", rows)))
    elements.append(((0x0028, 0x0011), "US", struct.pack("<H", cols)))
    elements.append(((0x0028, 0x0030), "DS", evenpad(f"{spacing[0]:g}\\{spacing[1]:g}")))
    elements.append(((0x0028, 0x0100), "US", struct.pack("<H", 16)))
    elements.append(((0x0028, 0x0101), "US", struct.pack("<H", bits_stored)))
    elements.extend(extra)
    elements.append(((0x7FE0, 0x0010), "OW", pixels.tobytes()))
    elements.sort(key=lambda e: e[0])

    body = b"".join(encode_element(tag, vr, raw) for tag, vr, raw in elements)
    return b"\x00" * 128 + b"DICM" + body


@pytest.fixture
def sphere_volume():
    """Smooth 32^3 sphere: the analytic agreement phantom."""
    n = 32
    c = (np.arange(n) + 0.5) / n - 0.5
    z, y, x = np.meshgrid(c, c, c, indexing="ij")
    r = np.sqrt(x * x + y * y + z * z)
    vox = (np.clip((0.38 - r) / 0.12, 0.0, 1.0) * 3000).astype(np.uint16)
    return VolumeDataset(dims=(n, n, n), spacing=(1.0, 1.0, 1.0), voxels=vox)


@pytest.fixture
def simple_tf():
    return TransferFunction(opacity=OpacityCurve(((0.0, 0.0), (1.0, 0.9))))
