"""Minimal DICOM reader/writer: explicit-VR little-endian, uncompressed.

Only the transfer syntax produced by the bundled fixture writer and by common
CT/MR exports (1.2.840.10008.1.2.1) is accepted; anything else raises
``UnsupportedTransferSyntax``.  Values keep their raw bytes alongside a
decoded form, so a parsed dataset re-serializes byte-identically.

Tag constants used across the package live at the bottom of this module.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterator, Optional

EXPLICIT_VR_LE = "1.2.840.10008.1.2.1"

# VRs whose length field is 16-bit; all others use 2 reserved bytes + 32-bit.
_SHORT_LENGTH_VRS = {
    "AE", "AS", "AT", "CS", "DA", "DS", "DT", "FL", "FD", "IS", "LO", "LT",
    "PN", "SH", "SL", "SS", "ST", "TM", "UI", "UL", "US",
}
_LONG_LENGTH_VRS = {"OB", "OW", "OF", "SQ", "UC", "UR", "UT", "UN"}
_STRING_VRS = {
    "AE", "AS", "CS", "DA", "DS", "DT", "IS", "LO", "LT", "PN", "SH", "ST",
    "TM", "UI", "UC", "UR", "UT",
}
_UNDEFINED_LENGTH = 0xFFFFFFFF


class DicomError(Exception):
    """Base class for DICOM parse/serialize failures."""


class MissingMagic(DicomError):
    """File lacks the 128-byte preamble + 'DICM' marker."""


class TruncatedElement(DicomError):
    """Element header or value extends past the end of the input."""


class UnsupportedTransferSyntax(DicomError):
    """Dataset is not explicit-VR little-endian uncompressed."""


class UnsupportedVR(DicomError):
    """Value representation code is unknown or unhandled."""


@dataclass(frozen=True)
class DicomElement:
    tag: tuple[int, int]
    vr: str
    raw: bytes

    @property
    def value(self):
        """Decoded form: string, int tuple, float tuple, or raw bytes."""
        if self.vr in _STRING_VRS:
            return self.raw.decode("ascii", errors="replace").rstrip(" \x00")
        if self.vr == "US":
            return struct.unpack(f"<{len(self.raw) // 2}H", self.raw)
        if self.vr == "SS":
            return struct.unpack(f"<{len(self.raw) // 2}h", self.raw)
        if self.vr == "UL":
            return struct.unpack(f"<{len(self.raw) // 4}I", self.raw)
        if self.vr == "SL":
            return struct.unpack(f"<{len(self.raw) // 4}i", self.raw)
        if self.vr == "FL":
            return struct.unpack(f"<{len(self.raw) // 4}f", self.raw)
        if self.vr == "FD":
            return struct.unpack(f"<{len(self.raw) // 8}d", self.raw)
        if self.vr == "AT":
            flat = struct.unpack(f"<{len(self.raw) // 2}H", self.raw)
            return tuple(zip(flat[::2], flat[1::2]))
        return self.raw

    def strings(self) -> list[str]:
        """Backslash-separated multi-valued string fields."""
        v = self.value
        if not isinstance(v, str):
            raise UnsupportedVR(f"element {self.tag} is not string-valued")
        return v.split("\\") if v else []


class DicomDataset:
    """Tag-ordered element map for one explicit-VR little-endian dataset."""

    def __init__(self, elements: Optional[list[DicomElement]] = None):
        self._elements: dict[tuple[int, int], DicomElement] = {}
        for el in elements or []:
            self._elements[el.tag] = el
        self._elements = dict(sorted(self._elements.items()))
        self.transfer_syntax = EXPLICIT_VR_LE

    def __iter__(self) -> Iterator[DicomElement]:
        return iter(self._elements.values())

    def __len__(self) -> int:
        return len(self._elements)

    def __contains__(self, tag: tuple[int, int]) -> bool:
        return tag in self._elements

    def get(self, tag: tuple[int, int]) -> Optional[DicomElement]:
        return self._elements.get(tag)

    def require(self, tag: tuple[int, int]) -> DicomElement:
        el = self._elements.get(tag)
        if el is None:
            raise DicomError(f"required tag {_fmt_tag(tag)} missing")
        return el

    def without(self, tag: tuple[int, int]) -> "DicomDataset":
        ds = DicomDataset([el for el in self if el.tag != tag])
        ds.transfer_syntax = self.transfer_syntax
        return ds

    def replaced(self, element: DicomElement) -> "DicomDataset":
        ds = DicomDataset([el for el in self if el.tag != element.tag] + [element])
        ds.transfer_syntax = self.transfer_syntax
        return ds


def _fmt_tag(tag: tuple[int, int]) -> str:
    return f"({tag[0]:04x},{tag[1]:04x})"


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedElement(f"{what}: need {n} bytes at offset {self.pos}, "
                                   f"only {len(self.data) - self.pos} left")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    @property
    def exhausted(self) -> bool:
        return self.pos >= len(self.data)


def _read_element(r: _Reader) -> DicomElement:
    header = r.take(4, "element tag")
    group, elem = struct.unpack("<HH", header)
    vr = r.take(2, "VR code").decode("ascii", errors="replace")
    if vr in _SHORT_LENGTH_VRS:
        (length,) = struct.unpack("<H", r.take(2, "length"))
    elif vr in _LONG_LENGTH_VRS:
        r.take(2, "reserved")
        (length,) = struct.unpack("<I", r.take(4, "length"))
        if length == _UNDEFINED_LENGTH:
            raise UnsupportedVR(f"undefined-length {vr} at {_fmt_tag((group, elem))} unsupported")
    else:
        raise UnsupportedVR(f"unknown VR {vr!r} at {_fmt_tag((group, elem))}")
    raw = r.take(length, f"value of {_fmt_tag((group, elem))}")
    return DicomElement((group, elem), vr, raw)


def parse_dicom_file(data: bytes) -> DicomDataset:
    """Parse a full .dcm byte string (preamble + DICM + meta + dataset)."""
    if len(data) < 132 or data[128:132] != b"DICM":
        raise MissingMagic("no DICM marker after 128-byte preamble")
    r = _Reader(data)
    r.pos = 132

    elements: list[DicomElement] = []
    prev_tag = (-1, -1)
    while not r.exhausted:
        el = _read_element(r)
        if el.tag <= prev_tag:
            raise DicomError(f"tags not strictly ascending at {_fmt_tag(el.tag)}")
        prev_tag = el.tag
        elements.append(el)

    ds = DicomDataset(elements)
    ts = ds.get(TAG_TRANSFER_SYNTAX)
    if ts is not None and ts.value != EXPLICIT_VR_LE:
        raise UnsupportedTransferSyntax(f"transfer syntax {ts.value!r} unsupported")
    return ds


def serialize_element(el: DicomElement) -> bytes:
    if len(el.raw) % 2 != 0:
        raise DicomError(f"odd value length at {_fmt_tag(el.tag)}")
    head = struct.pack("<HH", *el.tag) + el.vr.encode("ascii")
    if el.vr in _SHORT_LENGTH_VRS:
        if len(el.raw) > 0xFFFF:
            raise DicomError(f"value too long for short VR at {_fmt_tag(el.tag)}")
        return head + struct.pack("<H", len(el.raw)) + el.raw
    if el.vr in _LONG_LENGTH_VRS:
        return head + b"\x00\x00" + struct.pack("<I", len(el.raw)) + el.raw
    raise UnsupportedVR(f"unknown VR {el.vr!r}")


def serialize_dataset(ds: DicomDataset, preamble: bytes = b"\x00" * 128) -> bytes:
    """Write a .dcm byte string; inverse of ``parse_dicom_file``."""
    if len(preamble) != 128:
        raise DicomError("preamble must be exactly 128 bytes")
    out = [preamble, b"DICM"]
    out.extend(serialize_element(el) for el in ds)
    return b"".join(out)


def make_string_element(tag: tuple[int, int], vr: str, value: str) -> DicomElement:
    """Build a string-valued element, padded to even length per the format."""
    raw = value.encode("ascii")
    if len(raw) % 2 != 0:
        raw += b"\x00" if vr == "UI" else b" "
    return DicomElement(tag, vr, raw)


def make_ushort_element(tag: tuple[int, int], *values: int) -> DicomElement:
    return DicomElement(tag, "US", struct.pack(f"<{len(values)}H", *values))


# Tags the rest of the package cares about.
TAG_TRANSFER_SYNTAX = (0x0002, 0x0010)
TAG_SERIES_UID = (0x0020, 0x000E)
TAG_IMAGE_POSITION = (0x0020, 0x0032)
TAG_IMAGE_ORIENTATION = (0x0020, 0x0037)
TAG_ROWS = (0x0028, 0x0010)
TAG_COLUMNS = (0x0028, 0x0011)
TAG_PIXEL_SPACING = (0x0028, 0x0030)
TAG_BITS_ALLOCATED = (0x0028, 0x0100)
TAG_BITS_STORED = (0x0028, 0x0101)
TAG_RESCALE_INTERCEPT = (0x0028, 0x1052)
TAG_RESCALE_SLOPE = (0x0028, 0x1053)
TAG_PIXEL_DATA = (0x7FE0, 0x0010)

TAG_PATIENT_NAME = (0x0010, 0x0010)
TAG_PATIENT_ID = (0x0010, 0x0020)
TAG_PATIENT_BIRTH_DATE = (0x0010, 0x0030)
TAG_PATIENT_ADDRESS = (0x0010, 0x1040)
TAG_REFERRING_PHYSICIAN = (0x0008, 0x0090)
TAG_INSTITUTION_NAME = (0x0008, 0x0080)
