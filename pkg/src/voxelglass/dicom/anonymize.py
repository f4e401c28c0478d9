"""Strip or blank identifying tags while leaving imaging data untouched.

Policy files are plain text, one rule per line::

    # comment
    0010,0010 remove
    0010,0020 replace ANON

Rules targeting tags the volume assembler needs are refused outright.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

from . import parser
from .parser import DicomDataset, DicomElement, DicomError, _fmt_tag

# Tags slice extraction depends on; anonymization must never touch these.
IMAGING_TAGS = frozenset(
    {
        parser.TAG_ROWS,
        parser.TAG_COLUMNS,
        parser.TAG_BITS_ALLOCATED,
        parser.TAG_BITS_STORED,
        parser.TAG_PIXEL_SPACING,
        parser.TAG_IMAGE_POSITION,
        parser.TAG_IMAGE_ORIENTATION,
        parser.TAG_PIXEL_DATA,
    }
)


class PolicyTargetsImagingTag(DicomError):
    """Policy tried to strip a tag required for volume assembly."""


@dataclass(frozen=True)
class PolicyRule:
    tag: tuple[int, int]
    action: str  # "remove" or "replace"
    replacement: str = ""


class AnonymizePolicy:
    def __init__(self, rules: list[PolicyRule]):
        for rule in rules:
            if rule.tag in IMAGING_TAGS:
                raise PolicyTargetsImagingTag(
                    f"policy targets imaging tag {_fmt_tag(rule.tag)}"
                )
            if rule.action not in ("remove", "replace"):
                raise ValueError(f"unknown policy action {rule.action!r}")
        self.rules = list(rules)

    @staticmethod
    def parse(text: str) -> "AnonymizePolicy":
        rules = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split(None, 2)
            if len(parts) < 2:
                raise ValueError(f"policy line {lineno}: expected 'GGGG,EEEE action'")
            try:
                g, e = parts[0].split(",")
                tag = (int(g, 16), int(e, 16))
            except ValueError as exc:
                raise ValueError(f"policy line {lineno}: bad tag {parts[0]!r}") from exc
            action = parts[1].lower()
            replacement = parts[2] if len(parts) > 2 else ""
            rules.append(PolicyRule(tag, action, replacement))
        return AnonymizePolicy(rules)

    @staticmethod
    def load(path) -> "AnonymizePolicy":
        with open(path, "r", encoding="utf-8") as fh:
            return AnonymizePolicy.parse(fh.read())


def default_policy() -> AnonymizePolicy:
    """Bundled policy covering the usual patient-identity tags."""
    text = (
        importlib.resources.files("voxelglass.dicom")
        .joinpath("assets/default_policy.cfg")
        .read_text(encoding="utf-8")
    )
    return AnonymizePolicy.parse(text)


def anonymize(ds: DicomDataset, policy: AnonymizePolicy) -> DicomDataset:
    """Apply the policy; everything not listed passes through byte-identically."""
    out = ds
    for rule in policy.rules:
        existing = out.get(rule.tag)
        if existing is None:
            continue
        if rule.action == "remove":
            out = out.without(rule.tag)
        else:
            replacement = parser.make_string_element(rule.tag, existing.vr, rule.replacement) \
                if existing.vr in parser._STRING_VRS else \
                DicomElement(rule.tag, existing.vr, b"\x00" * len(existing.raw))
            out = out.replaced(replacement)
    return out
