from .parser import (
    DicomError,
    MissingMagic,
    TruncatedElement,
    UnsupportedTransferSyntax,
    UnsupportedVR,
    DicomElement,
    DicomDataset,
    parse_dicom_file,
    serialize_dataset,
)
from .anonymize import PolicyTargetsImagingTag, AnonymizePolicy, anonymize, default_policy
from .volume import (
    SliceMeta,
    VolumeDataset,
    InconsistentDimensions,
    NonUniformSpacing,
    DuplicatePosition,
    assemble_volume,
    slice_from_dataset,
)
from .cache import BadMagic, ChecksumMismatch, save_volume_cache, load_volume_cache

__all__ = [
    "DicomError",
    "MissingMagic",
    "TruncatedElement",
    "UnsupportedTransferSyntax",
    "UnsupportedVR",
    "DicomElement",
    "DicomDataset",
    "parse_dicom_file",
    "serialize_dataset",
    "PolicyTargetsImagingTag",
    "AnonymizePolicy",
    "anonymize",
    "default_policy",
    "SliceMeta",
    "VolumeDataset",
    "InconsistentDimensions",
    "NonUniformSpacing",
    "DuplicatePosition",
    "assemble_volume",
    "slice_from_dataset",
    "BadMagic",
    "ChecksumMismatch",
    "save_volume_cache",
    "load_volume_cache",
]
