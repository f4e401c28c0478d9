from .window import WindowParams, OutOfRange, truncate_12_to_8, apply_window
from .opacity import OpacityCurve
from .colormap import (
    ColorScheme,
    SchemeKind,
    LightnessReport,
    validate_lightness,
    srgb_to_lightness,
    load_table_csv,
)
from .transfer import TransferFunction, classify
from .clahe import ClaheParams, BlockLargerThanVolume, clahe3d

__all__ = [
    "WindowParams",
    "OutOfRange",
    "truncate_12_to_8",
    "apply_window",
    "OpacityCurve",
    "ColorScheme",
    "SchemeKind",
    "LightnessReport",
    "validate_lightness",
    "srgb_to_lightness",
    "load_table_csv",
    "TransferFunction",
    "classify",
    "ClaheParams",
    "BlockLargerThanVolume",
    "clahe3d",
]
