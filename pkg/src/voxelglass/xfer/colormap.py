"""Color schemes for intensity mapping, with perceptual-lightness validation.

Four built-in schemes plus user tables:

* grayscale -- neutral ramp, generated.
* hsv       -- hue sweep 240..0 degrees at full saturation/value, generated.
              A classic rainbow: bright, but its CIE L* is not monotone, so
              nearby intensities can land on perceptually flat spots.
* fire      -- black..red..orange..yellow..white, shipped as a CSV asset.
* cet_l08   -- blue..magenta..orange..yellow, shipped as a CSV asset.

The two assets are linear-lightness tables produced by
``scripts/make_colormaps.py`` (CIELAB path with strictly increasing L*,
chroma-reduced into the sRGB gamut), styled after Kovesi's linear maps of the
same names.  ``validate_lightness`` turns the "does lightness rise steadily"
question into numbers: sRGB -> linear RGB -> XYZ (D65) -> L*, reporting
monotonicity and the worst per-step deviation from the mean L* step.
"""

from __future__ import annotations

import colorsys
import enum
import importlib.resources
from dataclasses import dataclass

import numpy as np

TABLE_SIZE = 256

# sRGB linear-light to XYZ (D65 white), IEC 61966-2-1.
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_EPS = 216.0 / 24389.0
_KAPPA = 24389.0 / 27.0


class SchemeKind(enum.Enum):
    GRAYSCALE = "grayscale"
    HSV = "hsv"
    FIRE = "fire"
    CET_L08 = "cet_l08"
    TABLE_FILE = "table_file"


@dataclass(frozen=True)
class ColorScheme:
    kind: SchemeKind
    table: np.ndarray  # (256, 3) floats in [0, 1]

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.float64)
        if t.shape != (TABLE_SIZE, 3):
            raise ValueError(f"table must be ({TABLE_SIZE}, 3), got {t.shape}")
        if t.min() < 0.0 or t.max() > 1.0:
            raise ValueError("table components must be in [0, 1]")
        object.__setattr__(self, "table", t)

    @staticmethod
    def grayscale() -> "ColorScheme":
        ramp = np.linspace(0.0, 1.0, TABLE_SIZE)
        return ColorScheme(SchemeKind.GRAYSCALE, np.stack([ramp] * 3, axis=1))

    @staticmethod
    def hsv() -> "ColorScheme":
        hues = np.linspace(240.0, 0.0, TABLE_SIZE) / 360.0
        table = np.array([colorsys.hsv_to_rgb(h, 1.0, 1.0) for h in hues])
        return ColorScheme(SchemeKind.HSV, table)

    @staticmethod
    def fire() -> "ColorScheme":
        return ColorScheme(SchemeKind.FIRE, _load_asset("fire.csv"))

    @staticmethod
    def cet_l08() -> "ColorScheme":
        return ColorScheme(SchemeKind.CET_L08, _load_asset("cet_l08.csv"))

    @staticmethod
    def from_file(path) -> "ColorScheme":
        return ColorScheme(SchemeKind.TABLE_FILE, load_table_csv(path))

    @staticmethod
    def by_name(name: str) -> "ColorScheme":
        builders = {
            "grayscale": ColorScheme.grayscale,
            "hsv": ColorScheme.hsv,
            "fire": ColorScheme.fire,
            "cet_l08": ColorScheme.cet_l08,
        }
        key = name.lower().replace("-", "_")
        if key not in builders:
            raise ValueError(f"unknown color scheme {name!r}")
        return builders[key]()

    def lookup(self, w):
        """Color at windowed intensity w via linear interpolation at w*255."""
        pos = np.clip(np.asarray(w, dtype=np.float64), 0.0, 1.0) * (TABLE_SIZE - 1)
        i0 = np.floor(pos).astype(np.int64)
        i1 = np.minimum(i0 + 1, TABLE_SIZE - 1)
        frac = (pos - i0)[..., np.newaxis]
        return self.table[i0] * (1.0 - frac) + self.table[i1] * frac


def load_table_csv(path) -> np.ndarray:
    """Read a 256-line ``r,g,b`` CSV of floats in [0,1]."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"expected 'r,g,b', got {line!r}")
            rows.append([float(p) for p in parts])
    table = np.asarray(rows, dtype=np.float64)
    if table.shape != (TABLE_SIZE, 3):
        raise ValueError(f"colormap must have {TABLE_SIZE} entries, got {table.shape[0]}")
    return table


def _load_asset(name: str) -> np.ndarray:
    ref = importlib.resources.files("voxelglass.xfer").joinpath(f"assets/{name}")
    with importlib.resources.as_file(ref) as path:
        return load_table_csv(path)


def srgb_to_linear(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    return np.where(c <= 0.0031308, c * 12.92, 1.055 * np.maximum(c, 0.0) ** (1.0 / 2.4) - 0.055)


def srgb_to_lightness(rgb: np.ndarray) -> np.ndarray:
    """CIE L* of sRGB colors (D65 white, Y_n = 1)."""
    lin = srgb_to_linear(np.asarray(rgb, dtype=np.float64))
    y = lin @ _RGB_TO_XYZ[1]
    f = np.where(y > _EPS, np.cbrt(y), (_KAPPA * y + 16.0) / 116.0)
    return 116.0 * f - 16.0


@dataclass(frozen=True)
class LightnessReport:
    monotone: bool
    max_step_deviation: float
    lightness: np.ndarray

    def __str__(self):
        return (
            f"monotone={'true' if self.monotone else 'false'} "
            f"max_step_deviation={self.max_step_deviation:.6f} "
            f"L*_range=[{self.lightness.min():.2f}, {self.lightness.max():.2f}]"
        )


def validate_lightness(scheme: ColorScheme) -> LightnessReport:
    """Check whether the scheme's lightness rises steadily across the table."""
    lstar = srgb_to_lightness(scheme.table)
    steps = np.diff(lstar)
    monotone = bool(np.all(steps >= -1e-6))
    deviation = float(np.abs(steps - steps.mean()).max()) if len(steps) else 0.0
    return LightnessReport(monotone=monotone, max_step_deviation=deviation, lightness=lstar)
