"""Intensity windowing: the uniform brightness/contrast stage of the pipeline.

Normalized intensity v in [0,1] maps to clamp((v - base) * contrast + brightness).
``base`` cuts off the low end (raising it suppresses background), ``brightness``
shifts, ``contrast`` scales; the output always lands back in [0,1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class OutOfRange(ValueError):
    """Sample value exceeds the declared bit depth."""


@dataclass(frozen=True)
class WindowParams:
    base: float = 0.0
    brightness: float = 0.0
    contrast: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.base < 1.0):
            raise ValueError("base must be in [0, 1)")
        if not (-1.0 <= self.brightness <= 1.0):
            raise ValueError("brightness must be in [-1, 1]")
        if self.contrast <= 0.0:
            raise ValueError("contrast must be positive")


def truncate_12_to_8(value: int) -> int:
    """Drop the low four bits: the simplest 12-to-8-bit display mapping."""
    if not (0 <= value < 4096):
        raise OutOfRange(f"12-bit sample out of range: {value}")
    return value >> 4


def apply_window(v_norm, params: WindowParams):
    """Windowed intensity; accepts scalars or arrays, clamps into [0,1]."""
    v = np.asarray(v_norm, dtype=np.float64)
    out = np.clip((v - params.base) * params.contrast + params.brightness, 0.0, 1.0)
    return float(out) if np.ndim(v_norm) == 0 else out
