"""Transfer function: windowed intensity to RGBA."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .clahe import ClaheParams
from .colormap import ColorScheme
from .opacity import OpacityCurve
from .window import WindowParams, apply_window


@dataclass(frozen=True)
class TransferFunction:
    window: WindowParams = field(default_factory=WindowParams)
    scheme: ColorScheme = field(default_factory=ColorScheme.grayscale)
    opacity: OpacityCurve = field(default_factory=OpacityCurve)
    # When set, the owning scene's volume is expected to be the CLAHE-processed
    # derivative; classification itself never re-reads these parameters.
    clahe: Optional[ClaheParams] = None


def classify(v_norm, tf: TransferFunction):
    """RGBA at normalized intensity; scalar in -> (4,) array, array in -> (..., 4)."""
    w = apply_window(np.asarray(v_norm, dtype=np.float64), tf.window)
    rgb = tf.scheme.lookup(w)
    alpha = tf.opacity(w)
    out = np.concatenate([rgb, np.asarray(alpha)[..., np.newaxis]], axis=-1)
    return out
