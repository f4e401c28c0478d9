"""Piecewise-linear opacity curve over normalized intensity."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class OpacityCurve:
    points: tuple = field(default_factory=lambda: ((0.0, 0.0), (1.0, 1.0)))

    def __post_init__(self):
        pts = tuple((float(x), float(a)) for x, a in self.points)
        if len(pts) < 1:
            raise ValueError("opacity curve needs at least one control point")
        xs = [p[0] for p in pts]
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("control point intensities must be strictly increasing")
        if any(not (0.0 <= a <= 1.0) for _, a in pts):
            raise ValueError("alphas must be in [0, 1]")
        object.__setattr__(self, "points", pts)

    def __call__(self, v):
        """Alpha at intensity v (scalar or array); clamps outside the ends."""
        xs = np.array([p[0] for p in self.points])
        ys = np.array([p[1] for p in self.points])
        out = np.interp(np.asarray(v, dtype=np.float64), xs, ys)
        return float(out) if np.ndim(v) == 0 else out

    def scaled(self, factor: float) -> "OpacityCurve":
        return OpacityCurve(tuple((x, min(1.0, a * factor)) for x, a in self.points))
