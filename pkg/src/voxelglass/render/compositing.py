"""Alpha compositing primitives shared by all rendering methods.

Sample lists composite with the OVER operator.  Front-to-back accumulates
premultiplied color C += (1-A)*a*c, A += (1-A)*a; back-to-front folds
C = a*c + (1-a)*C.  Both orders of the same samples agree to float precision.

Opacity correction: a transfer function's alpha is defined per reference step
(1/512 world units); samples taken at a different spacing ds use
a' = 1 - (1-a)^(ds/ds_ref) so the converged image is sampling-rate invariant.
"""

from __future__ import annotations

import numpy as np

REFERENCE_STEP = 1.0 / 512.0


def correct_alpha(alpha: np.ndarray, step: float, reference: float = REFERENCE_STEP):
    """Rescale per-sample opacity from the reference spacing to ``step``."""
    a = np.clip(np.asarray(alpha, dtype=np.float64), 0.0, 1.0)
    ratio = step / reference
    out = 1.0 - np.exp(ratio * np.log1p(-np.minimum(a, 1.0 - 1e-15)))
    out = np.where(a >= 1.0 - 1e-15, 1.0, out)
    return float(out) if np.ndim(alpha) == 0 else out


def composite_front_to_back(colors: np.ndarray, alphas: np.ndarray):
    """OVER-composite samples ordered nearest first.

    Returns (premultiplied rgb, coverage alpha); both shaped like one sample.
    """
    colors = np.asarray(colors, dtype=np.float64)
    alphas = np.asarray(alphas, dtype=np.float64)
    acc_c = np.zeros(colors.shape[1:])
    acc_a = np.zeros(alphas.shape[1:])
    for c, a in zip(colors, alphas):
        weight = (1.0 - acc_a) * a
        acc_c = acc_c + weight[..., np.newaxis] * c if c.ndim else acc_c + weight * c
        acc_a = acc_a + weight
    return acc_c, acc_a


def composite_back_to_front(colors: np.ndarray, alphas: np.ndarray):
    """OVER-composite samples ordered farthest first (independent reference)."""
    colors = np.asarray(colors, dtype=np.float64)
    alphas = np.asarray(alphas, dtype=np.float64)
    acc_c = np.zeros(colors.shape[1:])
    acc_a = np.zeros(alphas.shape[1:])
    for c, a in zip(colors, alphas):
        if c.ndim:
            acc_c = a[..., np.newaxis] * c + (1.0 - a)[..., np.newaxis] * acc_c
        else:
            acc_c = a * c + (1.0 - a) * acc_c
        acc_a = a + (1.0 - a) * acc_a
    return acc_c, acc_a
