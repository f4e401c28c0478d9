#!/usr/bin/env python3
"""Regenerate the bundled fire.csv / cet_l08.csv colormap assets.

Both tables are built the same way: walk a path through CIELAB with strictly
linear L* (so perceptual lightness rises by a constant step per entry) while
hue and chroma trace the named look.  Colors falling outside the sRGB gamut
are pulled back by shrinking chroma at constant L* and hue (bisection), which
cannot disturb the lightness ramp.  The result is written as 256 lines of
``r,g,b`` floats.

Styles follow Kovesi's well-known linear maps of the same names:
fire (black -> red -> orange -> yellow -> white) and L08
(blue -> magenta -> orange -> yellow).  The tables here are an in-repo
reconstruction, not a copy of the published data.
"""

import argparse
import pathlib

import numpy as np

_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
_WHITE = np.array([0.95047, 1.0, 1.08883])
_EPS = 216.0 / 24389.0
_KAPPA = 24389.0 / 27.0


def lab_to_srgb(lab):
    ell, a, b = lab
    fy = (ell + 16.0) / 116.0
    fx = fy + a / 500.0
    fz = fy - b / 200.0

    def finv(f):
        f3 = f**3
        return f3 if f3 > _EPS else (116.0 * f - 16.0) / _KAPPA

    xyz = np.array([finv(fx), finv(fy) if ell > _KAPPA * _EPS else ell / _KAPPA, finv(fz)]) * _WHITE
    lin = _XYZ_TO_RGB @ xyz
    srgb = np.where(lin <= 0.0031308, lin * 12.92, 1.055 * np.maximum(lin, 0.0) ** (1 / 2.4) - 0.055)
    return srgb, bool(np.all(lin >= -1e-9) and np.all(lin <= 1.0 + 1e-9))


def gamut_mapped(ell, chroma, hue_deg):
    """Largest-chroma sRGB color at (L*, hue) with chroma <= requested."""
    h = np.radians(hue_deg)
    lo, hi = 0.0, chroma
    srgb, ok = lab_to_srgb((ell, hi * np.cos(h), hi * np.sin(h)))
    if ok:
        return np.clip(srgb, 0.0, 1.0)
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        srgb, ok = lab_to_srgb((ell, mid * np.cos(h), mid * np.sin(h)))
        if ok:
            lo = mid
        else:
            hi = mid
    srgb, _ = lab_to_srgb((ell, lo * np.cos(h), lo * np.sin(h)))
    return np.clip(srgb, 0.0, 1.0)


def build(l_start, l_end, hue_start, hue_end, chroma_peak, chroma_power, n=256):
    t = np.linspace(0.0, 1.0, n)
    ells = l_start + (l_end - l_start) * t
    hues = hue_start + (hue_end - hue_start) * t
    chromas = chroma_peak * np.sin(np.pi * t) ** chroma_power
    return np.array([gamut_mapped(ell, c, h) for ell, c, h in zip(ells, chromas, hues)])


RECIPES = {
    # black -> deep red -> orange -> yellow -> near white
    "fire.csv": dict(l_start=1.5, l_end=96.0, hue_start=30.0, hue_end=97.0,
                     chroma_peak=105.0, chroma_power=0.75),
    # deep blue -> magenta -> orange -> yellow
    "cet_l08.csv": dict(l_start=6.0, l_end=93.0, hue_start=295.0, hue_end=458.0,
                        chroma_peak=80.0, chroma_power=0.55),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    default_out = pathlib.Path(__file__).resolve().parent.parent / "src/voxelglass/xfer/assets"
    ap.add_argument("--out", type=pathlib.Path, default=default_out)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, recipe in RECIPES.items():
        table = build(**recipe)
        path = args.out / name
        with open(path, "w", encoding="utf-8") as fh:
            for r, g, b in table:
                fh.write(f"{r:.6f},{g:.6f},{b:.6f}\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
