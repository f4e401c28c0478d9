"""Frame output: binary PPM (P6) and PNG, plus the PSNR comparison metric."""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .scene import Framebuffer


def _rgb8(image) -> np.ndarray:
    if isinstance(image, Framebuffer):
        return image.rgb8()
    arr = np.asarray(image)
    if arr.dtype == np.uint8:
        return arr
    return np.clip(arr * 255.0 + 0.5, 0, 255).astype(np.uint8)


def write_ppm(image, path) -> None:
    rgb = _rgb8(image)
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def encode_png(image) -> bytes:
    rgb = _rgb8(image)
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def decode_png(data: bytes) -> np.ndarray:
    with Image.open(io.BytesIO(data)) as im:
        return np.asarray(im.convert("RGB"))


def write_png(image, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_png(image))


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio between two images, in dB (peak = 1.0)."""
    pa = a.pixels[..., :3] if isinstance(a, Framebuffer) else np.asarray(a, dtype=np.float64)
    pb = b.pixels[..., :3] if isinstance(b, Framebuffer) else np.asarray(b, dtype=np.float64)
    if pa.shape != pb.shape:
        raise ValueError(f"image shapes differ: {pa.shape} vs {pb.shape}")
    mse = float(np.mean((pa.astype(np.float64) - pb.astype(np.float64)) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(1.0 / mse)
