"""Benchmark execution: wall-clock scripted paths over the render methods.

Paths advance by real elapsed time, so a slower machine renders fewer frames
along an identical trajectory.  Frames are counted into 500 ms windows by
their start time; a report always carries one sample per window across the
whole path, empty windows included.
"""

from __future__ import annotations

import math
import os
import time
from typing import Callable, Optional

import numpy as np

from ..dicom.volume import VolumeDataset
from ..render import RenderMethod, RenderSettings, Scene, ViewRig, render_stereo
from ..xfer.opacity import OpacityCurve
from ..xfer.transfer import TransferFunction
from .paths import ScriptedPath, default_paths
from .report import WINDOW_SECONDS, BenchReport, FpsSample, emit_csv, emit_plot, emit_summary_csv

# Declared method defaults for the comparison matrix.
METHOD_DEFAULTS = {
    RenderMethod.TEXTURE_BASED: {"slice_count": 512},
    RenderMethod.VIEW_ALIGNED: {"slice_count": 360},
    RenderMethod.RAYCAST: {"step_size": 1.0 / 512.0},
}

DESK_SCALE_METERS = 0.4


def desk_scale(volume: VolumeDataset) -> np.ndarray:
    """Scale vector putting the volume's largest physical extent at 0.4 m."""
    extent = np.asarray(volume.dims, dtype=float) * np.asarray(volume.spacing, dtype=float)
    return extent / extent.max() * DESK_SCALE_METERS


def bench_transfer() -> TransferFunction:
    """Default benchmark transfer: air transparent, tissue opaque-ish."""
    return TransferFunction(
        opacity=OpacityCurve(((0.0, 0.0), (0.12, 0.0), (0.32, 0.55), (1.0, 0.95)))
    )


def method_settings(method: RenderMethod, resolution=(256, 256),
                    workers: Optional[int] = None, **overrides) -> RenderSettings:
    kwargs = dict(METHOD_DEFAULTS[method])
    kwargs.update(overrides)
    if workers is None:
        workers = min(os.cpu_count() or 1, 4)
    return RenderSettings(method=method, resolution=resolution, workers=workers, **kwargs)


def run_path(scene: Scene, path: ScriptedPath, *,
             clock: Callable[[], float] = time.perf_counter,
             render_fn: Optional[Callable[[Scene], object]] = None) -> BenchReport:
    """Render stereo frames as fast as possible while walking the path."""
    if render_fn is None:
        render_fn = render_stereo
    scale = desk_scale(scene.volume)
    n_windows = max(int(math.ceil(path.duration / WINDOW_SECONDS)), 1)
    counts = [0] * n_windows

    t0 = clock()
    while True:
        t = clock() - t0
        if t >= path.duration:
            break
        scene_t = scene.with_model(path.model_at(t, scale))
        render_fn(scene_t)
        counts[min(int(t / WINDOW_SECONDS), n_windows - 1)] += 1

    samples = tuple(
        FpsSample(i * WINDOW_SECONDS, c / WINDOW_SECONDS) for i, c in enumerate(counts)
    )
    return BenchReport(
        method=scene.settings.method.value,
        path=path.name,
        settings={
            "resolution": list(scene.settings.resolution),
            "slice_count": scene.settings.slice_count,
            "step_size": scene.settings.step_size,
        },
        samples=samples,
    )


def compare_methods(volume: VolumeDataset, paths: Optional[list[ScriptedPath]] = None, *,
                    resolution=(256, 256), out_dir=None, duration: float = 10.0,
                    workers: Optional[int] = None,
                    tf: Optional[TransferFunction] = None,
                    clock: Callable[[], float] = time.perf_counter,
                    render_fn=None,
                    progress: Optional[Callable[[str], None]] = None) -> list[BenchReport]:
    """Run the paths x methods matrix and optionally emit CSV + SVG artifacts."""
    if paths is None:
        paths = default_paths(duration)
    tf = tf or bench_transfer()
    rig = ViewRig.stereo((0.0, 0.0, 0.0), (0.0, 0.0, -1.0), aspect=resolution[0] / resolution[1])

    reports = []
    for method in (RenderMethod.TEXTURE_BASED, RenderMethod.VIEW_ALIGNED, RenderMethod.RAYCAST):
        settings = method_settings(method, resolution=resolution, workers=workers)
        scene = Scene(volume=volume, tf=tf, rig=rig, settings=settings)
        for path in paths:
            if progress:
                progress(f"{method.value} / {path.name}")
            reports.append(run_path(scene, path, clock=clock, render_fn=render_fn))

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        emit_csv(reports, os.path.join(out_dir, "windows.csv"))
        emit_summary_csv(reports, os.path.join(out_dir, "summary.csv"))
        emit_plot(reports, os.path.join(out_dir, "fps.svg"))
    return reports
