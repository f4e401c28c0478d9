"""Engine configuration: one INI-style file, every CLI flag overrides a key.

Sections and defaults are documented by ``EngineConfig.dump``; unknown keys
are rejected so typos fail loudly.  ``VOXELGLASS_CONFIG`` names a default
config path, ``VOXELGLASS_BIND`` overrides the server bind address.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import asdict, dataclass, field, fields
from typing import Optional


@dataclass
class EngineConfig:
    # [volume]
    volume_path: Optional[str] = None
    # [transfer]
    scheme: str = "grayscale"
    window_base: float = 0.0
    window_brightness: float = 0.0
    window_contrast: float = 1.0
    opacity_points: str = "0:0,1:1"
    # [rig]
    baseline: float = 0.064
    fov_y_deg: float = 90.0
    near: float = 0.1
    far: float = 20.0
    # [camera]
    cam_fx: float = 600.0
    cam_fy: float = 600.0
    cam_cx: float = 320.0
    cam_cy: float = 240.0
    cam_width: int = 640
    cam_height: int = 480
    # [marker]
    marker_size: float = 0.15
    marker_cadence: int = 5
    marker_blend: float = 0.3
    # [interact]
    sensitivity: float = 1.0
    pressure_width_min: float = 0.001
    pressure_width_max: float = 0.008
    pressure_depth_max: float = 0.030
    touch_radius: float = 0.010
    # [server]
    bind: str = "127.0.0.1"
    tcp_port: int = 7420
    ws_port: int = 7421
    heartbeat_timeout: float = 30.0
    # [render]
    method: str = "raycast"
    render_width: int = 256
    render_height: int = 256
    slice_count: int = 256
    step_size: float = 1.0 / 512.0
    workers: int = 2
    distance: float = 1.5
    # [bench]
    bench_width: int = 256
    bench_height: int = 256
    bench_duration: float = 10.0

    def validate(self) -> None:
        if self.volume_path and not os.path.exists(self.volume_path):
            raise FileNotFoundError(f"volume file not found: {self.volume_path}")
        if self.window_contrast <= 0:
            raise ValueError("window_contrast must be positive")
        if not (0 <= self.window_base < 1):
            raise ValueError("window_base must be in [0, 1)")
        if self.marker_size <= 0:
            raise ValueError("marker_size must be positive")
        if self.method not in ("raycast", "view-aligned", "texture"):
            raise ValueError(f"unknown render method {self.method!r}")
        parse_opacity_points(self.opacity_points)


_SECTIONS = {
    "volume": {"path": "volume_path"},
    "transfer": {
        "scheme": "scheme",
        "window_base": "window_base",
        "window_brightness": "window_brightness",
        "window_contrast": "window_contrast",
        "opacity_points": "opacity_points",
    },
    "rig": {"baseline": "baseline", "fov_y_deg": "fov_y_deg", "near": "near", "far": "far"},
    "camera": {
        "fx": "cam_fx", "fy": "cam_fy", "cx": "cam_cx", "cy": "cam_cy",
        "width": "cam_width", "height": "cam_height",
    },
    "marker": {"size": "marker_size", "cadence": "marker_cadence", "blend": "marker_blend"},
    "interact": {
        "sensitivity": "sensitivity",
        "pressure_width_min": "pressure_width_min",
        "pressure_width_max": "pressure_width_max",
        "pressure_depth_max": "pressure_depth_max",
        "touch_radius": "touch_radius",
    },
    "server": {
        "bind": "bind", "tcp_port": "tcp_port", "ws_port": "ws_port",
        "heartbeat_timeout": "heartbeat_timeout",
    },
    "render": {
        "method": "method", "width": "render_width", "height": "render_height",
        "slice_count": "slice_count", "step_size": "step_size", "workers": "workers",
        "distance": "distance",
    },
    "bench": {
        "width": "bench_width", "height": "bench_height", "duration": "bench_duration",
    },
}


def parse_opacity_points(text: str) -> tuple:
    """Parse "x:a,x:a,..." into opacity control points."""
    pts = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        x, _, a = chunk.partition(":")
        pts.append((float(x), float(a)))
    if not pts:
        raise ValueError("opacity_points must contain at least one x:a pair")
    return tuple(pts)


def load_config(path) -> EngineConfig:
    parser = configparser.ConfigParser()
    with open(path, "r", encoding="utf-8") as fh:
        parser.read_file(fh)
    cfg = EngineConfig()
    types = {f.name: f.type for f in fields(EngineConfig)}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ValueError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SECTIONS[section]:
                raise ValueError(f"unknown key {key!r} in [{section}]")
            attr = _SECTIONS[section][key]
            current = getattr(cfg, attr)
            kind = types[attr]
            if kind in ("int", int):
                value = int(raw)
            elif kind in ("float", float):
                value = float(raw)
            elif current is None or kind.startswith("Optional"):
                value = raw
            else:
                value = raw
            setattr(cfg, attr, value)
    cfg.validate()
    return cfg


def dump_config(cfg: EngineConfig, path) -> None:
    lines = []
    values = asdict(cfg)
    for section, keys in _SECTIONS.items():
        lines.append(f"[{section}]")
        for key, attr in keys.items():
            v = values[attr]
            if v is None:
                continue
            lines.append(f"{key} = {v}")
        lines.append("")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))


def default_config_path() -> Optional[str]:
    return os.environ.get("VOXELGLASS_CONFIG")
