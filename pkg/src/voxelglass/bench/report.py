"""Benchmark reports: 500 ms fps windows, CSV emission, SVG line plot.

All emitters format deterministically, so re-emitting identical reports
produces byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field

WINDOW_SECONDS = 0.5

_METHOD_COLORS = {
    "texture": "#d62728",
    "view-aligned": "#2ca02c",
    "raycast": "#1f77b4",
}


@dataclass(frozen=True)
class FpsSample:
    window_start: float
    fps: float

    def __post_init__(self):
        if self.fps < 0:
            raise ValueError("fps must be nonnegative")


@dataclass(frozen=True)
class BenchReport:
    method: str
    path: str
    settings: dict = field(default_factory=dict)
    samples: tuple = ()

    @property
    def mean_fps(self) -> float:
        return sum(s.fps for s in self.samples) / len(self.samples) if self.samples else 0.0

    @property
    def min_fps(self) -> float:
        return min((s.fps for s in self.samples), default=0.0)

    @property
    def max_fps(self) -> float:
        return max((s.fps for s in self.samples), default=0.0)

    def quarter_means(self) -> list[float]:
        """Mean fps over the four quarters of the path."""
        n = len(self.samples)
        if n == 0:
            return [0.0, 0.0, 0.0, 0.0]
        bounds = [round(i * n / 4) for i in range(5)]
        out = []
        for a, b in zip(bounds, bounds[1:]):
            chunk = self.samples[a:b] or self.samples[a:a + 1]
            out.append(sum(s.fps for s in chunk) / len(chunk))
        return out


def emit_csv(reports, path) -> None:
    """Per-window rows: method,path,window_start,fps."""
    if isinstance(reports, BenchReport):
        reports = [reports]
    lines = ["method,path,window_start,fps"]
    for r in reports:
        for s in r.samples:
            lines.append(f"{r.method},{r.path},{s.window_start:.1f},{s.fps:.4f}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_summary_csv(reports, path) -> None:
    """One row per report: method,path,mean_fps,min_fps,max_fps."""
    lines = ["method,path,mean_fps,min_fps,max_fps"]
    for r in reports:
        lines.append(
            f"{r.method},{r.path},{r.mean_fps:.4f},{r.min_fps:.4f},{r.max_fps:.4f}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_plot(reports, path, width: int = 720, height: int = 420) -> None:
    """fps-over-time SVG: one polyline per report, colored by method."""
    margin = 50.0
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin
    t_max = max((s.window_start + WINDOW_SECONDS for r in reports for s in r.samples), default=1.0)
    f_max = max((s.fps for r in reports for s in r.samples), default=1.0)
    f_max = max(f_max * 1.05, 1e-6)

    def sx(t):  # time -> x
        return margin + plot_w * (t / t_max)

    def sy(f):  # fps -> y (origin bottom-left)
        return height - margin - plot_h * (f / f_max)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin:.1f}" y1="{height - margin:.1f}" x2="{width - margin:.1f}" '
        f'y2="{height - margin:.1f}" stroke="black" stroke-width="1"/>',
        f'<line x1="{margin:.1f}" y1="{margin:.1f}" x2="{margin:.1f}" '
        f'y2="{height - margin:.1f}" stroke="black" stroke-width="1"/>',
        f'<text x="{width / 2:.1f}" y="{height - 12:.1f}" font-size="12" '
        f'text-anchor="middle">time (s)</text>',
        f'<text x="14" y="{height / 2:.1f}" font-size="12" text-anchor="middle" '
        f'transform="rotate(-90 14 {height / 2:.1f})">frames per second</text>',
    ]
    for idx, r in enumerate(sorted(reports, key=lambda r: (r.method, r.path))):
        color = _METHOD_COLORS.get(r.method, "#7f7f7f")
        pts = " ".join(
            f"{sx(s.window_start + WINDOW_SECONDS / 2):.2f},{sy(s.fps):.2f}" for s in r.samples
        )
        if pts:
            parts.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>'
            )
        parts.append(
            f'<text x="{width - margin:.1f}" y="{margin + 14 * idx:.1f}" font-size="10" '
            f'text-anchor="end" fill="{color}">{r.method} / {r.path}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")
