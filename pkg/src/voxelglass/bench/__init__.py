from .phantom import make_phantom
from .paths import PathKind, ScriptedPath, default_paths
from .report import FpsSample, BenchReport, emit_csv, emit_summary_csv, emit_plot
from .runner import run_path, compare_methods, method_settings, desk_scale

__all__ = [
    "make_phantom",
    "PathKind",
    "ScriptedPath",
    "default_paths",
    "FpsSample",
    "BenchReport",
    "emit_csv",
    "emit_summary_csv",
    "emit_plot",
    "run_path",
    "compare_methods",
    "method_settings",
    "desk_scale",
]
