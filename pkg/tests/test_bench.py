import numpy as np
import pytest

from voxelglass.bench import (
    BenchReport,
    FpsSample,
    PathKind,
    ScriptedPath,
    compare_methods,
    default_paths,
    desk_scale,
    emit_csv,
    emit_plot,
    emit_summary_csv,
    make_phantom,
    run_path,
)
from voxelglass.render import RenderMethod, RenderSettings, Scene, ViewRig
from voxelglass.xfer import TransferFunction


class FakeClock:
    """Deterministic clock advancing a fixed amount per render call."""

    def __init__(self, per_frame):
        self.t = 0.0
        self.per_frame = per_frame

    def __call__(self):
        return self.t

    def render(self, scene):
        self.t += self.per_frame


def stub_scene(volume):
    return Scene(
        volume=volume, tf=TransferFunction(),
        rig=ViewRig.stereo((0, 0, 0), (0, 0, -1)),
        settings=RenderSettings(method=RenderMethod.RAYCAST, resolution=(32, 32)),
    )


@pytest.fixture(scope="module")
def tiny_volume():
    return make_phantom(dims=(24, 24, 16))


class TestPaths:
    def test_zero_duration_rejected(self):
        with pytest.raises(ValueError):
            ScriptedPath(PathKind.ROTATE_Y, duration=0.0)

    def test_rotation_full_turn(self, tiny_volume):
        path = ScriptedPath(PathKind.ROTATE_Y, 2.0, 2.0, duration=10.0)
        scale = desk_scale(tiny_volume)
        m0 = path.model_at(0.0, scale)
        m_full = path.model_at(10.0, scale)
        assert np.allclose(m0.rotation, m_full.rotation, atol=1e-9)
        m_half = path.model_at(5.0, scale)
        assert np.allclose(m_half.rotation, np.diag([-1.0, 1.0, -1.0]), atol=1e-9)

    def test_approach_moves_linearly(self, tiny_volume):
        path = ScriptedPath(PathKind.APPROACH_Z, 2.0, 0.0, duration=10.0)
        scale = desk_scale(tiny_volume)
        centers = []
        for t in (0.0, 5.0, 10.0):
            m = path.model_at(t, scale)
            centers.append((m.as_matrix() @ np.array([0.5, 0.5, 0.5, 1.0]))[:3])
        assert np.allclose(centers[0], [0, 0, -2.0], atol=1e-9)
        assert np.allclose(centers[1], [0, 0, -1.0], atol=1e-9)
        assert np.allclose(centers[2], [0, 0, 0.0], atol=1e-9)

    def test_default_matrix_is_five_paths(self):
        paths = default_paths()
        assert len(paths) == 5
        kinds = [p.kind for p in paths]
        assert kinds.count(PathKind.ROTATE_Y) == 2
        assert kinds.count(PathKind.ROTATE_X) == 2
        assert kinds.count(PathKind.APPROACH_Z) == 1

    def test_desk_scale_caps_at_04(self, tiny_volume):
        s = desk_scale(tiny_volume)
        assert s.max() == pytest.approx(0.4)
        assert np.all(s > 0)


class TestRunPath:
    def test_stub_clock_exact_fps(self, tiny_volume):
        delay = 1.0 / 32.0  # binary-exact so window boundaries are unambiguous
        clock = FakeClock(per_frame=delay)
        path = ScriptedPath(PathKind.ROTATE_Y, 2.0, 2.0, duration=10.0)
        report = run_path(stub_scene(tiny_volume), path,
                          clock=clock, render_fn=clock.render)
        assert len(report.samples) == 20
        assert all(s.fps == pytest.approx(1.0 / delay) for s in report.samples)

    def test_windows_cover_duration(self, tiny_volume):
        clock = FakeClock(per_frame=0.3)
        path = ScriptedPath(PathKind.APPROACH_Z, 2.0, 0.0, duration=3.0)
        report = run_path(stub_scene(tiny_volume), path,
                          clock=clock, render_fn=clock.render)
        starts = [s.window_start for s in report.samples]
        assert starts == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0, 2.5])

    def test_real_render_smoke(self, tiny_volume):
        path = ScriptedPath(PathKind.ROTATE_Y, 2.0, 2.0, duration=0.6)
        report = run_path(stub_scene(tiny_volume), path)
        assert report.mean_fps > 0
        assert len(report.samples) == 2

    def test_fps_sample_validation(self):
        with pytest.raises(ValueError):
            FpsSample(0.0, -1.0)


class TestEmit:
    def _reports(self):
        samples_a = tuple(FpsSample(i * 0.5, 20.0 - i) for i in range(6))
        samples_b = tuple(FpsSample(i * 0.5, 30.0 + i) for i in range(6))
        return [
            BenchReport("raycast", "rotate_y_2m", {}, samples_a),
            BenchReport("view-aligned", "rotate_y_2m", {}, samples_b),
        ]

    def test_csv_shape(self, tmp_path):
        out = tmp_path / "w.csv"
        emit_csv(self._reports(), out)
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "method,path,window_start,fps"
        assert len(lines) == 1 + 12

    def test_single_report_csv(self, tmp_path):
        out = tmp_path / "one.csv"
        emit_csv(self._reports()[0], out)
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 1 + 6

    def test_summary_rows(self, tmp_path):
        out = tmp_path / "s.csv"
        emit_summary_csv(self._reports(), out)
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "method,path,mean_fps,min_fps,max_fps"
        assert len(lines) == 3

    def test_emitters_deterministic(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_csv(self._reports(), a)
        emit_csv(self._reports(), b)
        assert a.read_bytes() == b.read_bytes()
        pa, pb = tmp_path / "a.svg", tmp_path / "b.svg"
        emit_plot(self._reports(), pa)
        emit_plot(self._reports(), pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_empty_plot_valid_svg(self, tmp_path):
        out = tmp_path / "empty.svg"
        emit_plot([], out)
        text = out.read_text()
        assert text.startswith("<svg")
        assert text.rstrip().endswith("</svg>")

    def test_quarter_means(self):
        samples = tuple(FpsSample(i * 0.5, float(i)) for i in range(20))
        r = BenchReport("raycast", "approach", {}, samples)
        q = r.quarter_means()
        assert len(q) == 4
        assert q[0] == pytest.approx(np.mean(range(0, 5)))
        assert q[3] == pytest.approx(np.mean(range(15, 20)))


class TestCompareMethods:
    def test_matrix_with_stub_renderer(self, tiny_volume, tmp_path):
        clock = FakeClock(per_frame=0.25)
        reports = compare_methods(
            tiny_volume, duration=2.0, out_dir=tmp_path,
            clock=clock, render_fn=clock.render,
        )
        assert len(reports) == 15  # 5 paths x 3 methods
        summary = (tmp_path / "summary.csv").read_text().strip().split("\n")
        assert len(summary) == 16  # header + 15 rows
        assert (tmp_path / "windows.csv").exists()
        assert (tmp_path / "fps.svg").exists()
