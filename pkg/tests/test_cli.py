import json
import os
import struct
import threading
import time

import numpy as np
import pytest

from voxelglass.cli import main
from voxelglass.config import EngineConfig, dump_config, load_config
from voxelglass.dicom import load_volume_cache

from conftest import make_dcm_bytes


def write_series(directory, count=4, rows=8, cols=8):
    rng = np.random.default_rng(1)
    for i in range(count):
        pixels = rng.integers(0, 4096, rows * cols).astype("<u2")
        raw = make_dcm_bytes(rows=rows, cols=cols, pixels=pixels,
                             position=(0.0, 0.0, float(i) * 2.0),
                             series_uid="1.2.3.4", patient_name="DOE^JANE")
        (directory / f"slice_{i:03d}.dcm").write_bytes(raw)


class TestIngest:
    def test_ingest_directory(self, tmp_path, capsys):
        src = tmp_path / "dicom"
        src.mkdir()
        write_series(src, count=5)
        out = tmp_path / "vol.vxg"
        assert main(["ingest", str(src), "-o", str(out)]) == 0
        vol = load_volume_cache(out)
        assert vol.dims == (8, 8, 5)
        assert "wrote" in capsys.readouterr().out

    def test_ingest_empty_dir_fails(self, tmp_path, capsys):
        src = tmp_path / "empty"
        src.mkdir()
        assert main(["ingest", str(src), "-o", str(tmp_path / "x.vxg")]) == 1
        assert "error:" in capsys.readouterr().err


class TestAnonymizeCmd:
    def test_anonymize_file(self, tmp_path):
        src = tmp_path / "in.dcm"
        src.write_bytes(make_dcm_bytes(patient_name="DOE^JANE"))
        dst = tmp_path / "out.dcm"
        assert main(["anonymize", str(src), str(dst)]) == 0
        from voxelglass.dicom import parse_dicom_file
        ds = parse_dicom_file(dst.read_bytes())
        assert ds.get((0x0010, 0x0010)).value == "ANONYMIZED"


class TestRenderCmd:
    def test_render_phantom_png(self, tmp_path):
        out = tmp_path / "f.png"
        code = main(["render", "--phantom", "--method", "view-aligned",
                     "--out", str(out), "--width", "64", "--height", "64"])
        assert code == 0
        assert out.exists()
        from voxelglass.render import decode_png
        img = decode_png(out.read_bytes())
        assert img.shape == (64, 64, 3)

    def test_render_ppm(self, tmp_path):
        out = tmp_path / "f.ppm"
        assert main(["render", "--phantom", "--method", "raycast", "--out", str(out),
                     "--width", "32", "--height", "32"]) == 0
        data = out.read_bytes()
        assert data.startswith(b"P6\n32 32\n255\n")
        assert len(data) == len(b"P6\n32 32\n255\n") + 32 * 32 * 3

    def test_render_volume_cache(self, tmp_path):
        src = tmp_path / "dicom"
        src.mkdir()
        write_series(src, count=4)
        vol = tmp_path / "v.vxg"
        main(["ingest", str(src), "-o", str(vol)])
        out = tmp_path / "f.png"
        assert main(["render", "--volume", str(vol), "--method", "texture",
                     "--out", str(out), "--width", "32", "--height", "32"]) == 0
        assert out.exists()

    def test_missing_volume_is_error(self, tmp_path, capsys):
        assert main(["render", "--out", str(tmp_path / "f.png")]) == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "\n" == err[err.index("\n"):]  # single line

    def test_unknown_flag_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["render", "--does-not-exist"])
        assert exc.value.code == 2


class TestColormapCheckCmd:
    def test_builtin_names(self, capsys):
        assert main(["colormap-check", "fire"]) == 0
        out = capsys.readouterr().out
        assert "monotone=true" in out
        assert main(["colormap-check", "hsv"]) == 0
        assert "monotone=false" in capsys.readouterr().out

    def test_csv_path(self, tmp_path, capsys):
        from voxelglass.xfer import ColorScheme
        path = tmp_path / "t.csv"
        table = ColorScheme.grayscale().table
        path.write_text("\n".join(f"{r:.6f},{g:.6f},{b:.6f}" for r, g, b in table))
        assert main(["colormap-check", str(path)]) == 0
        assert "monotone=true" in capsys.readouterr().out


class TestConfig:
    def test_round_trip(self, tmp_path):
        cfg = EngineConfig()
        cfg.scheme = "fire"
        cfg.slice_count = 123
        cfg.bench_duration = 2.5
        path = tmp_path / "engine.cfg"
        dump_config(cfg, path)
        back = load_config(path)
        assert back == cfg

    def test_dump_config_command(self, tmp_path):
        out = tmp_path / "out.cfg"
        assert main(["dump-config", str(out)]) == 0
        assert load_config(out) == EngineConfig()

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[render]\nwarp_factor = 9\n")
        with pytest.raises(ValueError):
            load_config(path)

    def test_cli_flag_overrides_config(self, tmp_path):
        cfg = EngineConfig()
        cfg.render_width = 48
        cfg.render_height = 48
        path = tmp_path / "c.cfg"
        dump_config(cfg, path)
        out = tmp_path / "f.png"
        assert main(["--config", str(path), "render", "--phantom",
                     "--out", str(out), "--width", "32"]) == 0
        from voxelglass.render import decode_png
        img = decode_png(out.read_bytes())
        assert img.shape == (48, 32, 3)  # height from config, width from flag

    def test_env_var_config(self, tmp_path, monkeypatch):
        cfg = EngineConfig()
        cfg.scheme = "fire"
        path = tmp_path / "env.cfg"
        dump_config(cfg, path)
        monkeypatch.setenv("VOXELGLASS_CONFIG", str(path))
        out = tmp_path / "f.png"
        assert main(["render", "--phantom", "--out", str(out),
                     "--width", "32", "--height", "32"]) == 0


class TestBenchCmd:
    def test_short_bench_writes_reports(self, tmp_path):
        out_dir = tmp_path / "report"
        code = main(["bench", "--phantom", "--out", str(out_dir),
                     "--duration", "0.5", "--width", "32", "--height", "32"])
        assert code == 0
        summary = (out_dir / "summary.csv").read_text().strip().split("\n")
        assert len(summary) == 16


class TestServeCmd:
    def test_serve_then_hello(self, tmp_path, unused_tcp_ports):
        tcp_port, ws_port = unused_tcp_ports
        t = threading.Thread(
            target=main,
            args=(["serve", "--bind", "127.0.0.1",
                   "--tcp-port", str(tcp_port), "--ws-port", str(ws_port)],),
            daemon=True,
        )
        t.start()
        from voxelglass.sync import TcpSyncClient
        deadline = time.time() + 10
        welcome = None
        while time.time() < deadline:
            try:
                with TcpSyncClient(port=tcp_port, timeout=5) as c:
                    welcome = c.hello(name="smoke")
                    break
            except (ConnectionRefusedError, OSError):
                time.sleep(0.1)
        assert welcome is not None
        assert welcome.payload["id"] >= 1


@pytest.fixture
def unused_tcp_ports():
    import socket
    socks = [socket.socket(), socket.socket()]
    for s in socks:
        s.bind(("127.0.0.1", 0))
    ports = [s.getsockname()[1] for s in socks]
    for s in socks:
        s.close()
    return ports


class TestReplayCmd:
    def test_replay_stream_drives_session(self, tmp_path, unused_tcp_ports):
        from voxelglass.interact import HandFrame, HandPose, format_hand_stream
        from voxelglass.spaces.pose import Pose

        frames = []
        for i in range(6):
            pos = np.array([0.05 * i, 0.0, -0.5])
            right = HandPose(present=True, palm=Pose(np.eye(3), pos),
                             index_tip=pos, grabbing=True)
            frames.append(HandFrame(float(i) * 0.05, HandPose(), right))
        stream = tmp_path / "hands.txt"
        stream.write_text(format_hand_stream(frames))

        tcp_port, ws_port = unused_tcp_ports
        t = threading.Thread(
            target=main,
            args=(["serve", "--bind", "127.0.0.1",
                   "--tcp-port", str(tcp_port), "--ws-port", str(ws_port)],),
            daemon=True,
        )
        t.start()
        deadline = time.time() + 10
        ready = False
        from voxelglass.sync import TcpSyncClient
        while time.time() < deadline and not ready:
            try:
                with TcpSyncClient(port=tcp_port, timeout=5) as probe:
                    probe.hello(name="probe")
                    ready = True
            except (ConnectionRefusedError, OSError):
                time.sleep(0.1)
        assert ready

        code = main(["replay", str(stream), "--port", str(tcp_port), "--fast"])
        assert code == 0

        with TcpSyncClient(port=tcp_port, timeout=5) as c:
            c.hello(name="verify")
            c.send("GET_STATE")
            state = c.recv_type("STATE")
            # one-hand drag of +0.25 m on the corner-anchored default model
            assert state.payload["model"]["t"][0] == pytest.approx(-0.2 + 0.25, abs=1e-6)

        # simulated marker tracking re-anchors at the configured cadence
        code = main(["replay", str(stream), "--port", str(tcp_port), "--fast",
                     "--marker-pose", "0.1,0,-0.5"])
        assert code == 0
        with TcpSyncClient(port=tcp_port, timeout=5) as c:
            c.hello(name="verify2")
            c.send("GET_STATE")
            state = c.recv_type("STATE")
            assert state.payload["marker"]["present"] is True
