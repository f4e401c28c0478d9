"""voxelglass command line: ingest, anonymize, render, bench, serve,
colormap-check, replay, dump-config.

Errors exit 1 with a single machine-parsable line on stderr
(``error: <Kind>: <detail>``); usage problems exit 2.
"""

from __future__ import annotations

import argparse
import asyncio
import os
import sys
import time

import numpy as np


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="voxelglass",
        description="Headless DICOM volume viewer: renderer, sync server, benchmarks.",
    )
    ap.add_argument("--config", default=None, help="engine config file (or $VOXELGLASS_CONFIG)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a directory of .dcm slices into a volume cache")
    p.add_argument("directory")
    p.add_argument("-o", "--out", required=True, help="output .vxg volume cache")
    p.add_argument("--anonymize", action="store_true",
                   help="apply the default anonymization policy while ingesting")

    p = sub.add_parser("anonymize", help="strip identifying tags from one DICOM file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--policy", default=None, help="policy file (default: bundled policy)")

    p = sub.add_parser("render", help="render one frame from a volume")
    p.add_argument("--volume", default=None, help=".vxg volume cache")
    p.add_argument("--phantom", action="store_true", help="render the built-in phantom")
    p.add_argument("--method", default=None, choices=["raycast", "view-aligned", "texture"])
    p.add_argument("--out", required=True, help="output image (.png or .ppm)")
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--scheme", default=None,
                   choices=["grayscale", "hsv", "fire", "cet_l08"])
    p.add_argument("--distance", type=float, default=None, help="camera distance in meters")
    p.add_argument("--clahe", default=None, metavar="BX,BY,BZ:CLIP",
                   help="preprocess with 3D CLAHE, e.g. 8,8,8:3.0")

    p = sub.add_parser("bench", help="run the scripted-path frame-rate benchmark matrix")
    p.add_argument("--volume", default=None)
    p.add_argument("--phantom", action="store_true")
    p.add_argument("--methods", default="all", choices=["all"])
    p.add_argument("--out", required=True, help="report directory")
    p.add_argument("--duration", type=float, default=None, help="seconds per path")
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)

    p = sub.add_parser("serve", help="run the multi-user session server")
    p.add_argument("--volume", default=None)
    p.add_argument("--phantom", action="store_true")
    p.add_argument("--bind", default=None)
    p.add_argument("--tcp-port", type=int, default=None)
    p.add_argument("--ws-port", type=int, default=None)

    p = sub.add_parser("colormap-check", help="validate perceptual lightness of a colormap")
    p.add_argument("asset", help="bundled name (grayscale|hsv|fire|cet_l08) or a CSV path")

    p = sub.add_parser("replay", help="replay a hand stream into a live session")
    p.add_argument("stream", help="hand stream file")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--tool", default="manipulate", choices=["manipulate", "cut_plane"])
    p.add_argument("--canvas", action="store_true", help="sketch on the default canvas")
    p.add_argument("--export-mask", default=None, help="write the stroke mask PNG here")
    p.add_argument("--fast", action="store_true", help="do not pace by timestamps")
    p.add_argument("--marker-pose", default=None, metavar="X,Y,Z",
                   help="simulated tracking: re-anchor a marker at this position "
                        "every [marker] cadence frames")

    p = sub.add_parser("dump-config", help="write the effective config to a file")
    p.add_argument("out")

    return ap


def _load_cfg(args):
    from .config import EngineConfig, default_config_path, load_config

    path = args.config or default_config_path()
    return load_config(path) if path else EngineConfig()


def _load_volume(args, cfg):
    from .bench import make_phantom
    from .dicom import load_volume_cache

    if getattr(args, "phantom", False):
        return make_phantom()
    path = getattr(args, "volume", None) or cfg.volume_path
    if not path:
        raise ValueError("no volume given: pass --volume, --phantom, or set [volume] path")
    return load_volume_cache(path)


def _transfer_from_cfg(cfg, scheme=None):
    from .config import parse_opacity_points
    from .xfer import ColorScheme, OpacityCurve, TransferFunction, WindowParams

    return TransferFunction(
        window=WindowParams(cfg.window_base, cfg.window_brightness, cfg.window_contrast),
        scheme=ColorScheme.by_name(scheme or cfg.scheme),
        opacity=OpacityCurve(parse_opacity_points(cfg.opacity_points)),
    )


def _cmd_ingest(args, cfg) -> int:
    from .dicom import (anonymize, default_policy, assemble_volume,
                        parse_dicom_file, save_volume_cache, slice_from_dataset)
    from .dicom.parser import TAG_RESCALE_INTERCEPT, TAG_RESCALE_SLOPE, TAG_SERIES_UID

    names = sorted(
        f for f in os.listdir(args.directory) if f.lower().endswith(".dcm")
    )
    if not names:
        raise FileNotFoundError(f"no .dcm files in {args.directory}")
    policy = default_policy() if args.anonymize else None
    series: dict[str, list] = {}
    rescale_seen = False
    for name in names:
        with open(os.path.join(args.directory, name), "rb") as fh:
            ds = parse_dicom_file(fh.read())
        if policy is not None:
            ds = anonymize(ds, policy)
        if ds.get(TAG_RESCALE_SLOPE) or ds.get(TAG_RESCALE_INTERCEPT):
            rescale_seen = True
        uid_el = ds.get(TAG_SERIES_UID)
        uid = uid_el.value if uid_el is not None else ""
        series.setdefault(uid, []).append(slice_from_dataset(ds))
    if rescale_seen:
        print("note: RescaleSlope/Intercept present; stored values ingested as-is",
              file=sys.stderr)
    # One directory is one series unless UIDs split it; take the largest group.
    best = max(series.values(), key=len)
    if len(series) > 1:
        print(f"note: {len(series)} series found, assembling the largest "
              f"({len(best)} slices)", file=sys.stderr)
    volume = assemble_volume(best)
    save_volume_cache(volume, args.out)
    nx, ny, nz = volume.dims
    print(f"wrote {args.out}: {nx}x{ny}x{nz} voxels, "
          f"value range {volume.value_range[0]}..{volume.value_range[1]}")
    return 0


def _cmd_anonymize(args, cfg) -> int:
    from .dicom import AnonymizePolicy, anonymize, default_policy, parse_dicom_file
    from .dicom.parser import serialize_dataset

    with open(args.input, "rb") as fh:
        ds = parse_dicom_file(fh.read())
    policy = AnonymizePolicy.load(args.policy) if args.policy else default_policy()
    out = anonymize(ds, policy)
    with open(args.output, "wb") as fh:
        fh.write(serialize_dataset(out))
    print(f"wrote {args.output} ({len(out)} elements)")
    return 0


def _cmd_render(args, cfg) -> int:
    from .bench import desk_scale
    from .render import (RenderMethod, RenderSettings, Scene, ViewRig,
                         render_view, write_png, write_ppm)
    from .spaces.model import ModelTransform
    from .xfer import ClaheParams, clahe3d

    volume = _load_volume(args, cfg)
    if args.clahe:
        blocks_txt, _, clip_txt = args.clahe.partition(":")
        blocks = tuple(int(v) for v in blocks_txt.split(","))
        volume = clahe3d(volume, ClaheParams(blocks=blocks, clip_limit=float(clip_txt or 4.0)))
    method = {"raycast": RenderMethod.RAYCAST, "view-aligned": RenderMethod.VIEW_ALIGNED,
              "texture": RenderMethod.TEXTURE_BASED}[args.method or cfg.method]
    width = args.width or cfg.render_width
    height = args.height or cfg.render_height
    distance = args.distance or cfg.distance
    settings = RenderSettings(
        method=method, resolution=(width, height), slice_count=cfg.slice_count,
        step_size=cfg.step_size, workers=cfg.workers,
    )
    scene = Scene(
        volume=volume,
        tf=_transfer_from_cfg(cfg, args.scheme),
        model=ModelTransform.centered(scale=desk_scale(volume), center=(0, 0, -distance)),
        rig=ViewRig.stereo((0, 0, 0), (0, 0, -distance), baseline=cfg.baseline,
                           fov_y_deg=cfg.fov_y_deg, aspect=width / height,
                           near=cfg.near, far=cfg.far),
        settings=settings,
    )
    fb = render_view(scene, "left")
    if args.out.lower().endswith(".ppm"):
        write_ppm(fb, args.out)
    else:
        write_png(fb, args.out)
    print(f"wrote {args.out} ({width}x{height}, {method.value})")
    return 0


def _cmd_bench(args, cfg) -> int:
    from .bench import compare_methods

    volume = _load_volume(args, cfg)
    width = args.width or cfg.bench_width
    height = args.height or cfg.bench_height
    duration = args.duration or cfg.bench_duration
    reports = compare_methods(
        volume,
        resolution=(width, height),
        duration=duration,
        out_dir=args.out,
        workers=cfg.workers,
        progress=lambda label: print(f"bench: {label}", file=sys.stderr),
    )
    for r in reports:
        print(f"{r.method:14s} {r.path:24s} mean={r.mean_fps:7.2f} fps "
              f"min={r.min_fps:6.2f} max={r.max_fps:7.2f}")
    print(f"wrote {args.out}/windows.csv, summary.csv, fps.svg")
    return 0


def _cmd_serve(args, cfg) -> int:
    from .spaces.marker import PinholeCamera
    from .render import RenderMethod
    from .sync import ServerConfig, serve

    volume = None
    if args.phantom or args.volume or cfg.volume_path:
        volume = _load_volume(args, cfg)
    method = {"raycast": RenderMethod.RAYCAST, "view-aligned": RenderMethod.VIEW_ALIGNED,
              "texture": RenderMethod.TEXTURE_BASED}[cfg.method]
    server_cfg = ServerConfig(
        bind=args.bind or cfg.bind,
        tcp_port=args.tcp_port if args.tcp_port is not None else cfg.tcp_port,
        ws_port=args.ws_port if args.ws_port is not None else cfg.ws_port,
        heartbeat_timeout=cfg.heartbeat_timeout,
        volume=volume,
        camera=PinholeCamera(cfg.cam_fx, cfg.cam_fy, cfg.cam_cx, cfg.cam_cy,
                             cfg.cam_width, cfg.cam_height),
        render_method=method,
        render_workers=cfg.workers,
    )

    async def _run():
        server = await serve(server_cfg)
        print(f"listening on tcp://{server_cfg.bind}:{server.tcp_port} "
              f"and ws://{server_cfg.bind}:{server.ws_port}", flush=True)
        try:
            await asyncio.Event().wait()
        finally:
            await server.stop()

    try:
        asyncio.run(_run())
    except KeyboardInterrupt:
        pass
    return 0


def _cmd_colormap_check(args, cfg) -> int:
    from .xfer import ColorScheme, validate_lightness

    if os.path.exists(args.asset):
        scheme = ColorScheme.from_file(args.asset)
    else:
        scheme = ColorScheme.by_name(args.asset)
    print(validate_lightness(scheme))
    return 0


def _cmd_replay(args, cfg) -> int:
    from .interact import (PlaneCanvas, PressureMap, GestureState, Tool,
                           parse_hand_stream, render_annotation_mask, sketch_step,
                           update_gesture)
    from .render import write_png
    from .render.scene import CutPlane
    from .spaces.model import ModelTransform
    from .spaces.pose import matrix_to_quat
    from .sync import TcpSyncClient

    with open(args.stream, "r", encoding="utf-8") as fh:
        frames = parse_hand_stream(fh.read())
    if not frames:
        raise ValueError("hand stream is empty")

    tool = Tool.MANIPULATE if args.tool == "manipulate" else Tool.CUT_PLANE
    pm = PressureMap(cfg.pressure_width_min, cfg.pressure_width_max,
                     cfg.pressure_depth_max, cfg.touch_radius)
    canvas = PlaneCanvas(plane_point=(0.0, 0.0, -0.5)) if args.canvas else None

    marker_pos = None
    if args.marker_pose:
        marker_pos = [float(v) for v in args.marker_pose.split(",")]
        if len(marker_pos) != 3:
            raise ValueError("--marker-pose expects X,Y,Z")

    client = TcpSyncClient(args.host, args.port or cfg.tcp_port)
    with client:
        client.hello(name="replay", role="controller")
        state = GestureState()
        model = ModelTransform.centered(scale=0.4, center=(0.0, 0.0, -1.5))
        cut = CutPlane()
        stroke = None
        prev_t = frames[0].timestamp
        sent = 0
        for frame_index, frame in enumerate(frames):
            if not args.fast:
                time.sleep(max(frame.timestamp - prev_t, 0.0))
            prev_t = frame.timestamp
            if marker_pos is not None and frame_index % max(cfg.marker_cadence, 1) == 0:
                client.send("SET_MARKER",
                            pose={"t": marker_pos, "r_quat": [1.0, 0.0, 0.0, 0.0]})
                sent += 1
            state, new_model, new_cut = update_gesture(
                state, model, cut, frame, sensitivity=cfg.sensitivity, tool=tool
            )
            if new_model is not model and not np.allclose(new_model.as_matrix(), model.as_matrix()):
                client.send("SET_POSE", model={
                    "t": [float(v) for v in new_model.translation],
                    "r_quat": [float(v) for v in matrix_to_quat(new_model.rotation)],
                    "s": [float(v) for v in new_model.scale],
                })
                sent += 1
            if new_cut is not cut and new_cut.enabled:
                client.send("SET_CUT_PLANE", cut={
                    "enabled": True,
                    "point": [float(v) for v in new_cut.point],
                    "normal": [float(v) for v in new_cut.normal],
                })
                sent += 1
            model, cut = new_model, new_cut
            if canvas is not None:
                tip = frame.right.index_tip if frame.right.present else frame.left.index_tip
                prev_stroke = stroke
                stroke = sketch_step(canvas, tip, pm, stroke)
                if prev_stroke is not None and stroke is None and prev_stroke.points:
                    client.send("ANNOTATE_STROKE",
                                points=[[float(u), float(v), float(w)] for u, v, w in prev_stroke.points],
                                color=list(prev_stroke.color))
                    sent += 1
        if canvas is not None and stroke is not None and stroke.points:
            client.send("ANNOTATE_STROKE",
                        points=[[float(u), float(v), float(w)] for u, v, w in stroke.points],
                        color=list(stroke.color))
            sent += 1
        # read barrier: everything sent above is processed before we hang up
        client.send("PING")
        client.recv_type("PONG", limit=100000)
        print(f"replayed {len(frames)} frames, sent {sent} messages")
        if args.export_mask and canvas is not None:
            mask = render_annotation_mask(canvas)
            write_png((mask[..., :3] * mask[..., 3:4]), args.export_mask)
            print(f"wrote {args.export_mask}")
    return 0


def _cmd_dump_config(args, cfg) -> int:
    from .config import dump_config

    dump_config(cfg, args.out)
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "anonymize": _cmd_anonymize,
    "render": _cmd_render,
    "bench": _cmd_bench,
    "serve": _cmd_serve,
    "colormap-check": _cmd_colormap_check,
    "replay": _cmd_replay,
    "dump-config": _cmd_dump_config,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_cfg(args)
        return _COMMANDS[args.command](args, cfg)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # surface module errors verbatim, one line
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
