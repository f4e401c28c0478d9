"""Multi-user session server: raw-TCP framed clients plus WebSocket clients.

One asyncio event loop owns the authoritative SessionState.  Connection
handlers of both transports feed messages through the same dispatch path
(``handle_message``), broadcasts fan out through bounded per-client queues,
and a heartbeat task drops clients that go silent.  Thin clients can
subscribe to server-rendered frames; each subscriber has exactly one frame
in flight, rendered off the event loop in a worker thread.
"""

from __future__ import annotations

import asyncio
import base64
import dataclasses
import logging
import os
import struct
import time
from dataclasses import dataclass, field
from typing import Optional

import websockets

from ..dicom.volume import VolumeDataset
from ..render import (
    RenderMethod,
    RenderSettings,
    Scene,
    ViewRig,
    encode_png,
    render_view,
)
from ..spaces.marker import PinholeCamera
from ..xfer.colormap import ColorScheme
from ..xfer.transfer import TransferFunction
from .messages import (
    MalformedPayload,
    FrameTooLarge,
    Message,
    decode_body,
    encode,
    encode_body,
)
from .state import (
    BROADCAST,
    SENDER,
    ClientInfo,
    SessionState,
    drop_client,
    handle_message,
    register_client,
)

logger = logging.getLogger(__name__)

DEFAULT_TCP_PORT = 7420
DEFAULT_WS_PORT = 7421


class BindFailure(OSError):
    """Requested ports could not be bound."""


@dataclass
class ServerConfig:
    bind: str = "127.0.0.1"
    tcp_port: int = DEFAULT_TCP_PORT
    ws_port: int = DEFAULT_WS_PORT
    heartbeat_timeout: float = 30.0
    volume: Optional[VolumeDataset] = None
    camera: PinholeCamera = field(default_factory=PinholeCamera.default)
    render_method: RenderMethod = RenderMethod.RAYCAST
    render_workers: int = 1
    slice_count: int = 180
    step_size: float = 1.0 / 256.0

    def __post_init__(self):
        env_bind = os.environ.get("VOXELGLASS_BIND")
        if env_bind:
            self.bind = env_bind


class _Conn:
    """One connected client, transport-agnostic."""

    def __init__(self, info: ClientInfo, send_raw):
        self.info = info
        self.send_raw = send_raw  # async fn(bytes body) for one message body
        self.queue: asyncio.Queue[bytes] = asyncio.Queue(maxsize=64)
        self.frame_task: Optional[asyncio.Task] = None
        self.frame_req: Optional[dict] = None
        self.writer_task: Optional[asyncio.Task] = None
        self.closed = asyncio.Event()

    def enqueue(self, body: bytes, droppable: bool = False) -> None:
        try:
            self.queue.put_nowait(body)
        except asyncio.QueueFull:
            if not droppable:
                self.closed.set()  # slow consumer on state traffic: cut loose


class SyncServer:
    def __init__(self, config: ServerConfig):
        self.config = config
        self.state = SessionState()
        self.conns: dict[int, _Conn] = {}
        self._tcp_server = None
        self._ws_server = None
        self._hb_task = None
        self._started = False

    # -- lifecycle ---------------------------------------------------------

    async def start(self) -> None:
        loop = asyncio.get_running_loop()
        try:
            self._tcp_server = await asyncio.start_server(
                self._tcp_conn, self.config.bind, self.config.tcp_port
            )
            self._ws_server = await websockets.serve(
                self._ws_conn, self.config.bind, self.config.ws_port,
                max_size=16 * 1024 * 1024,
            )
        except OSError as exc:
            await self.stop()
            raise BindFailure(f"cannot bind {self.config.bind}: {exc}") from exc
        self._hb_task = loop.create_task(self._heartbeat_loop())
        self._started = True
        logger.info(
            "sync server on tcp://%s:%d and ws://%s:%d",
            self.config.bind, self.tcp_port, self.config.bind, self.ws_port,
        )

    @property
    def tcp_port(self) -> int:
        return self._tcp_server.sockets[0].getsockname()[1]

    @property
    def ws_port(self) -> int:
        for sock in self._ws_server.sockets:
            return sock.getsockname()[1]
        raise RuntimeError("websocket server has no sockets")

    async def stop(self) -> None:
        if self._hb_task:
            self._hb_task.cancel()
        for conn in list(self.conns.values()):
            conn.closed.set()
            if conn.frame_task:
                conn.frame_task.cancel()
            if conn.writer_task:
                conn.writer_task.cancel()
        self.conns.clear()
        if self._tcp_server is not None:
            self._tcp_server.close()
            await self._tcp_server.wait_closed()
        if self._ws_server is not None:
            self._ws_server.close()
            await self._ws_server.wait_closed()

    # -- shared dispatch ---------------------------------------------------

    def _fanout(self, sender_id: int, outbound: list) -> None:
        for target, msg in outbound:
            body = encode_body(msg)
            droppable = msg.type == "FRAME"
            if target == BROADCAST:
                for conn in self.conns.values():
                    conn.enqueue(body, droppable)
            else:
                cid = sender_id if target == SENDER else target
                conn = self.conns.get(cid)
                if conn is not None:
                    conn.enqueue(body, droppable)

    def _dispatch(self, conn: _Conn, msg: Message) -> None:
        info = self.state.client(conn.info.id)
        if info is None:
            conn.enqueue(encode_body(Message("NACK", 0, {"reason": "not-registered"})))
            return
        self.state, outbound = handle_message(
            self.state, info, msg, camera=self.config.camera, now=time.monotonic()
        )
        conn.info = self.state.client(conn.info.id) or conn.info
        if msg.type == "SUBSCRIBE_FRAMES" and not any(
            t == SENDER and m.type == "NACK" for t, m in outbound
        ):
            conn.frame_req = dict(msg.payload)
            if conn.frame_task is None or conn.frame_task.done():
                conn.frame_task = asyncio.get_running_loop().create_task(self._frame_loop(conn))
        self._fanout(conn.info.id, outbound)

    async def _register(self, hello: Message, send_raw) -> Optional[_Conn]:
        if hello.type != "HELLO":
            await send_raw(encode_body(Message("NACK", 0, {"reason": "expected-HELLO"})))
            return None
        name = str(hello.payload.get("name", ""))
        role = str(hello.payload.get("role", "controller"))
        self.state, info, outbound = register_client(self.state, name, role, time.monotonic())
        info = dataclasses.replace(info, last_seq=hello.seq)
        self.state = dataclasses.replace(
            self.state,
            clients=tuple(info if c.id == info.id else c for c in self.state.clients),
        )
        conn = _Conn(info, send_raw)
        self.conns[info.id] = conn
        conn.writer_task = asyncio.get_running_loop().create_task(self._writer_loop(conn))
        self._fanout(info.id, outbound)
        return conn

    async def _unregister(self, conn: _Conn) -> None:
        conn.closed.set()
        self.conns.pop(conn.info.id, None)
        self.state, outbound = drop_client(self.state, conn.info.id)
        self._fanout(conn.info.id, outbound)
        if conn.frame_task:
            conn.frame_task.cancel()
        if conn.writer_task:
            conn.writer_task.cancel()

    # -- transports --------------------------------------------------------

    async def _tcp_conn(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        async def send_raw(body: bytes):
            writer.write(struct.pack(">I", len(body)) + body)
            await writer.drain()

        conn = None
        try:
            first = await self._read_tcp_frame(reader)
            if first is None:
                return
            conn = await self._register(first, send_raw)
            if conn is None:
                return
            # Keep consuming inbound frames until EOF even if our writes to
            # this client start failing: whatever it managed to send still
            # counts toward the shared state.
            while True:
                msg = await self._read_tcp_frame(reader)
                if msg is None:
                    break
                self._dispatch(conn, msg)
        except (MalformedPayload, FrameTooLarge) as exc:
            # tell the client what happened before dropping the connection
            try:
                await send_raw(encode_body(Message("NACK", 0, {"reason": f"frame:{exc}"})))
            except (ConnectionError, OSError):
                pass
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            if conn is not None:
                await self._unregister(conn)
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionError, OSError):
                pass

    async def _read_tcp_frame(self, reader: asyncio.StreamReader) -> Optional[Message]:
        try:
            header = await reader.readexactly(4)
        except (asyncio.IncompleteReadError, ConnectionError):
            return None
        (length,) = struct.unpack(">I", header)
        if length > 16 * 1024 * 1024:
            raise FrameTooLarge(f"declared length {length}")
        body = await reader.readexactly(length)
        return decode_body(body)

    async def _ws_conn(self, socket) -> None:
        async def send_raw(body: bytes):
            await socket.send(body.decode("utf-8"))

        conn = None
        try:
            raw = await socket.recv()
            first = decode_body(raw.encode("utf-8") if isinstance(raw, str) else raw)
            conn = await self._register(first, send_raw)
            if conn is None:
                return
            async for raw in socket:
                try:
                    msg = decode_body(raw.encode("utf-8") if isinstance(raw, str) else raw)
                except (MalformedPayload, FrameTooLarge) as exc:
                    conn.enqueue(encode_body(Message("NACK", 0, {"reason": f"frame:{exc}"})))
                    continue
                self._dispatch(conn, msg)
        except (MalformedPayload, FrameTooLarge):
            pass
        except websockets.ConnectionClosed:
            pass
        finally:
            if conn is not None:
                await self._unregister(conn)

    async def _writer_loop(self, conn: _Conn) -> None:
        try:
            while not conn.closed.is_set():
                body = await conn.queue.get()
                await conn.send_raw(body)
        except (ConnectionError, websockets.ConnectionClosed, OSError):
            conn.closed.set()
        except asyncio.CancelledError:
            pass

    # -- background tasks ---------------------------------------------------

    async def _heartbeat_loop(self) -> None:
        try:
            while True:
                await asyncio.sleep(max(self.config.heartbeat_timeout / 4.0, 0.05))
                cutoff = time.monotonic() - self.config.heartbeat_timeout
                for conn in list(self.conns.values()):
                    if conn.info.id not in {c.id for c in self.state.clients}:
                        continue
                    latest = self.state.client(conn.info.id)
                    if latest and latest.last_seen < cutoff:
                        logger.info("dropping silent client %d", conn.info.id)
                        await self._unregister(conn)
        except asyncio.CancelledError:
            pass

    def _build_scene(self, state: SessionState, width: int, height: int) -> Scene:
        tf = TransferFunction(
            window=state.window,
            scheme=ColorScheme.by_name(state.scheme_kind),
            opacity=state.opacity,
        )
        settings = RenderSettings(
            method=self.config.render_method,
            resolution=(width, height),
            slice_count=self.config.slice_count,
            step_size=self.config.step_size,
            workers=self.config.render_workers,
        )
        rig = ViewRig.stereo((0.0, 0.0, 0.0), (0.0, 0.0, -1.5), aspect=width / height)
        scene = Scene(
            volume=self.config.volume,
            tf=tf,
            model=state.model,
            cut=state.cut,
            rig=rig,
            settings=settings,
        )
        return scene.with_model(scene.anchored_model(state.marker2world))

    async def _frame_loop(self, conn: _Conn) -> None:
        """Render and push frames to one subscriber, one in flight, paced."""
        loop = asyncio.get_running_loop()
        last_seq = -1
        try:
            while not conn.closed.is_set():
                req = conn.frame_req or {}
                max_fps = float(req.get("max_fps", 5.0))
                tick = 1.0 / max(max_fps, 0.1)
                state = self.state
                if self.config.volume is None:
                    await asyncio.sleep(tick)
                    continue
                if state.seq == last_seq:
                    await asyncio.sleep(tick / 2.0)
                    continue
                width, height = int(req.get("w", 256)), int(req.get("h", 256))
                scene = self._build_scene(state, width, height)
                started = time.monotonic()
                png = await loop.run_in_executor(None, _render_png, scene)
                last_seq = state.seq
                conn.enqueue(
                    encode_body(Message("FRAME", state.seq, {"png_base64": png})),
                    droppable=True,
                )
                elapsed = time.monotonic() - started
                await asyncio.sleep(max(tick - elapsed, 0.0))
        except asyncio.CancelledError:
            pass
        except Exception:
            logger.exception("frame loop for client %d died", conn.info.id)


def _render_png(scene: Scene) -> str:
    fb = render_view(scene, "left")
    return base64.b64encode(encode_png(fb)).decode("ascii")


async def serve(config: ServerConfig) -> SyncServer:
    """Start a server; caller owns the event loop."""
    server = SyncServer(config)
    await server.start()
    return server
