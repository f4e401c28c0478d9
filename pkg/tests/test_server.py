import asyncio
import base64
import json
import socket
import struct
import threading
import time

import numpy as np
import pytest

from voxelglass.bench import make_phantom
from voxelglass.render import decode_png
from voxelglass.sync import (
    BindFailure,
    Message,
    ServerConfig,
    SyncServer,
    TcpSyncClient,
    decode_body,
    encode_body,
)


class ServerHarness:
    """Runs a SyncServer on its own event loop thread, free ports."""

    def __init__(self, **cfg_kwargs):
        cfg_kwargs.setdefault("tcp_port", 0)
        cfg_kwargs.setdefault("ws_port", 0)
        self.config = ServerConfig(**cfg_kwargs)
        self.server = None
        self._loop = None
        self._thread = None

    def __enter__(self):
        started = threading.Event()
        self._startup_error = None

        def run():
            self._loop = asyncio.new_event_loop()
            asyncio.set_event_loop(self._loop)
            self.server = SyncServer(self.config)
            try:
                self._loop.run_until_complete(self.server.start())
            except Exception as exc:
                self._startup_error = exc
                started.set()
                return
            started.set()
            self._loop.run_forever()

        self._thread = threading.Thread(target=run, daemon=True)
        self._thread.start()
        if not started.wait(10):
            raise TimeoutError("server did not start")
        if self._startup_error is not None:
            self._thread.join(5)
            raise self._startup_error
        return self

    def __exit__(self, *exc):
        async def shutdown():
            await self.server.stop()

        fut = asyncio.run_coroutine_threadsafe(shutdown(), self._loop)
        fut.result(10)
        self._loop.call_soon_threadsafe(self._loop.stop)
        self._thread.join(10)

    @property
    def tcp_port(self):
        return self.server.tcp_port

    @property
    def ws_port(self):
        return self.server.ws_port


class TestServer:
    def test_hello_welcome_roundtrip(self):
        with ServerHarness() as h:
            with TcpSyncClient(port=h.tcp_port) as c:
                welcome = c.hello(name="tester")
                assert welcome.payload["id"] >= 1
                assert "state" in welcome.payload
                assert welcome.payload["state"]["scheme"]["kind"] == "grayscale"

    def test_two_clients_converge(self):
        with ServerHarness() as h:
            with TcpSyncClient(port=h.tcp_port) as a, TcpSyncClient(port=h.tcp_port) as b:
                a.hello(name="a")
                b.hello(name="b")
                a.send("SET_TRANSFER", scheme={"kind": "fire"})
                a.recv_type("STATE")
                b.recv_type("STATE")
                a.send("GET_STATE")
                b.send("GET_STATE")
                sa = a.recv_type("STATE")
                sb = b.recv_type("STATE")
                assert json.dumps(sa.payload, sort_keys=True) == \
                    json.dumps(sb.payload, sort_keys=True)
                assert sa.payload["scheme"]["kind"] == "fire"

    def test_mutation_broadcast_reaches_other_client(self):
        with ServerHarness() as h:
            with TcpSyncClient(port=h.tcp_port) as a, TcpSyncClient(port=h.tcp_port) as b:
                a.hello()
                b.hello()
                b.send("SET_POSE", model={"t": [0, 0, -2], "r_quat": [1, 0, 0, 0], "s": [1, 1, 1]})
                state = a.recv_type("STATE")
                assert state.payload["model"]["t"] == [0.0, 0.0, -2.0]

    def test_viewer_gets_nack_on_mutation(self):
        with ServerHarness() as h:
            with TcpSyncClient(port=h.tcp_port) as c:
                c.hello(role="viewer")
                c.send("SET_TRANSFER", scheme={"kind": "fire"})
                nack = c.recv_type("NACK")
                assert nack.payload["reason"] == "unauthorized"

    def test_message_before_hello_rejected(self):
        with ServerHarness() as h:
            with TcpSyncClient(port=h.tcp_port) as c:
                c.send("GET_STATE")
                reply = c.recv()
                assert reply.type == "NACK"

    def test_heartbeat_drops_silent_client(self):
        with ServerHarness(heartbeat_timeout=0.4) as h:
            with TcpSyncClient(port=h.tcp_port) as quiet, TcpSyncClient(port=h.tcp_port) as chatty:
                quiet.hello(name="quiet")
                chatty.hello(name="chatty")
                deadline = time.time() + 5
                seen = None
                while time.time() < deadline:
                    chatty.send("PING")
                    msg = chatty.recv()
                    if msg.type == "CLIENT_LIST":
                        names = [c["name"] for c in msg.payload["clients"]]
                        if "quiet" not in names:
                            seen = names
                            break
                    time.sleep(0.05)
                assert seen is not None, "silent client was never dropped"
                assert "chatty" in seen

    def test_seq_monotone_across_broadcasts(self):
        with ServerHarness() as h:
            with TcpSyncClient(port=h.tcp_port) as a:
                a.hello()
                seqs = []
                for i in range(5):
                    a.send("SET_TRANSFER", scheme={"kind": "hsv" if i % 2 else "fire"})
                    seqs.append(a.recv_type("STATE").seq)
                assert seqs == sorted(seqs)
                assert len(set(seqs)) == len(seqs)

    def test_bind_failure(self):
        sock = socket.socket()
        sock.bind(("127.0.0.1", 0))
        sock.listen(1)
        port = sock.getsockname()[1]
        try:
            with pytest.raises(BindFailure):
                with ServerHarness(tcp_port=port):
                    pass
        finally:
            sock.close()

    def test_frame_subscription_delivers_png(self):
        vol = make_phantom(dims=(32, 32, 24))
        with ServerHarness(volume=vol, slice_count=32, step_size=1.0 / 64.0) as h:
            with TcpSyncClient(port=h.tcp_port, timeout=30.0) as c:
                c.hello()
                c.send("SUBSCRIBE_FRAMES", w=64, h=64, max_fps=10)
                c.send("SET_TRANSFER", scheme={"kind": "fire"})
                frame = c.recv_type("FRAME", limit=50)
                img = decode_png(base64.b64decode(frame.payload["png_base64"]))
                assert img.shape == (64, 64, 3)

    def test_frame_seq_monotone(self):
        vol = make_phantom(dims=(32, 32, 24))
        with ServerHarness(volume=vol, slice_count=32, step_size=1.0 / 64.0) as h:
            with TcpSyncClient(port=h.tcp_port, timeout=30.0) as c:
                c.hello()
                c.send("SUBSCRIBE_FRAMES", w=32, h=32, max_fps=20)
                seqs = []
                for i in range(3):
                    c.send("SET_TRANSFER", scheme={"kind": ["fire", "hsv", "grayscale"][i]})
                    frame = c.recv_type("FRAME", limit=100)
                    seqs.append(frame.seq)
                assert seqs == sorted(seqs)

    def test_malformed_frame_gets_nack_not_crash(self):
        with ServerHarness() as h:
            raw = socket.create_connection(("127.0.0.1", h.tcp_port), timeout=5)
            body = encode_body(Message("HELLO", 1, {"name": "x"}))
            raw.sendall(struct.pack(">I", len(body)) + body)
            # WELCOME + CLIENT_LIST arrive; then feed garbage
            raw.sendall(struct.pack(">I", 7) + b"\xde\xad\xbe\xef\x00\x01\x02")
            deadline = time.time() + 5
            buf = b""
            got_nack = False
            raw.settimeout(5)
            while time.time() < deadline and not got_nack:
                try:
                    buf += raw.recv(65536)
                except socket.timeout:
                    break
                while len(buf) >= 4:
                    (ln,) = struct.unpack(">I", buf[:4])
                    if len(buf) < 4 + ln:
                        break
                    msg = decode_body(buf[4:4 + ln])
                    buf = buf[4 + ln:]
                    if msg.type == "NACK":
                        got_nack = True
            raw.close()
            assert got_nack


class TestWebSocketTransport:
    def test_ws_speaks_same_protocol(self):
        import websockets.sync.client as ws_client

        with ServerHarness() as h:
            with ws_client.connect(f"ws://127.0.0.1:{h.ws_port}") as ws:
                ws.send(json.dumps({"type": "HELLO", "seq": 1, "name": "browser"}))
                deadline = time.time() + 5
                welcome = None
                while time.time() < deadline:
                    msg = json.loads(ws.recv(timeout=5))
                    if msg["type"] == "WELCOME":
                        welcome = msg
                        break
                assert welcome is not None
                assert welcome["state"]["scheme"]["kind"] == "grayscale"

    def test_ws_and_tcp_share_state(self):
        import websockets.sync.client as ws_client

        with ServerHarness() as h:
            with TcpSyncClient(port=h.tcp_port) as tcp:
                tcp.hello(name="tcp")
                with ws_client.connect(f"ws://127.0.0.1:{h.ws_port}") as ws:
                    ws.send(json.dumps({"type": "HELLO", "seq": 1, "name": "browser"}))
                    ws.recv(timeout=5)  # WELCOME
                    ws.send(json.dumps({
                        "type": "SET_TRANSFER", "seq": 2, "scheme": {"kind": "cet_l08"},
                    }))
                    state = tcp.recv_type("STATE")
                    assert state.payload["scheme"]["kind"] == "cet_l08"
