"""Blocking TCP client: used by the replay CLI and the integration tests."""

from __future__ import annotations

import socket
import struct
from typing import Optional

from .messages import Message, decode_body, encode_body


class TcpSyncClient:
    def __init__(self, host: str = "127.0.0.1", port: int = 7420, timeout: float = 10.0):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self.sock.settimeout(timeout)
        self._seq = 0
        self.client_id: Optional[int] = None

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def send(self, mtype: str, **payload) -> int:
        self._seq += 1
        body = encode_body(Message(mtype, self._seq, payload))
        self.sock.sendall(struct.pack(">I", len(body)) + body)
        return self._seq

    def recv(self) -> Message:
        header = self._read_exact(4)
        (length,) = struct.unpack(">I", header)
        return decode_body(self._read_exact(length))

    def recv_type(self, mtype: str, limit: int = 200) -> Message:
        """Read until a message of the wanted type arrives."""
        for _ in range(limit):
            msg = self.recv()
            if msg.type == mtype:
                return msg
        raise TimeoutError(f"no {mtype} within {limit} messages")

    def hello(self, name: str = "", role: str = "controller") -> Message:
        self.send("HELLO", name=name, role=role)
        welcome = self.recv_type("WELCOME")
        self.client_id = welcome.payload["id"]
        return welcome

    def _read_exact(self, n: int) -> bytes:
        buf = b""
        while len(buf) < n:
            chunk = self.sock.recv(n - len(buf))
            if not chunk:
                raise ConnectionError("server closed the connection")
            buf += chunk
        return buf
