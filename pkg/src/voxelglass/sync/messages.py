"""Wire protocol: length-prefixed JSON frames.

Every message is a JSON object ``{"type": <string>, "seq": <int>, ...}``
whose remaining keys form the type-specific payload.  Over TCP each frame is
a 4-byte big-endian byte length followed by the UTF-8 body; over WebSocket
the same bodies travel as text frames.  Frames are capped at 16 MiB.

Decoding only checks the envelope, so arbitrary bytes can never crash the
server; per-type payload schemas are enforced where messages are handled
(bad payloads earn a NACK, not an exception).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

MAX_FRAME_BYTES = 16 * 1024 * 1024

MESSAGE_TYPES = frozenset(
    {
        "HELLO", "WELCOME", "GET_STATE", "STATE",
        "SET_POSE", "SET_CUT_PLANE", "SET_TRANSFER", "ANNOTATE_STROKE",
        "SET_MARKER", "SUBSCRIBE_FRAMES", "FRAME", "RESET",
        "NACK", "PING", "PONG", "CLIENT_LIST",
    }
)

MUTATING_TYPES = frozenset(
    {"SET_POSE", "SET_CUT_PLANE", "SET_TRANSFER", "ANNOTATE_STROKE", "SET_MARKER", "RESET"}
)


class FrameTooLarge(ValueError):
    """Frame length exceeds the 16 MiB cap."""


class MalformedPayload(ValueError):
    """Bytes do not parse into a valid message envelope."""


@dataclass(frozen=True)
class Message:
    type: str
    seq: int = 0
    payload: dict = field(default_factory=dict)


def encode_body(msg: Message) -> bytes:
    body = {"type": msg.type, "seq": msg.seq, **msg.payload}
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")


def encode(msg: Message) -> bytes:
    body = encode_body(msg)
    if len(body) > MAX_FRAME_BYTES:
        raise FrameTooLarge(f"frame of {len(body)} bytes exceeds {MAX_FRAME_BYTES}")
    return struct.pack(">I", len(body)) + body


def decode_body(body: bytes) -> Message:
    if len(body) > MAX_FRAME_BYTES:
        raise FrameTooLarge(f"frame of {len(body)} bytes exceeds {MAX_FRAME_BYTES}")
    try:
        obj = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedPayload(f"not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedPayload("message body must be a JSON object")
    mtype = obj.pop("type", None)
    if not isinstance(mtype, str):
        raise MalformedPayload("missing or non-string 'type'")
    seq = obj.pop("seq", 0)
    if not isinstance(seq, int) or isinstance(seq, bool):
        raise MalformedPayload("'seq' must be an integer")
    return Message(mtype, seq, obj)


def decode(frame: bytes) -> Message:
    """Decode one complete length-prefixed frame."""
    if len(frame) < 4:
        raise MalformedPayload("frame shorter than its length prefix")
    (length,) = struct.unpack(">I", frame[:4])
    if length > MAX_FRAME_BYTES:
        raise FrameTooLarge(f"declared length {length} exceeds {MAX_FRAME_BYTES}")
    if len(frame) - 4 != length:
        raise MalformedPayload(f"declared length {length}, got {len(frame) - 4} bytes")
    return decode_body(frame[4:])


def _is_vec(v, n) -> bool:
    return (
        isinstance(v, (list, tuple))
        and len(v) == n
        and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)
    )


def _check_pose_dict(p) -> bool:
    return isinstance(p, dict) and _is_vec(p.get("t"), 3) and _is_vec(p.get("r_quat"), 4)


def _check_model(m) -> bool:
    return _check_pose_dict(m) and _is_vec(m.get("s"), 3) and all(x > 0 for x in m["s"])


def _check_points(pts, width) -> bool:
    return isinstance(pts, list) and all(_is_vec(p, width) for p in pts)


def validate_payload(msg: Message) -> None:
    """Raise MalformedPayload when a known type's payload is off-schema."""
    p = msg.payload
    t = msg.type
    if t == "HELLO":
        if not isinstance(p.get("name", ""), str):
            raise MalformedPayload("HELLO.name must be a string")
        if p.get("role", "controller") not in ("controller", "viewer"):
            raise MalformedPayload("HELLO.role must be controller|viewer")
    elif t == "SET_POSE":
        if not _check_model(p.get("model")):
            raise MalformedPayload("SET_POSE.model needs t[3], r_quat[4], s[3]>0")
    elif t == "SET_CUT_PLANE":
        c = p.get("cut")
        if not (
            isinstance(c, dict)
            and isinstance(c.get("enabled"), bool)
            and _is_vec(c.get("point"), 3)
            and _is_vec(c.get("normal"), 3)
        ):
            raise MalformedPayload("SET_CUT_PLANE.cut needs enabled, point[3], normal[3]")
        if c["enabled"] and all(abs(x) < 1e-12 for x in c["normal"]):
            raise MalformedPayload("cut normal must be nonzero")
    elif t == "SET_TRANSFER":
        if not any(k in p for k in ("window", "scheme", "opacity")):
            raise MalformedPayload("SET_TRANSFER needs window, scheme, or opacity")
        w = p.get("window")
        if w is not None and not (
            isinstance(w, dict)
            and isinstance(w.get("base"), (int, float))
            and isinstance(w.get("brightness"), (int, float))
            and isinstance(w.get("contrast"), (int, float))
            and 0 <= w["base"] < 1
            and -1 <= w["brightness"] <= 1
            and w["contrast"] > 0
        ):
            raise MalformedPayload("SET_TRANSFER.window needs base in [0,1), brightness in [-1,1], contrast > 0")
        s = p.get("scheme")
        if s is not None and not (isinstance(s, dict) and isinstance(s.get("kind"), str)):
            raise MalformedPayload("SET_TRANSFER.scheme needs kind")
        o = p.get("opacity")
        if o is not None:
            pts = o.get("points") if isinstance(o, dict) else None
            if not (_check_points(pts, 2) and len(pts) >= 1):
                raise MalformedPayload("SET_TRANSFER.opacity needs points [[x, a], ...]")
            xs = [q[0] for q in pts]
            if any(b <= a for a, b in zip(xs, xs[1:])) or any(not 0 <= q[1] <= 1 for q in pts):
                raise MalformedPayload("opacity points must have increasing x and a in [0,1]")
    elif t == "ANNOTATE_STROKE":
        if not (_check_points(p.get("points"), 3) and len(p.get("points", [])) >= 1):
            raise MalformedPayload("ANNOTATE_STROKE.points needs [[u, v, width], ...]")
        if not _is_vec(p.get("color", [1, 0, 0, 1]), 4):
            raise MalformedPayload("ANNOTATE_STROKE.color must be rgba[4]")
    elif t == "SET_MARKER":
        pose = p.get("pose")
        obs = p.get("observation")
        if pose is None and obs is None:
            raise MalformedPayload("SET_MARKER needs pose or observation")
        if pose is not None and not _check_pose_dict(pose):
            raise MalformedPayload("SET_MARKER.pose needs t[3], r_quat[4]")
        if obs is not None and not (
            isinstance(obs, dict)
            and isinstance(obs.get("marker_size"), (int, float))
            and obs["marker_size"] > 0
            and _check_points(obs.get("corners"), 2)
            and len(obs.get("corners", [])) == 4
        ):
            raise MalformedPayload("SET_MARKER.observation needs marker_size and corners[4][2]")
        if p.get("sensor") is not None and not _check_pose_dict(p["sensor"]):
            raise MalformedPayload("SET_MARKER.sensor needs t[3], r_quat[4]")
    elif t == "SUBSCRIBE_FRAMES":
        if not (
            isinstance(p.get("w"), int) and isinstance(p.get("h"), int)
            and 16 <= p["w"] <= 1024 and 16 <= p["h"] <= 1024
        ):
            raise MalformedPayload("SUBSCRIBE_FRAMES needs integer w, h in [16, 1024]")
        fps = p.get("max_fps", 5.0)
        if not (isinstance(fps, (int, float)) and 0 < fps <= 60):
            raise MalformedPayload("SUBSCRIBE_FRAMES.max_fps must be in (0, 60]")
    elif t in ("GET_STATE", "RESET", "PING", "PONG"):
        pass  # no required fields
    # Server-originated types (WELCOME/STATE/FRAME/NACK/CLIENT_LIST) are not
    # validated on receipt; clients treat them as trusted.
