"""Authoritative session state and the pure message-handling core.

``handle_message`` is a pure function (state, client, message) -> (state,
outbound) so that replaying a recorded message log against a fresh state
always reproduces the same result.  Mutations apply last-writer-wins per
field group (pose, cut plane, transfer, marker), bump the state sequence
number, and broadcast a full STATE snapshot; reads return the snapshot to
the sender only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..render.scene import CutPlane
from ..spaces.marker import MarkerObservation, PinholeCamera, estimate_marker_pose
from ..spaces.model import ModelTransform
from ..spaces.pose import Pose, compose, matrix_to_quat, slerp_blend
from ..xfer.opacity import OpacityCurve
from ..xfer.window import WindowParams
from .messages import MESSAGE_TYPES, MUTATING_TYPES, MalformedPayload, Message, validate_payload

BROADCAST = "broadcast"
SENDER = "sender"

MARKER_BLEND_WEIGHT = 0.3


class Role(enum.Enum):
    VIEWER = "viewer"
    CONTROLLER = "controller"


@dataclass(frozen=True)
class ClientInfo:
    id: int
    role: Role = Role.CONTROLLER
    name: str = ""
    last_seen: float = 0.0
    last_seq: int = 0


def _default_model() -> ModelTransform:
    return ModelTransform.centered(scale=0.4, center=(0.0, 0.0, -0.8))


@dataclass(frozen=True)
class SessionState:
    seq: int = 0
    model: ModelTransform = field(default_factory=_default_model)
    cut: CutPlane = field(default_factory=CutPlane)
    window: WindowParams = field(default_factory=WindowParams)
    scheme_kind: str = "grayscale"
    opacity: OpacityCurve = field(default_factory=OpacityCurve)
    marker2world: Optional[Pose] = None
    strokes: tuple = ()
    clients: tuple = ()  # ClientInfo, ordered by id
    next_client_id: int = 1

    def client(self, client_id: int) -> Optional[ClientInfo]:
        for c in self.clients:
            if c.id == client_id:
                return c
        return None

    def to_payload(self) -> dict:
        """Canonical JSON-ready snapshot (the STATE message body)."""
        marker = {"present": self.marker2world is not None}
        if self.marker2world is not None:
            marker["pose"] = {
                "t": [float(x) for x in self.marker2world.translation],
                "r_quat": [float(x) for x in self.marker2world.quaternion()],
            }
        return {
            "seq": self.seq,
            "model": {
                "t": [float(x) for x in self.model.translation],
                "r_quat": [float(x) for x in matrix_to_quat(self.model.rotation)],
                "s": [float(x) for x in self.model.scale],
            },
            "cut": {
                "enabled": bool(self.cut.enabled),
                "point": [float(x) for x in self.cut.point],
                "normal": [float(x) for x in self.cut.normal],
            },
            "window": {
                "base": float(self.window.base),
                "brightness": float(self.window.brightness),
                "contrast": float(self.window.contrast),
            },
            "scheme": {"kind": self.scheme_kind},
            "opacity": {"points": [[float(x), float(a)] for x, a in self.opacity.points]},
            "marker": marker,
            "strokes": [
                {"points": [[float(v) for v in p] for p in s["points"]],
                 "color": [float(v) for v in s["color"]]}
                for s in self.strokes
            ],
        }

    def client_list_payload(self) -> dict:
        return {
            "clients": [
                {"id": c.id, "name": c.name, "role": c.role.value} for c in self.clients
            ]
        }


def register_client(state: SessionState, name: str, role: str,
                    now: float = 0.0) -> tuple[SessionState, ClientInfo, list]:
    """Admit a client; returns (state, info, outbound WELCOME + CLIENT_LIST)."""
    info = ClientInfo(
        id=state.next_client_id,
        role=Role.VIEWER if role == "viewer" else Role.CONTROLLER,
        name=name,
        last_seen=now,
    )
    new_state = replace(
        state,
        clients=state.clients + (info,),
        next_client_id=state.next_client_id + 1,
    )
    out = [
        (info.id, Message("WELCOME", new_state.seq, {"id": info.id, "state": new_state.to_payload()})),
        (BROADCAST, Message("CLIENT_LIST", new_state.seq, new_state.client_list_payload())),
    ]
    return new_state, info, out


def drop_client(state: SessionState, client_id: int) -> tuple[SessionState, list]:
    remaining = tuple(c for c in state.clients if c.id != client_id)
    if len(remaining) == len(state.clients):
        return state, []
    new_state = replace(state, clients=remaining)
    return new_state, [(BROADCAST, Message("CLIENT_LIST", new_state.seq, new_state.client_list_payload()))]


def _nack(reason: str) -> list:
    return [(SENDER, Message("NACK", 0, {"reason": reason}))]


def _pose_from_payload(p: dict) -> Pose:
    return Pose.from_quaternion(p["r_quat"], p["t"])


def _apply_mutation(state: SessionState, msg: Message,
                    camera: Optional[PinholeCamera]) -> SessionState:
    p = msg.payload
    if msg.type == "SET_POSE":
        m = p["model"]
        model = ModelTransform(
            scale=np.asarray(m["s"], dtype=float),
            rotation=Pose.from_quaternion(m["r_quat"]).rotation,
            translation=np.asarray(m["t"], dtype=float),
        )
        return replace(state, model=model)
    if msg.type == "SET_CUT_PLANE":
        c = p["cut"]
        cut = CutPlane(enabled=c["enabled"], point=np.asarray(c["point"], dtype=float),
                       normal=np.asarray(c["normal"], dtype=float))
        return replace(state, cut=cut)
    if msg.type == "SET_TRANSFER":
        out = state
        if "window" in p and p["window"] is not None:
            w = p["window"]
            out = replace(out, window=WindowParams(w["base"], w["brightness"], w["contrast"]))
        if "scheme" in p and p["scheme"] is not None:
            kind = p["scheme"]["kind"].lower().replace("-", "_")
            if kind not in ("grayscale", "hsv", "fire", "cet_l08"):
                raise MalformedPayload(f"unknown scheme kind {kind!r}")
            out = replace(out, scheme_kind=kind)
        if "opacity" in p and p["opacity"] is not None:
            out = replace(out, opacity=OpacityCurve(tuple(tuple(q) for q in p["opacity"]["points"])))
        return out
    if msg.type == "ANNOTATE_STROKE":
        stroke = {"points": [list(q) for q in p["points"]],
                  "color": list(p.get("color", [1.0, 0.1, 0.1, 1.0]))}
        return replace(state, strokes=state.strokes + (stroke,))
    if msg.type == "SET_MARKER":
        if p.get("pose") is not None:
            detected = _pose_from_payload(p["pose"])
        else:
            obs = p["observation"]
            cam = camera or PinholeCamera.default()
            marker2sensor = estimate_marker_pose(
                cam, MarkerObservation(obs["marker_size"], np.asarray(obs["corners"], dtype=float))
            )
            sensor2world = _pose_from_payload(p["sensor"]) if p.get("sensor") else Pose()
            detected = compose(sensor2world, marker2sensor)
        if state.marker2world is None:
            marker = detected
        else:
            rot = slerp_blend(state.marker2world.rotation, detected.rotation, MARKER_BLEND_WEIGHT)
            t = ((1 - MARKER_BLEND_WEIGHT) * state.marker2world.translation
                 + MARKER_BLEND_WEIGHT * detected.translation)
            marker = Pose(rot, t)
        return replace(state, marker2world=marker)
    if msg.type == "RESET":
        return replace(
            state,
            model=_default_model(),
            cut=CutPlane(),
            window=WindowParams(),
            scheme_kind="grayscale",
            opacity=OpacityCurve(),
            marker2world=None,
            strokes=(),
        )
    raise MalformedPayload(f"unhandled mutation {msg.type}")


def handle_message(state: SessionState, client: ClientInfo, msg: Message,
                   camera: Optional[PinholeCamera] = None,
                   now: float = 0.0) -> tuple[SessionState, list]:
    """Process one registered client's message.

    Returns the new state and a list of (target, Message) where target is a
    client id, SENDER, or BROADCAST.  STATE broadcasts carry the new seq.
    """
    if state.client(client.id) is None:
        return state, _nack("not-registered")

    if msg.type not in MESSAGE_TYPES:
        return state, _nack(f"unknown-type:{msg.type}")

    # Replay protection: client message seq must strictly increase.
    if msg.seq <= client.last_seq:
        return state, _nack(f"stale-seq:{msg.seq}")
    bumped = replace(client, last_seq=msg.seq, last_seen=now)
    state = replace(
        state,
        clients=tuple(bumped if c.id == client.id else c for c in state.clients),
    )

    try:
        validate_payload(msg)
    except MalformedPayload as exc:
        return state, _nack(f"schema:{exc}")

    if msg.type == "PING":
        return state, [(SENDER, Message("PONG", msg.seq, {}))]
    if msg.type == "PONG":
        return state, []
    if msg.type == "GET_STATE":
        return state, [(SENDER, Message("STATE", state.seq, state.to_payload()))]
    if msg.type == "SUBSCRIBE_FRAMES":
        return state, []  # transport layer owns the streaming loop

    if msg.type in MUTATING_TYPES:
        if bumped.role != Role.CONTROLLER:
            return state, _nack("unauthorized")
        try:
            mutated = _apply_mutation(state, msg, camera)
        except (MalformedPayload, ValueError) as exc:
            return state, _nack(f"schema:{exc}")
        mutated = replace(mutated, seq=state.seq + 1)
        return mutated, [(BROADCAST, Message("STATE", mutated.seq, mutated.to_payload()))]

    return state, _nack(f"unexpected-type:{msg.type}")
