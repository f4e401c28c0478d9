import json

import numpy as np
import pytest

from voxelglass.sync import (
    FrameTooLarge,
    MalformedPayload,
    Message,
    SessionState,
    decode,
    decode_body,
    encode,
    encode_body,
    handle_message,
    register_client,
)
from voxelglass.sync.state import BROADCAST, SENDER, drop_client

REPRESENTATIVE = [
    Message("HELLO", 1, {"name": "phone", "role": "controller"}),
    Message("GET_STATE", 2, {}),
    Message("SET_POSE", 3, {"model": {"t": [0, 0, -1], "r_quat": [1, 0, 0, 0], "s": [1, 1, 1]}}),
    Message("SET_CUT_PLANE", 4, {"cut": {"enabled": True, "point": [0, 0, 0], "normal": [0, 0, 1]}}),
    Message("SET_TRANSFER", 5, {"scheme": {"kind": "fire"}}),
    Message("ANNOTATE_STROKE", 6, {"points": [[0.0, 0.0, 0.002]], "color": [1, 0, 0, 1]}),
    Message("SET_MARKER", 7, {"pose": {"t": [0, 1, 0.5], "r_quat": [1, 0, 0, 0]}}),
    Message("SUBSCRIBE_FRAMES", 8, {"w": 256, "h": 256, "max_fps": 5}),
    Message("FRAME", 9, {"png_base64": "aGk="}),
    Message("RESET", 10, {}),
    Message("NACK", 0, {"reason": "stale-seq:3"}),
    Message("PING", 11, {}),
    Message("PONG", 11, {}),
    Message("CLIENT_LIST", 0, {"clients": [{"id": 1, "name": "", "role": "controller"}]}),
]


class TestCodec:
    @pytest.mark.parametrize("msg", REPRESENTATIVE, ids=lambda m: m.type)
    def test_round_trip(self, msg):
        assert decode(encode(msg)) == msg

    def test_zero_payload_hello_decodes_with_defaults(self):
        msg = decode_body(b'{"type": "HELLO", "seq": 1}')
        assert msg.type == "HELLO"
        assert msg.payload == {}
        assert msg.payload.get("name", "") == ""

    def test_length_prefix_mismatch(self):
        with pytest.raises(MalformedPayload):
            decode(b"\x00\x00\x00\x10{}")

    def test_frame_too_large_declared(self):
        with pytest.raises(FrameTooLarge):
            decode(b"\xff\xff\xff\xff" + b"x" * 8)

    def test_not_json(self):
        with pytest.raises(MalformedPayload):
            decode_body(b"\xde\xad\xbe\xef")

    def test_non_object(self):
        with pytest.raises(MalformedPayload):
            decode_body(b"[1,2,3]")

    def test_missing_type(self):
        with pytest.raises(MalformedPayload):
            decode_body(b'{"seq": 1}')

    def test_fuzz_never_crashes(self):
        rng = np.random.default_rng(99)
        for _ in range(20000):
            n = int(rng.integers(0, 64))
            blob = rng.integers(0, 256, n, dtype=np.uint8).tobytes()
            try:
                decode(blob)
            except (MalformedPayload, FrameTooLarge):
                pass


def fresh_session():
    state = SessionState()
    state, ctrl, _ = register_client(state, "ctrl", "controller")
    state, view, _ = register_client(state, "watch", "viewer")
    return state, ctrl, view


def msg(mtype, seq, **payload):
    return Message(mtype, seq, payload)


class TestHandleMessage:
    def test_set_pose_bumps_seq_and_broadcasts(self):
        state, ctrl, _ = fresh_session()
        new, out = handle_message(
            state, ctrl, msg("SET_POSE", 1, model={"t": [0, 0, -1], "r_quat": [1, 0, 0, 0], "s": [1, 1, 1]})
        )
        assert new.seq == state.seq + 1
        targets = [t for t, _ in out]
        assert targets == [BROADCAST]
        assert out[0][1].type == "STATE"
        assert out[0][1].payload["model"]["t"] == [0.0, 0.0, -1.0]

    def test_last_writer_wins(self):
        state, ctrl, _ = fresh_session()
        state, ctrl2, _ = register_client(state, "ctrl2", "controller")
        state, _ = handle_message(state, state.client(ctrl.id),
                                  msg("SET_TRANSFER", 1, scheme={"kind": "fire"}))
        state, out = handle_message(state, state.client(ctrl2.id),
                                    msg("SET_TRANSFER", 1, scheme={"kind": "hsv"}))
        assert state.scheme_kind == "hsv"
        assert out[0][1].payload["scheme"]["kind"] == "hsv"

    def test_stale_seq_nacked_state_unchanged(self):
        state, ctrl, _ = fresh_session()
        state, _ = handle_message(state, state.client(ctrl.id),
                                  msg("SET_TRANSFER", 5, scheme={"kind": "fire"}))
        before = state.to_payload()
        new, out = handle_message(state, state.client(ctrl.id),
                                  msg("SET_TRANSFER", 5, scheme={"kind": "hsv"}))
        assert out[0][0] == SENDER
        assert out[0][1].type == "NACK"
        assert "stale" in out[0][1].payload["reason"]
        assert new.to_payload() == before

    def test_viewer_mutation_unauthorized(self):
        state, _, viewer = fresh_session()
        new, out = handle_message(state, viewer,
                                  msg("SET_TRANSFER", 1, scheme={"kind": "fire"}))
        assert out[0][1].type == "NACK"
        assert out[0][1].payload["reason"] == "unauthorized"
        assert new.scheme_kind == state.scheme_kind

    def test_get_state_to_sender_only(self):
        state, ctrl, _ = fresh_session()
        _, out = handle_message(state, ctrl, msg("GET_STATE", 1))
        assert [t for t, _ in out] == [SENDER]
        assert out[0][1].type == "STATE"

    def test_unknown_type_nack(self):
        state, ctrl, _ = fresh_session()
        _, out = handle_message(state, ctrl, msg("SET_WARP_DRIVE", 1))
        assert out[0][1].type == "NACK"
        assert "unknown-type" in out[0][1].payload["reason"]

    def test_schema_violation_nack(self):
        state, ctrl, _ = fresh_session()
        new, out = handle_message(state, ctrl, msg("SET_POSE", 1, model={"t": [0, 0]}))
        assert out[0][1].type == "NACK"
        assert out[0][1].payload["reason"].startswith("schema:")
        assert new.to_payload() == state.to_payload()

    def test_reset_restores_defaults_but_bumps_seq(self):
        state, ctrl, _ = fresh_session()
        state, _ = handle_message(state, state.client(ctrl.id),
                                  msg("SET_TRANSFER", 1, scheme={"kind": "fire"}))
        seq_before = state.seq
        state, _ = handle_message(state, state.client(ctrl.id), msg("RESET", 2))
        assert state.scheme_kind == "grayscale"
        assert state.seq == seq_before + 1

    def test_annotate_appends_stroke(self):
        state, ctrl, _ = fresh_session()
        state, _ = handle_message(state, ctrl,
                                  msg("ANNOTATE_STROKE", 1,
                                      points=[[0.0, 0.0, 0.002], [0.01, 0.0, 0.003]],
                                      color=[0, 1, 0, 1]))
        assert len(state.strokes) == 1
        assert state.to_payload()["strokes"][0]["color"] == [0.0, 1.0, 0.0, 1.0]

    def test_set_marker_blends(self):
        state, ctrl, _ = fresh_session()
        state, _ = handle_message(state, state.client(ctrl.id),
                                  msg("SET_MARKER", 1, pose={"t": [0, 0, 1], "r_quat": [1, 0, 0, 0]}))
        assert np.allclose(state.marker2world.translation, [0, 0, 1])
        state, _ = handle_message(state, state.client(ctrl.id),
                                  msg("SET_MARKER", 2, pose={"t": [0, 0, 2], "r_quat": [1, 0, 0, 0]}))
        assert np.allclose(state.marker2world.translation, [0, 0, 1.3])  # 0.3 blend

    def test_set_marker_from_observation(self):
        from voxelglass.spaces import PinholeCamera, Pose, project_marker
        cam = PinholeCamera.default()
        truth = Pose(np.eye(3), [0.0, 0.0, 1.2])
        obs = project_marker(cam, truth, 0.15)
        state, ctrl, _ = fresh_session()
        state, _ = handle_message(
            state, ctrl,
            msg("SET_MARKER", 1, observation={
                "marker_size": 0.15,
                "corners": obs.corners.tolist(),
            }),
            camera=cam,
        )
        assert np.allclose(state.marker2world.translation, [0, 0, 1.2], atol=1e-6)

    def test_ping_pong(self):
        state, ctrl, _ = fresh_session()
        _, out = handle_message(state, ctrl, msg("PING", 1))
        assert out[0][1].type == "PONG"

    def test_drop_client_broadcasts_list(self):
        state, ctrl, viewer = fresh_session()
        state, out = drop_client(state, viewer.id)
        assert out[0][0] == BROADCAST
        assert out[0][1].type == "CLIENT_LIST"
        ids = [c["id"] for c in out[0][1].payload["clients"]]
        assert viewer.id not in ids


def random_log(rng, length=30):
    """A random-but-valid-ish message log over two controllers."""
    log = []
    seqs = {1: 0, 2: 0}
    kinds = ["grayscale", "hsv", "fire", "cet_l08"]
    for _ in range(length):
        cid = int(rng.integers(1, 3))
        seqs[cid] += int(rng.integers(1, 3))  # sometimes skips, never stale
        choice = rng.integers(0, 6)
        if choice == 0:
            m = msg("SET_POSE", seqs[cid], model={
                "t": [float(x) for x in rng.normal(size=3)],
                "r_quat": [float(x) for x in rng.normal(size=4) + [2, 0, 0, 0]],
                "s": [float(abs(x) + 0.1) for x in rng.normal(size=3)],
            })
        elif choice == 1:
            m = msg("SET_TRANSFER", seqs[cid], scheme={"kind": kinds[int(rng.integers(0, 4))]})
        elif choice == 2:
            m = msg("SET_CUT_PLANE", seqs[cid], cut={
                "enabled": bool(rng.integers(0, 2)),
                "point": [float(x) for x in rng.normal(size=3)],
                "normal": [float(x) for x in rng.normal(size=3) + [1, 0, 0]],
            })
        elif choice == 3:
            m = msg("ANNOTATE_STROKE", seqs[cid],
                    points=[[float(rng.uniform(-0.1, 0.1)), float(rng.uniform(-0.1, 0.1)),
                             float(rng.uniform(0.001, 0.008))]])
        elif choice == 4:
            m = msg("SET_MARKER", seqs[cid],
                    pose={"t": [float(x) for x in rng.normal(size=3)], "r_quat": [1, 0, 0, 0]})
        else:
            m = msg("RESET", seqs[cid])
        log.append((cid, m))
    return log


class TestDeterminism:
    def test_log_replay_reproduces_state(self):
        rng = np.random.default_rng(77)
        for _ in range(25):
            log = random_log(rng)

            def apply_log(entries):
                state = SessionState()
                state, _, _ = register_client(state, "a", "controller")
                state, _, _ = register_client(state, "b", "controller")
                for cid, m in entries:
                    client = state.client(cid)
                    state, _ = handle_message(state, client, m)
                return state

            a = apply_log(log)
            b = apply_log(log)
            assert json.dumps(a.to_payload(), sort_keys=True) == \
                json.dumps(b.to_payload(), sort_keys=True)

    def test_state_payload_is_json_stable(self):
        state, ctrl, _ = fresh_session()
        state, _ = handle_message(state, ctrl,
                                  msg("SET_TRANSFER", 1, scheme={"kind": "fire"}))
        p1 = json.dumps(state.to_payload(), sort_keys=True)
        p2 = json.dumps(state.to_payload(), sort_keys=True)
        assert p1 == p2
