"""Hand pose streams: the input format for gesture and sketch replay.

No tracking hardware is touched; frames arrive from a file or a live feed.

Stream file format, one frame per line, whitespace-separated:

    t  L  R

where each hand block ``L``/``R`` is 12 fields:

    present(0|1)  px py pz  qw qx qy qz  tx ty tz  grab(0|1)

``p``/``q`` are the palm pose (position meters, unit quaternion w-first),
``t`` is the index fingertip position.  Absent hands keep zero fields.
Lines starting with ``#`` are comments.  Timestamps must strictly increase.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from ..spaces.pose import Pose


def _zero_pose() -> Pose:
    return Pose()


@dataclass(frozen=True)
class HandPose:
    present: bool = False
    palm: Pose = field(default_factory=_zero_pose)
    index_tip: np.ndarray = field(default_factory=lambda: np.zeros(3))
    grabbing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "index_tip", np.asarray(self.index_tip, dtype=float).reshape(3))


@dataclass(frozen=True)
class HandFrame:
    timestamp: float
    left: HandPose = field(default_factory=HandPose)
    right: HandPose = field(default_factory=HandPose)


def _parse_hand(fields: list[str]) -> HandPose:
    present = fields[0] not in ("0", "")
    pos = [float(v) for v in fields[1:4]]
    quat = [float(v) for v in fields[4:8]]
    tip = [float(v) for v in fields[8:11]]
    grab = fields[11] not in ("0", "")
    palm = Pose.from_quaternion(quat, pos) if present else Pose()
    return HandPose(present=present, palm=palm, index_tip=np.array(tip), grabbing=grab and present)


def parse_hand_stream(text: str) -> list[HandFrame]:
    frames: list[HandFrame] = []
    last_t = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 25:
            raise ValueError(f"line {lineno}: expected 25 fields, got {len(fields)}")
        t = float(fields[0])
        if last_t is not None and t <= last_t:
            raise ValueError(f"line {lineno}: timestamps must strictly increase")
        last_t = t
        frames.append(HandFrame(t, _parse_hand(fields[1:13]), _parse_hand(fields[13:25])))
    return frames


def _format_hand(h: HandPose) -> str:
    q = h.palm.quaternion()
    p = h.palm.translation
    t = h.index_tip
    return (
        f"{1 if h.present else 0} "
        f"{p[0]:.6f} {p[1]:.6f} {p[2]:.6f} "
        f"{q[0]:.6f} {q[1]:.6f} {q[2]:.6f} {q[3]:.6f} "
        f"{t[0]:.6f} {t[1]:.6f} {t[2]:.6f} "
        f"{1 if h.grabbing else 0}"
    )


def format_hand_stream(frames: Iterable[HandFrame]) -> str:
    lines = [f"{f.timestamp:.6f} {_format_hand(f.left)} {_format_hand(f.right)}" for f in frames]
    return "\n".join(lines) + ("\n" if lines else "")
