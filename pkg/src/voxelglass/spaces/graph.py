"""Named coordinate spaces connected by rigid transforms.

The graph is a forest rooted at ``SpaceId.WORLD``: every registered space has
one parent edge carrying the child-to-parent pose.  ``resolve(a, b)`` chains
edges (and their inverses) along the unique path between two spaces.

Updates replace the edge table wholesale, so readers that grab the table once
see a consistent snapshot even while a tracking thread keeps writing.
"""

from __future__ import annotations

import enum
import threading
import time
from typing import Optional

from .pose import Pose, compose, invert, slerp_blend


class SpaceId(enum.Enum):
    WORLD = "world"
    SENSOR = "sensor"
    MARKER = "marker"
    HAND_LEFT = "hand_left"
    HAND_RIGHT = "hand_right"
    VIEW_LEFT = "view_left"
    VIEW_RIGHT = "view_right"
    VIEW_PV = "view_pv"


class UnknownSpace(KeyError):
    """Space was never registered in the graph."""


class DisconnectedSpace(ValueError):
    """Space has no edge path reaching the world root."""


class CyclicSpaceEdge(ValueError):
    """Rejected edge that would create a parent cycle."""


class SpaceGraph:
    def __init__(self):
        self._edges: dict[SpaceId, tuple[SpaceId, Pose, float]] = {}
        self._write_lock = threading.Lock()

    def set_edge(self, child: SpaceId, parent: SpaceId, pose: Pose, timestamp: Optional[float] = None) -> None:
        """Register or replace the edge ``child -> parent``."""
        if child == SpaceId.WORLD:
            raise ValueError("world is the root and cannot have a parent")
        if timestamp is None:
            timestamp = time.monotonic()
        with self._write_lock:
            edges = dict(self._edges)
            edges[child] = (parent, pose, timestamp)
            self._check_acyclic(edges, child)
            self._edges = edges

    def update_marker(self, pose: Pose, parent: SpaceId = SpaceId.SENSOR, weight: float = 0.3,
                      timestamp: Optional[float] = None) -> None:
        """Blend a fresh marker detection into the stored marker edge.

        Acts as a low-pass spatial anchor: the stored edge moves toward the
        new detection by ``weight`` (1.0 replaces it outright).  The first
        detection is stored as-is.
        """
        with self._write_lock:
            current = self._edges.get(SpaceId.MARKER)
        if current is None or current[0] != parent or weight >= 1.0:
            self.set_edge(SpaceId.MARKER, parent, pose, timestamp)
            return
        _, old, _ = current
        rot = slerp_blend(old.rotation, pose.rotation, weight)
        t = (1.0 - weight) * old.translation + weight * pose.translation
        self.set_edge(SpaceId.MARKER, parent, Pose(rot, t), timestamp)

    def spaces(self) -> set[SpaceId]:
        return {SpaceId.WORLD} | set(self._edges.keys())

    def to_world(self, space: SpaceId) -> Pose:
        """Pose mapping ``space`` coordinates into world coordinates."""
        edges = self._edges
        if space != SpaceId.WORLD and space not in edges:
            raise UnknownSpace(space)
        pose = Pose.identity()
        cur = space
        hops = 0
        while cur != SpaceId.WORLD:
            if cur not in edges:
                raise DisconnectedSpace(f"{space} does not reach world (stuck at {cur})")
            parent, edge_pose, _ = edges[cur]
            pose = compose(edge_pose, pose)
            cur = parent
            hops += 1
            if hops > len(edges) + 1:
                raise DisconnectedSpace(f"{space} does not reach world")
        return pose

    def resolve(self, src: SpaceId, dst: SpaceId) -> Pose:
        """Pose carrying points expressed in ``src`` into ``dst`` coordinates."""
        if src == dst:
            if src != SpaceId.WORLD and src not in self._edges:
                raise UnknownSpace(src)
            return Pose.identity()
        return compose(invert(self.to_world(dst)), self.to_world(src))

    @staticmethod
    def _check_acyclic(edges, start: SpaceId) -> None:
        seen = {start}
        cur = start
        while cur in edges:
            cur = edges[cur][0]
            if cur in seen:
                raise CyclicSpaceEdge(f"edge from {start} creates a cycle at {cur}")
            seen.add(cur)
