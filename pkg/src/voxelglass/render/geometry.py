"""Plane/cube intersection geometry for slice-based rendering."""

from __future__ import annotations

import numpy as np

# Unit cube [0,1]^3: corners and the 12 edges as corner-index pairs.
CUBE_CORNERS = np.array(
    [
        [0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0],
        [0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1],
    ],
    dtype=np.float64,
)
CUBE_EDGES = np.array(
    [
        [0, 1], [2, 3], [4, 5], [6, 7],
        [0, 2], [1, 3], [4, 6], [5, 7],
        [0, 4], [1, 5], [2, 6], [3, 7],
    ]
)


def _plane_basis(normal: np.ndarray):
    n = normal / np.linalg.norm(normal)
    helper = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u = np.cross(n, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(n, u)


def slice_cube(point, normal) -> np.ndarray:
    """Cross-section of the unit cube with a plane.

    Returns the convex intersection polygon as an (k, 3) array with vertices
    ordered counter-clockwise about the plane normal (k in 3..6), or an empty
    (0, 3) array when the plane misses the cube or only grazes a corner/edge.
    """
    point = np.asarray(point, dtype=np.float64).reshape(3)
    normal = np.asarray(normal, dtype=np.float64).reshape(3)
    norm = np.linalg.norm(normal)
    if norm < 1e-15:
        raise ValueError("plane normal must be nonzero")
    normal = normal / norm

    s = CUBE_CORNERS @ normal - point @ normal
    verts = []
    eps = 1e-12
    on_plane = np.abs(s) < eps
    for ci in np.flatnonzero(on_plane):
        verts.append(CUBE_CORNERS[ci])
    for i, j in CUBE_EDGES:
        if on_plane[i] or on_plane[j]:
            continue
        if s[i] * s[j] < 0:
            t = s[i] / (s[i] - s[j])
            verts.append(CUBE_CORNERS[i] + t * (CUBE_CORNERS[j] - CUBE_CORNERS[i]))
    if not verts:
        return np.empty((0, 3))

    pts = np.asarray(verts)
    # Dedupe coincident vertices (corner hits shared by several edges).
    rounded = np.round(pts / 1e-9) * 1e-9
    _, keep = np.unique(rounded, axis=0, return_index=True)
    pts = pts[np.sort(keep)]
    if len(pts) < 3:
        return np.empty((0, 3))

    u, v = _plane_basis(normal)
    centered = pts - pts.mean(axis=0)
    angles = np.arctan2(centered @ v, centered @ u)
    return pts[np.argsort(angles)]


def slice_cube_batch(normal: np.ndarray, offsets: np.ndarray):
    """Cross-sections for many parallel planes ``normal . x = offset``.

    Vectorized version of :func:`slice_cube` for a frame's whole slice stack;
    same math, strict straddle test (corner grazes are dropped, which only
    perturbs measure-zero sample planes).

    Returns (verts, counts): verts is (n_planes, 6, 3) with counts[k] valid
    vertices per plane, CCW about ``normal``.
    """
    normal = np.asarray(normal, dtype=np.float64).reshape(3)
    n_unit = normal / np.linalg.norm(normal)
    offsets = np.asarray(offsets, dtype=np.float64) / np.linalg.norm(normal)
    s = CUBE_CORNERS @ n_unit  # (8,)
    s0 = s[CUBE_EDGES[:, 0]][np.newaxis, :] - offsets[:, np.newaxis]  # (k, 12)
    s1 = s[CUBE_EDGES[:, 1]][np.newaxis, :] - offsets[:, np.newaxis]
    straddle = (s0 * s1) < 0
    denom = s1 - s0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(straddle, -s0 / np.where(np.abs(denom) < 1e-30, 1.0, denom), 0.0)
    p0 = CUBE_CORNERS[CUBE_EDGES[:, 0]]  # (12, 3)
    edge_vec = CUBE_CORNERS[CUBE_EDGES[:, 1]] - p0
    pts = p0[np.newaxis] + t[..., np.newaxis] * edge_vec[np.newaxis]  # (k, 12, 3)

    u, v = _plane_basis(n_unit)
    k = len(offsets)
    verts = np.zeros((k, 6, 3))
    counts = np.zeros(k, dtype=np.int32)
    pu = pts @ u
    pv = pts @ v
    for ki in range(k):
        m = straddle[ki]
        c = int(m.sum())
        if c < 3:
            continue
        sel_u = pu[ki, m]
        sel_v = pv[ki, m]
        order = np.argsort(np.arctan2(sel_v - sel_v.mean(), sel_u - sel_u.mean()))
        c = min(c, 6)
        verts[ki, :c] = pts[ki, m][order[:c]]
        counts[ki] = c
    return verts, counts


def ray_cube_range(origins: np.ndarray, dirs: np.ndarray):
    """Slab intersection of rays with the unit cube.

    origins/dirs: (..., 3).  Returns (t_enter, t_exit); a ray hits the cube
    where t_exit > max(t_enter, 0).
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dirs
        t_lo = (0.0 - origins) * inv
        t_hi = (1.0 - origins) * inv
    parallel = np.abs(dirs) < 1e-15
    if parallel.any():
        inside = (origins >= 0.0) & (origins <= 1.0)
        t_lo = np.where(parallel, np.where(inside, -np.inf, np.inf), t_lo)
        t_hi = np.where(parallel, np.where(inside, np.inf, -np.inf), t_hi)
    t_near = np.minimum(t_lo, t_hi).max(axis=-1)
    t_far = np.maximum(t_lo, t_hi).min(axis=-1)
    return t_near, t_far
