"""
slicing.py
----------

Plane / triangle-soup intersection, cross-section boundary length and
the body signature: boundary length sampled top to bottom every ``step``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh

SNAP_EPS = 1e-12
PLANE_EPS = 1e-9
# loose bound for the cheap candidate scan; the snapped test decides
_PREFILTER = 1e-9
# (triangle, slice) pairs cut per batch in mesh_signature
_BATCH = 1 << 20
UP = (0.0, 1.0, 0.0)

# corner pairs of the three triangle edges
_EDGES = np.array([[0, 1], [1, 2], [2, 0]])


@dataclass(frozen=True)
class SlicePlane:
    """The plane ``{p : p . normal == offset}``."""

    normal: tuple[float, float, float] = UP
    offset: float = 0.0

    def __post_init__(self):
        normal = tuple(float(c) for c in self.normal)
        if len(normal) != 3:
            raise ValueError("plane normal needs 3 components")
        if abs(np.linalg.norm(normal) - 1.0) > 1e-12:
            raise ValueError(f"plane normal must be unit length: {normal}")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", float(self.offset))


def unit(vector) -> tuple[float, float, float]:
    """Normalize ``vector`` to unit length."""
    v = np.asarray(vector, dtype=np.float64)
    norm = np.linalg.norm(v)
    if v.shape != (3,) or not np.isfinite(norm) or norm == 0.0:
        raise ValueError(f"cannot normalize {vector}")
    return tuple((v / norm).tolist())


@dataclass(frozen=True, eq=False)
class CrossSection:
    """
    Unordered segments where a plane cuts a mesh.

    segments : (k, 2, 3) float
    faces : (k,) int, source triangle of each segment
    """

    plane: SlicePlane
    segments: np.ndarray
    faces: np.ndarray

    def __len__(self):
        return len(self.segments)


# for a straddling triangle with no corner on the plane, indexed by the
# above-plane pattern a0 + 2*a1 + 4*a2: the corner alone on its side,
# then the two others in cyclic order
_LONE = np.zeros((3, 8), dtype=np.int64)
for _code in range(1, 7):
    _above = [(_code >> c) & 1 for c in range(3)]
    _lone = next(c for c in range(3) if _above.count(_above[c]) == 1)
    _LONE[:, _code] = [_lone, (_lone + 1) % 3, (_lone + 2) % 3]
del _code, _above, _lone


def _cut(vertices: np.ndarray, triangles: np.ndarray, faces: np.ndarray, dist: np.ndarray):
    """
    Intersect triangles with the plane ``dist == 0``.

    Parameters
    ----------
    vertices : (n, 3) float
    triangles : (m, 3) int
    faces : (k,) int
      Triangle cut by each row of ``dist``; rows may repeat a face.
    dist : (k, 3) float
      Signed corner distances to the plane, already snapped.

    Returns
    -------
    ends : (2, 3, j) float
      Segment endpoints, coordinate-major so each column is contiguous.
    emitted : (k,) bool
      Which rows produced a segment.
    """
    above = dist > 0.0
    below = dist < 0.0
    # column sums over uint8 views, far cheaper than a boolean row sum
    a8, b8 = above.view(np.uint8), below.view(np.uint8)
    pos = a8[:, 0] + a8[:, 1] + a8[:, 2]
    neg = b8[:, 0] + b8[:, 1] + b8[:, 2]
    zero = 3 - pos - neg

    # straddling triangles, plus an edge lying in the plane counted only
    # from the triangle above it so shared edges are not doubled
    emitted = ((pos > 0) & (neg > 0)) | ((zero == 2) & (pos == 1))
    rows = np.nonzero(emitted)[0]
    ends = np.empty((2, 3, len(rows)))
    if not len(rows):
        return ends, emitted

    # common case: no corner on the plane, one corner alone on its side.
    # The formula runs over every row (cheaper than masked writes) and
    # rows with a corner on the plane are redone below.
    code = a8[rows, 0] + 2 * a8[rows, 1] + 4 * a8[rows, 2]
    flat_triangles = triangles.reshape(-1)
    flat_dist = dist.reshape(-1)
    tri_base, dist_base = 3 * faces[rows], 3 * rows
    corner = _LONE[:, code]
    v0, d0 = flat_triangles[tri_base + corner[0]], flat_dist[dist_base + corner[0]]
    # gather per coordinate; 1-d takes beat row-wise fancy indexing
    columns = [np.ascontiguousarray(vertices[:, c]) for c in range(3)]
    starts = [np.take(col, v0) for col in columns]
    with np.errstate(divide="ignore", invalid="ignore"):
        for end in (0, 1):
            t = d0 / (d0 - flat_dist[dist_base + corner[end + 1]])
            vi = flat_triangles[tri_base + corner[end + 1]]
            for c, col in enumerate(columns):
                start = starts[c]
                ends[end, c] = start + t * (np.take(col, vi) - start)

    touching = np.nonzero(zero[rows])[0]
    if len(touching):
        idx = rows[touching]
        pts = vertices[triangles[faces[idx]]]
        ends[:, :, touching] = _cut_through_corner(pts, dist[idx]).transpose(1, 2, 0)
    return ends, emitted


def _cut_through_corner(pts, d):
    s = np.sign(d).astype(np.int8)
    a, b = _EDGES[:, 0], _EDGES[:, 1]
    da, db = d[:, a], d[:, b]
    crossing = (s[:, a] * s[:, b]) < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(crossing, da / (da - db), 0.0)
    edge_pts = pts[:, a] + t[..., None] * (pts[:, b] - pts[:, a])

    # candidate points: the 3 corners (if on the plane) then the 3 edge crossings
    cand = np.concatenate([pts, edge_pts], axis=1)
    valid = np.concatenate([s == 0, crossing], axis=1)
    # every emitted triangle has exactly two valid candidates
    order = np.argsort(~valid, axis=1, kind="stable")[:, :2]
    return np.take_along_axis(cand, order[..., None], axis=1)


def _snap(dist: np.ndarray) -> np.ndarray:
    """Zero, in place, distances within ``SNAP_EPS`` of the plane."""
    np.putmask(dist, np.abs(dist) < SNAP_EPS, 0.0)
    return dist


def slice_at(mesh: Mesh, plane: SlicePlane) -> CrossSection:
    """
    Cut every triangle with ``plane``.

    Corners within ``SNAP_EPS`` of the plane count as on it. A triangle
    touching the plane at one corner only, or lying in it, emits nothing.
    """
    heights = mesh.vertices @ np.asarray(plane.normal)
    dist = _snap(heights[mesh.triangles] - plane.offset)
    candidates = np.nonzero((dist.min(axis=1) <= 0.0) & (dist.max(axis=1) >= 0.0))[0]
    ends, emitted = _cut(mesh.vertices, mesh.triangles, candidates, dist[candidates])
    return CrossSection(plane, np.ascontiguousarray(ends.transpose(2, 0, 1)), candidates[emitted])


def boundary_length(section: CrossSection) -> float:
    """Total length of all segments in ``section``, over every component."""
    if len(section.segments) == 0:
        return 0.0
    # sequential sum in face order, matching mesh_signature bit for bit
    lengths = _lengths(section.segments.transpose(1, 2, 0))
    return float(np.bincount(np.zeros(len(lengths), dtype=np.intp), weights=lengths)[0])


def _lengths(ends: np.ndarray) -> np.ndarray:
    """Segment lengths from coordinate-major endpoints ``(2, 3, j)``."""
    dx, dy, dz = ends[1] - ends[0]
    return np.sqrt(dx * dx + dy * dy + dz * dz)


@dataclass(frozen=True, eq=False)
class Signature:
    """
    Boundary length sampled at descending plane offsets.

    offsets : (s,) float, ``top, top - step, ..., bottom``
    lengths : (s,) float, boundary length at each offset
    """

    step: float
    normal: tuple[float, float, float]
    offsets: np.ndarray
    lengths: np.ndarray

    def __len__(self):
        return len(self.offsets)

    def __eq__(self, other):
        if not isinstance(other, Signature):
            return NotImplemented
        return (
            self.step == other.step
            and self.normal == other.normal
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.lengths, other.lengths)
        )

    __hash__ = None


def slice_offsets(top: float, bottom: float, step: float) -> np.ndarray:
    """``[top, top - step, ...]`` ending exactly at ``bottom``."""
    if not step > 0:
        raise ValueError("step must be positive")
    span = top - bottom
    count = int(np.floor(span / step + 1e-9))
    offsets = top - step * np.arange(count + 1, dtype=np.float64)
    if bottom - offsets[-1] > -1e-9 * step:
        # landed on (or a rounding hair past) the bottom
        offsets[-1] = bottom
    else:
        offsets = np.append(offsets, bottom)
    return offsets


def mesh_signature(mesh: Mesh, normal=UP, step: float = 0.001) -> Signature:
    """
    Boundary length of ``mesh`` every ``step`` meters along ``normal``,
    from the top of the mesh down to its bottom (always included).
    """
    if not step > 0:
        raise ValueError("step must be positive")
    plane = SlicePlane(normal)
    heights = mesh.vertices @ np.asarray(plane.normal)
    top, bottom = float(heights.max()), float(heights.min())
    offsets = slice_offsets(top, bottom, step)

    corner_h = heights[mesh.triangles]
    # each triangle meets the contiguous run of slices between its lowest
    # and highest corner; ascending offsets make that a pair of searches
    ascending = offsets[::-1]
    first = np.searchsorted(ascending, corner_h.min(axis=1) - _PREFILTER, side="left")
    stop = np.searchsorted(ascending, corner_h.max(axis=1) + _PREFILTER, side="right")
    counts = np.maximum(stop - first, 0)

    slots, pieces = [], []
    cumulative = np.cumsum(counts)
    start_tri = 0
    while start_tri < len(counts):
        # batch whole triangles so no batch expands past _BATCH pairs
        base = cumulative[start_tri - 1] if start_tri else 0
        stop_tri = max(int(np.searchsorted(cumulative, base + _BATCH, side="right")), start_tri + 1)
        tris = np.arange(start_tri, stop_tri)
        n = counts[tris]
        tri = np.repeat(tris, n)
        within = np.arange(n.sum()) - np.repeat(np.cumsum(n) - n, n)
        slot = len(offsets) - 1 - (np.repeat(first[tris], n) + within)
        dist = corner_h[tri]
        dist -= offsets[slot][:, None]
        _snap(dist)
        ends, emitted = _cut(mesh.vertices, mesh.triangles, tri, dist)
        slots.append(slot[emitted])
        pieces.append(_lengths(ends))
        start_tri = stop_tri

    # one sequential accumulation in triangle order per slice, the same
    # sum boundary_length forms for a single section
    slot = np.concatenate(slots) if slots else np.zeros(0, dtype=np.int64)
    weights = np.concatenate(pieces) if pieces else np.zeros(0)
    lengths = np.bincount(slot, weights=weights, minlength=len(offsets)).astype(np.float64)

    offsets.setflags(write=False)
    lengths.setflags(write=False)
    return Signature(float(step), plane.normal, offsets, lengths)
