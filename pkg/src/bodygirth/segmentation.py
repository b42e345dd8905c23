"""
segmentation.py
---------------

Axilla (armpit) detection by casting a ray out of the right shoulder,
and the chest / waist / pelvis height bands bounded by the axilla and
the Spine1, Pelvis and R_Hip joints.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .formats import Skeleton
from .mesh import GeometryError, Mesh, bounding_box

BARY_EPS = 1e-12
DEFAULT_KNN = 80


def ray_triangles(origin, direction, triangles: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """
    Watertight ray / triangle test against many triangles at once.

    Vertices are translated to the ray origin, the dominant ray axis is
    made the z axis and the frame is sheared so the ray runs along +z;
    the remaining test is the 2D signed-area test at the origin, so a
    ray through a shared edge or vertex cannot slip between neighbors.

    Parameters
    ----------
    origin : (3,) float
    direction : (3,) float
      Need not be unit length; ``t`` is in units of ``direction``.
    triangles : (m, 3, 3) float

    Returns
    -------
    t : (m,) float
      Ray parameter of the hit, ``inf`` where the triangle is missed
      or the hit is not in front of the origin.
    barycentric : (m, 3) float
    """
    origin = np.asarray(origin, dtype=np.float64)
    direction = np.asarray(direction, dtype=np.float64)
    kz = int(np.argmax(np.abs(direction)))
    if direction[kz] == 0.0:
        raise ValueError("ray direction is zero")
    kx = (kz + 1) % 3
    ky = (kx + 1) % 3
    if direction[kz] < 0.0:
        kx, ky = ky, kx
    sx = direction[kx] / direction[kz]
    sy = direction[ky] / direction[kz]
    sz = 1.0 / direction[kz]

    rel = triangles - origin
    px = rel[..., kx] - sx * rel[..., kz]
    py = rel[..., ky] - sy * rel[..., kz]
    pz = sz * rel[..., kz]

    (ax, bx, cx), (ay, by, cy) = px.T, py.T
    u = cx * by - cy * bx
    v = ax * cy - ay * cx
    w = bx * ay - by * ax
    det = u + v + w

    with np.errstate(divide="ignore", invalid="ignore"):
        bary = np.stack([u, v, w], axis=1) / det[:, None]
        t = (u * pz[:, 0] + v * pz[:, 1] + w * pz[:, 2]) / det
    hit = (det != 0.0) & (bary.min(axis=1) >= -BARY_EPS) & (t > 0.0)
    return np.where(hit, t, np.inf), bary


def nearest_vertices(vertices: np.ndarray, point, k: int) -> np.ndarray:
    """
    Indices of the ``k`` vertices closest to ``point`` (Euclidean),
    nearest first; equal distances keep the lower index first.
    """
    diff = vertices - np.asarray(point, dtype=np.float64)
    d2 = (diff * diff).sum(axis=1)
    order = np.lexsort((np.arange(len(vertices)), d2))
    return order[:k]


@dataclass(frozen=True)
class AxillaResult:
    """
    origin : right shoulder joint the ray starts from
    target : bounding-box point the ray aims at
    hit : first surface point along the ray
    hit_triangle : triangle index containing ``hit``
    point : chosen axilla vertex (lowest of the neighbors of ``hit``)
    point_index : vertex index of ``point``
    neighbors : how many vertices were searched
    """

    origin: tuple[float, float, float]
    target: tuple[float, float, float]
    hit: tuple[float, float, float]
    hit_triangle: int
    point: tuple[float, float, float]
    point_index: int
    neighbors: int

    @property
    def y(self) -> float:
        return self.point[1]


def axilla_target(mesh: Mesh) -> np.ndarray:
    """Bottom edge of the bounding box on the min-x side, halfway along z."""
    box = bounding_box(mesh)
    return np.array(
        [box.min[0], box.min[1], box.min[2] + abs(box.max[2] - box.min[2]) / 2.0]
    )


def locate_axilla(mesh: Mesh, skeleton: Skeleton, k: int = DEFAULT_KNN) -> AxillaResult:
    """
    Find the right armpit of an LSA-aligned mesh in the arms-out rest pose.

    A ray from the right shoulder joint toward the bottom min-x edge of
    the bounding box exits the body under the arm; the lowest of the
    ``k`` vertices nearest that exit point is the axilla.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    origin = skeleton["R_Shoulder"]
    box = bounding_box(mesh)
    if np.any(origin < np.array(box.min)) or np.any(origin > np.array(box.max)):
        raise GeometryError(
            f"R_Shoulder {origin.tolist()} lies outside the mesh bounding box"
        )
    target = axilla_target(mesh)
    direction = target - origin

    t, _ = ray_triangles(origin, direction, mesh.triangle_points)
    first = int(np.argmin(t))
    if not np.isfinite(t[first]):
        raise GeometryError("axilla ray missed mesh")
    hit = origin + t[first] * direction

    count = len(mesh.vertices)
    if count < k:
        warnings.warn(f"only {count} vertices, using all of them instead of k={k}")
        k = count
    near = nearest_vertices(mesh.vertices, hit, k)
    # lowest y; ties go to the lowest vertex index
    ys = mesh.vertices[near, 1]
    lowest = near[ys == ys.min()].min()

    return AxillaResult(
        origin=tuple(origin.tolist()),
        target=tuple(target.tolist()),
        hit=tuple(hit.tolist()),
        hit_triangle=first,
        point=tuple(mesh.vertices[lowest].tolist()),
        point_index=int(lowest),
        neighbors=int(k),
    )


@dataclass(frozen=True)
class Regions:
    """
    Half-open height bands ``[lower, upper)``:
    chest from Spine1 up to the axilla, waist from Pelvis up to
    Spine1, pelvis from R_Hip up to Pelvis.
    """

    chest: tuple[float, float]
    waist: tuple[float, float]
    pelvis: tuple[float, float]

    NAMES = ("chest", "waist", "pelvis")

    def band(self, name: str) -> tuple[float, float]:
        return getattr(self, name)

    def mask(self, name: str, heights) -> np.ndarray:
        lower, upper = self.band(name)
        heights = np.asarray(heights)
        return (heights >= lower) & (heights < upper)


def segment_regions(mesh: Mesh, skeleton: Skeleton, axilla: AxillaResult) -> Regions:
    bounds = [
        ("axilla", axilla.y),
        ("Spine1", float(skeleton["Spine1"][1])),
        ("Pelvis", float(skeleton["Pelvis"][1])),
        ("R_Hip", float(skeleton["R_Hip"][1])),
    ]
    for (upper_name, upper), (lower_name, lower) in zip(bounds, bounds[1:]):
        if not upper > lower:
            raise GeometryError(
                f"{upper_name} y ({upper:.6f}) must lie above {lower_name} y ({lower:.6f})"
            )
    (_, axilla_y), (_, spine), (_, pelvis), (_, hip) = bounds
    return Regions(chest=(spine, axilla_y), waist=(pelvis, spine), pelvis=(hip, pelvis))
