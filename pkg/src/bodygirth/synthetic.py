"""
synthetic.py
------------

Procedural test bodies with closed-form cross sections.

Every body is a surface of revolution about the y axis whose radius is
piecewise linear between rings. Ring vertices share the same angles,
so a horizontal slice between two rings is an exact regular n-gon and
its boundary length is ``2 n r(y) sin(pi / n)``.

``humanoid_proxy`` adds two horizontal arm tubes (open where they enter
the torso) and a skeleton placed so the chest bulge, waist neck and hip
bulge each fall inside their band.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .formats import Skeleton
from .mesh import Mesh

KINDS = ("cylinder", "sphere", "hourglass", "humanoid_proxy")

# humanoid torso for a body of height 1: (y, radius) control points
_TORSO = (
    (0.00, 0.10),
    (0.10, 0.16),
    (0.20, 0.18),  # hip bulge
    (0.40, 0.13),  # waist
    (0.58, 0.17),  # chest bulge
    (0.66, 0.15),  # armpit level
    (0.72, 0.15),
    (0.80, 0.06),
    (1.00, 0.06),
)
_ARM_RADIUS = 0.04
_ARM_BOTTOM = 0.66
_ARM_REACH = 0.80
_HUMANOID_JOINTS = {
    "R_Hip": (-0.08, 0.12, 0.0),
    "L_Hip": (0.08, 0.12, 0.0),
    "Pelvis": (0.0, 0.28, 0.0),
    "Spine1": (0.0, 0.50, 0.0),
    "R_Shoulder": (-0.12, 0.70, 0.0),
    "L_Shoulder": (0.12, 0.70, 0.0),
    "Neck": (0.0, 0.80, 0.0),
    "Head": (0.0, 0.90, 0.0),
}


@dataclass(frozen=True)
class FixtureSpec:
    """
    kind : one of ``KINDS``
    n : vertices per ring
    rings : rings along the body (vertical resolution)
    height : total height; the sphere uses ``2 * radius`` instead
    radius : cylinder / sphere radius, hourglass end radius
    waist_radius, waist_y : hourglass neck, defaults ``radius / 2`` and ``height / 2``
    arm_n, arm_rings : arm tube resolution (humanoid_proxy)
    """

    kind: str
    n: int = 64
    rings: int = 41
    height: float = 1.0
    radius: float = 0.5
    waist_radius: float | None = None
    waist_y: float | None = None
    arm_n: int = 16
    arm_rings: int = 4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown fixture kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 3 or self.arm_n < 3:
            raise ValueError("need at least 3 vertices per ring")
        if self.rings < 2 or self.arm_rings < 2:
            raise ValueError("need at least 2 rings")
        if not (self.height > 0 and self.radius > 0):
            raise ValueError("height and radius must be positive")
        if self.kind == "hourglass":
            wr, wy = self._waist()
            if not 0 < wr:
                raise ValueError("waist radius must be positive")
            if not 0 < wy < self.height:
                raise ValueError("waist height must lie strictly inside the body")
        if self.kind == "humanoid_proxy" and self.rings < len(_TORSO):
            raise ValueError(f"humanoid_proxy needs at least {len(_TORSO)} rings")

    def _waist(self) -> tuple[float, float]:
        wr = self.radius / 2 if self.waist_radius is None else self.waist_radius
        wy = self.height / 2 if self.waist_y is None else self.waist_y
        return wr, wy


@dataclass(frozen=True)
class Oracle:
    """
    Closed-form cross sections of a generated body.

    ring_y, ring_r : torso ring heights (ascending) and radii
    valid_below : slices at or above this height also cut the arms
    features : named heights and points of the design
    """

    kind: str
    n: int
    ring_y: tuple[float, ...]
    ring_r: tuple[float, ...]
    valid_below: float = math.inf
    features: dict = field(default_factory=dict)

    @property
    def factor(self) -> float:
        return 2.0 * self.n * math.sin(math.pi / self.n)

    def radius(self, y):
        return np.interp(y, self.ring_y, self.ring_r)

    def perimeter(self, y):
        """Boundary length of a horizontal slice at ``y`` (inside the valid range)."""
        return self.factor * self.radius(y)

    @property
    def max_slope(self) -> float:
        """Largest ``|dP/dy|`` over the torso."""
        dy = np.diff(self.ring_y)
        dr = np.abs(np.diff(self.ring_r))
        return float(self.factor * (dr / dy).max())

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "n": self.n,
            "perimeter_factor": self.factor,
            "max_perimeter_slope": self.max_slope,
            "ring_y": list(self.ring_y),
            "ring_r": list(self.ring_r),
            "features": self.features,
        }
        if math.isfinite(self.valid_below):
            out["valid_below"] = self.valid_below
        if len(set(self.ring_r)) == 1:
            out["perimeter"] = self.factor * self.ring_r[0]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class Fixture:
    mesh: Mesh
    skeleton: Skeleton
    oracle: Oracle


def _ring_heights(control: np.ndarray, rings: int) -> np.ndarray:
    """``rings`` ascending heights that include every control height."""
    lengths = np.diff(control)
    intervals = rings - 1
    if intervals < len(lengths):
        raise ValueError("not enough rings for the profile")
    ideal = intervals * lengths / lengths.sum()
    counts = np.maximum(np.floor(ideal).astype(int), 1)
    while counts.sum() < intervals:
        counts[int(np.argmax(ideal - counts))] += 1
    while counts.sum() > intervals:
        spare = np.where(counts > 1, counts - ideal, -np.inf)
        counts[int(np.argmax(spare))] -= 1
    heights = [control[0]]
    for lo, hi, count in zip(control[:-1], control[1:], counts):
        heights.extend(lo + (hi - lo) * np.arange(1, count + 1) / count)
        heights[-1] = hi
    return np.array(heights)


def revolve(ys, rs, n: int, cap_bottom: bool = True, cap_top: bool = True):
    """
    Surface of revolution about +y.

    A zero radius at either end becomes a single pole vertex; otherwise
    the end is closed by a fan around an axis vertex when capped, or
    left open.

    Returns
    -------
    vertices : (v, 3) float
    triangles : (t, 3) int
    """
    ys = np.asarray(ys, dtype=np.float64)
    rs = np.asarray(rs, dtype=np.float64)
    angle = 2.0 * np.pi * np.arange(n) / n
    cos, sin = np.cos(angle), np.sin(angle)

    bottom_pole = rs[0] == 0.0
    top_pole = rs[-1] == 0.0
    ring_index = np.arange(len(ys))[int(bottom_pole): len(ys) - int(top_pole)]

    verts = [
        np.column_stack([rs[k] * cos, np.full(n, ys[k]), rs[k] * sin]) for k in ring_index
    ]
    vertices = np.concatenate(verts)
    tris = []
    j = np.arange(n)
    jn = (j + 1) % n
    for row in range(len(ring_index) - 1):
        a = row * n + j
        b = row * n + jn
        c = (row + 1) * n + jn
        d = (row + 1) * n + j
        tris.append(np.column_stack([a, d, c]))
        tris.append(np.column_stack([a, c, b]))

    extra = []
    last = (len(ring_index) - 1) * n
    if bottom_pole or cap_bottom:
        center = len(vertices) + len(extra)
        extra.append((0.0, ys[0], 0.0))
        tris.append(np.column_stack([np.full(n, center), j, jn]))
    if top_pole or cap_top:
        center = len(vertices) + len(extra)
        extra.append((0.0, ys[-1], 0.0))
        tris.append(np.column_stack([np.full(n, center), last + jn, last + j]))
    if extra:
        vertices = np.concatenate([vertices, np.array(extra)])
    return vertices, np.concatenate(tris)


def _profile(spec: FixtureSpec) -> tuple[np.ndarray, np.ndarray]:
    if spec.kind == "cylinder":
        ys = _ring_heights(np.array([0.0, spec.height]), spec.rings)
        return ys, np.full(len(ys), spec.radius)
    if spec.kind == "sphere":
        phi = np.pi * np.arange(spec.rings) / (spec.rings - 1)
        ys = spec.radius * (1.0 - np.cos(phi))
        rs = spec.radius * np.sin(phi)
        ys[0], ys[-1] = 0.0, 2.0 * spec.radius
        rs[0] = rs[-1] = 0.0
        return ys, rs
    if spec.kind == "hourglass":
        wr, wy = spec._waist()
        ys = _ring_heights(np.array([0.0, wy, spec.height]), spec.rings)
        reach = max(wy, spec.height - wy)
        rs = wr + (spec.radius - wr) * ((ys - wy) / reach) ** 2
        return ys, rs
    control = np.array(_TORSO) * spec.height
    ys = _ring_heights(control[:, 0], spec.rings)
    return ys, np.interp(ys, control[:, 0], control[:, 1])


def _axis_skeleton(height: float) -> Skeleton:
    return Skeleton(
        {
            "R_Hip": (0.0, 0.15 * height, 0.0),
            "Pelvis": (0.0, 0.40 * height, 0.0),
            "Spine1": (0.0, 0.65 * height, 0.0),
            "R_Shoulder": (0.0, 0.90 * height, 0.0),
        }
    )


def _arms(spec: FixtureSpec, torso_vertex_count: int):
    h = spec.height
    r_arm = _ARM_RADIUS * h
    axis_y = _ARM_BOTTOM * h + r_arm
    inner = 0.5 * np.interp(axis_y, *np.array(_TORSO).T * h)
    along = np.linspace(inner, _ARM_REACH * h, spec.arm_rings)
    local, tris = revolve(along, np.full(spec.arm_rings, r_arm), spec.arm_n, cap_bottom=False)
    # tube axis along -x (right arm) and +x (left arm); both proper rotations
    right = np.column_stack([-local[:, 1], local[:, 0] + axis_y, local[:, 2]])
    left = np.column_stack([local[:, 1], local[:, 0] + axis_y, -local[:, 2]])
    vertices = np.concatenate([right, left])
    offset = torso_vertex_count
    triangles = np.concatenate([tris + offset, tris + offset + len(local)])
    return vertices, triangles


def generate(spec: FixtureSpec) -> Fixture:
    """Build the mesh, skeleton and closed-form oracle for ``spec``."""
    ys, rs = _profile(spec)
    vertices, triangles = revolve(ys, rs, spec.n)
    n = spec.n
    factor = 2.0 * n * math.sin(math.pi / n)

    if spec.kind != "humanoid_proxy":
        height = float(ys[-1])
        features = {"bottom": 0.0, "top": height}
        if spec.kind == "hourglass":
            wr, wy = spec._waist()
            features.update(waist_y=wy, waist_perimeter=factor * wr)
        if spec.kind == "sphere":
            equator = int(np.argmax(rs))
            features.update(equator_y=float(ys[equator]), equator_perimeter=factor * float(rs[equator]))
        oracle = Oracle(spec.kind, n, tuple(ys.tolist()), tuple(rs.tolist()), features=features)
        return Fixture(Mesh(vertices, triangles), _axis_skeleton(height), oracle)

    h = spec.height
    arm_v, arm_t = _arms(spec, len(vertices))
    mesh = Mesh(np.concatenate([vertices, arm_v]), np.concatenate([triangles, arm_t]))
    skeleton = Skeleton({k: tuple(c * h for c in v) for k, v in _HUMANOID_JOINTS.items()})

    torso = dict(_TORSO)
    armpit_y = _ARM_BOTTOM * h
    armpit_r = float(np.interp(armpit_y, ys, rs))
    features = {
        "pelvis_y": 0.20 * h,
        "waist_y": 0.40 * h,
        "chest_y": 0.58 * h,
        "axilla_y": armpit_y,
        "crease": [-armpit_r, armpit_y, 0.0],
        "pelvis_perimeter": factor * torso[0.20] * h,
        "waist_perimeter": factor * torso[0.40] * h,
        "chest_perimeter": factor * torso[0.58] * h,
    }
    oracle = Oracle(
        spec.kind,
        n,
        tuple(ys.tolist()),
        tuple(rs.tolist()),
        valid_below=armpit_y,
        features=features,
    )
    return Fixture(mesh, skeleton, oracle)
