"""
mesh.py
-------

Triangle mesh container, validation, bounding boxes and
signed-permutation axis remapping (used to bring meshes into
LSA orientation: +x right-to-left, +y inferior-to-superior,
+z posterior-to-anterior).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

AXES = "xyz"


class GeometryError(ValueError):
    """Raised when a geometric operation cannot produce a result."""


def _frozen(array, dtype) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Triangle soup in meters.

    Parameters
    ----------
    vertices : (n, 3) float
      Vertex positions.
    triangles : (m, 3) int
      Indexes into ``vertices``.
    """

    vertices: np.ndarray
    triangles: np.ndarray

    def __post_init__(self):
        vertices = _frozen(self.vertices, np.float64).reshape((-1, 3))
        triangles = _frozen(self.triangles, np.int64).reshape((-1, 3))
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "triangles", triangles)

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return NotImplemented
        return np.array_equal(self.vertices, other.vertices) and np.array_equal(
            self.triangles, other.triangles
        )

    __hash__ = None

    @property
    def triangle_points(self) -> np.ndarray:
        """(m, 3, 3) float: corner positions of every triangle."""
        return self.vertices[self.triangles]

    def transformed(self, vertices) -> "Mesh":
        """Same topology with new vertex positions."""
        return Mesh(vertices, self.triangles)

    def translated(self, offset) -> "Mesh":
        return self.transformed(self.vertices + np.asarray(offset, dtype=np.float64))

    def scaled(self, factor: float) -> "Mesh":
        return self.transformed(self.vertices * float(factor))


@dataclass
class ValidationReport:
    """Invariant violations (``findings``) and non-fatal ``warnings``."""

    findings: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def __bool__(self) -> bool:
        # truthy when there is something to report
        return bool(self.findings)


def validate(mesh: Mesh, max_listed: int = 10) -> ValidationReport:
    """
    Check the mesh invariants without raising.

    Zero-area triangles with three distinct indices are reported
    as warnings only; they add nothing to any cross section.
    """
    report = ValidationReport()
    vertices, triangles = mesh.vertices, mesh.triangles
    count = len(vertices)

    if count < 3:
        report.findings.append(f"too few vertices: {count} < 3")
    if len(triangles) < 1:
        report.findings.append("no triangles")

    bad = ~np.isfinite(vertices).all(axis=1)
    for i in np.nonzero(bad)[0][:max_listed]:
        report.findings.append(f"non-finite coordinate at vertex {i}")
    if bad.sum() > max_listed:
        report.findings.append(f"... {bad.sum() - max_listed} more non-finite vertices")

    if len(triangles) == 0:
        return report

    out_of_range = ((triangles < 0) | (triangles >= count)).any(axis=1)
    for i in np.nonzero(out_of_range)[0][:max_listed]:
        report.findings.append(
            f"triangle {i} index out of range: {triangles[i].tolist()} (vertex count {count})"
        )

    degenerate = (
        (triangles[:, 0] == triangles[:, 1])
        | (triangles[:, 1] == triangles[:, 2])
        | (triangles[:, 0] == triangles[:, 2])
    )
    for i in np.nonzero(degenerate)[0][:max_listed]:
        report.findings.append(f"triangle {i} repeats an index: {triangles[i].tolist()}")

    usable = ~(out_of_range | degenerate)
    if usable.any() and not bad.any():
        tri = vertices[triangles[usable]]
        area2 = np.linalg.norm(
            np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1
        )
        zero = np.count_nonzero(area2 == 0.0)
        if zero:
            report.warnings.append(f"{zero} zero-area triangles")
    return report


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box."""

    min: tuple[float, float, float]
    max: tuple[float, float, float]

    @property
    def extents(self) -> np.ndarray:
        return np.subtract(self.max, self.min)


def bounding_box(mesh: Mesh) -> Aabb:
    if len(mesh.vertices) == 0:
        raise GeometryError("bounding box of an empty mesh")
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    return Aabb(tuple(float(v) for v in lo), tuple(float(v) for v in hi))


@dataclass(frozen=True)
class AxisMap:
    """
    Signed permutation of the coordinate axes.

    Output axis ``i`` takes ``signs[i] * input[source[i]]``.
    ``AxisMap.parse("x,-z,y")`` maps (1, 2, 3) to (1, -3, 2).
    """

    source: tuple[int, int, int] = (0, 1, 2)
    signs: tuple[int, int, int] = (1, 1, 1)

    def __post_init__(self):
        if sorted(self.source) != [0, 1, 2]:
            raise ValueError(f"axis map source must permute 0,1,2: {self.source}")
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError(f"axis map signs must be +1 or -1: {self.signs}")

    @classmethod
    def parse(cls, text: str) -> "AxisMap":
        tokens = [t.strip().lower() for t in text.split(",")]
        if len(tokens) != 3:
            raise ValueError(f"axis map needs three comma separated axes: {text!r}")
        source, signs = [], []
        for token in tokens:
            sign = 1
            if token[:1] in "+-":
                sign = -1 if token[0] == "-" else 1
                token = token[1:]
            if token not in AXES or len(token) != 1:
                raise ValueError(f"unknown axis {token!r} in {text!r}")
            source.append(AXES.index(token))
            signs.append(sign)
        return cls(tuple(source), tuple(signs))

    def __str__(self) -> str:
        return ",".join(
            ("-" if s < 0 else "") + AXES[a] for a, s in zip(self.source, self.signs)
        )

    @property
    def is_identity(self) -> bool:
        return self.source == (0, 1, 2) and self.signs == (1, 1, 1)

    def inverse(self) -> "AxisMap":
        source = [0, 0, 0]
        signs = [1, 1, 1]
        for out_axis, (src, sign) in enumerate(zip(self.source, self.signs)):
            source[src] = out_axis
            signs[src] = sign
        return AxisMap(tuple(source), tuple(signs))

    def apply(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        # negation and reindexing are exact in floating point
        return points[..., list(self.source)] * np.array(self.signs, dtype=np.float64)


def lsa_align(mesh: Mesh, axis_map: AxisMap) -> Mesh:
    """Remap mesh coordinates with ``axis_map``; topology is untouched."""
    if axis_map.is_identity:
        return mesh
    return mesh.transformed(axis_map.apply(mesh.vertices))
