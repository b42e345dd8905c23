"""
formats.py
----------

Text formats: a Wavefront OBJ subset, skeleton JSON, annotation
JSON/CSV and signature CSV. Everything is in meters.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, fields
from typing import IO, Iterable, Mapping, Union

import numpy as np

from .mesh import Mesh

TextSource = Union[str, IO[str]]

REQUIRED_JOINTS = ("Pelvis", "Spine1", "R_Hip", "R_Shoulder")

ANNOTATION_HEADER = (
    "mesh_id",
    "chest_m",
    "waist_m",
    "pelvis_m",
    "chest_y",
    "waist_y",
    "pelvis_y",
    "step_m",
)
SIGNATURE_HEADER = ("y", "boundary_length")


class ParseError(ValueError):
    """Malformed input. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.message = message
        self.line = line
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


def _read(text: TextSource) -> str:
    return text if isinstance(text, str) else text.read()


# -----------------------------
# OBJ
# -----------------------------
def parse_obj(text: TextSource, source: str | None = None) -> Mesh:
    """
    Read ``v`` and ``f`` records of a Wavefront OBJ.

    Face corners may be ``i``, ``i/t``, ``i//n`` or ``i/t/n``; only
    the vertex index is used. Negative indices count back from the
    latest vertex. Polygons are fan-triangulated from their first
    corner. Every other record is ignored.
    """
    vertices: list[tuple[float, float, float]] = []
    triangles: list[tuple[int, int, int]] = []
    face_lines: list[int] = []

    for lineno, raw in enumerate(io.StringIO(_read(text)), start=1):
        line = raw.split("#", 1)[0]
        toks = line.split()
        if not toks:
            continue
        key = toks[0]
        if key == "v":
            if len(toks) < 4:
                raise ParseError("vertex needs three coordinates", lineno, source)
            try:
                # optional w / per-vertex colour after xyz is ignored
                vertices.append((float(toks[1]), float(toks[2]), float(toks[3])))
            except ValueError:
                raise ParseError(
                    f"non-numeric vertex coordinate in {line.strip()!r}", lineno, source
                ) from None
        elif key == "f":
            corners = toks[1:]
            if len(corners) < 3:
                raise ParseError(
                    f"face needs at least 3 vertices, got {len(corners)}", lineno, source
                )
            idx = []
            for corner in corners:
                head = corner.split("/", 1)[0]
                try:
                    i = int(head)
                except ValueError:
                    raise ParseError(f"bad face index {corner!r}", lineno, source) from None
                if i > 0:
                    i -= 1
                elif i < 0:
                    i += len(vertices)
                    if i < 0:
                        raise ParseError(
                            f"relative index {head} reaches before the first vertex",
                            lineno,
                            source,
                        )
                else:
                    raise ParseError("face index 0 is invalid (indices are 1-based)", lineno, source)
                idx.append(i)
            for a, b in zip(idx[1:-1], idx[2:]):
                triangles.append((idx[0], a, b))
                face_lines.append(lineno)

    count = len(vertices)
    for tri, lineno in zip(triangles, face_lines):
        if max(tri) >= count:
            raise ParseError(
                f"face index {max(tri) + 1} out of range ({count} vertices)", lineno, source
            )
    return Mesh(
        np.array(vertices, dtype=np.float64).reshape((-1, 3)),
        np.array(triangles, dtype=np.int64).reshape((-1, 3)),
    )


def write_obj(mesh: Mesh) -> str:
    """OBJ text with shortest round-trip float formatting."""
    out = io.StringIO()
    for x, y, z in mesh.vertices.tolist():
        out.write(f"v {x!r} {y!r} {z!r}\n")
    for a, b, c in (mesh.triangles + 1).tolist():
        out.write(f"f {a} {b} {c}\n")
    return out.getvalue()


# -----------------------------
# Skeleton
# -----------------------------
@dataclass(frozen=True)
class Skeleton:
    """Named joint positions. Extra joints beyond the required four are kept."""

    joints: Mapping[str, tuple[float, float, float]]

    def __post_init__(self):
        joints = {}
        for name, point in self.joints.items():
            joints[str(name)] = tuple(float(c) for c in point)
        object.__setattr__(self, "joints", joints)
        for name in REQUIRED_JOINTS:
            if name not in joints:
                raise ValueError(f"missing joint {name}")
        for name, point in joints.items():
            if len(point) != 3:
                raise ValueError(f"joint {name} needs 3 coordinates, got {len(point)}")
        for name in REQUIRED_JOINTS:
            if not all(math.isfinite(c) for c in joints[name]):
                raise ValueError(f"joint {name} has a non-finite coordinate")
        # vertical ordering is only meaningful after alignment; checked when
        # the regions are built

    def __getitem__(self, name: str) -> np.ndarray:
        return np.array(self.joints[name], dtype=np.float64)

    def transformed(self, func) -> "Skeleton":
        """Apply ``func`` to every joint position, an (n, 3) array."""
        names = list(self.joints)
        points = func(np.array([self.joints[n] for n in names], dtype=np.float64))
        return Skeleton(dict(zip(names, np.asarray(points).tolist())))

    def to_json(self) -> str:
        return json.dumps({"joints": {k: list(v) for k, v in self.joints.items()}}, indent=2) + "\n"


def parse_skeleton(
    text: TextSource,
    joint_map: Mapping[str, str] | None = None,
    source: str | None = None,
) -> Skeleton:
    """
    Parse ``{"joints": {"<name>": [x, y, z], ...}}``.

    ``joint_map`` maps a required joint name to the name used in
    the file, e.g. ``{"R_Shoulder": "R_Collar"}``.
    """
    try:
        payload = json.loads(_read(text))
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno, source) from None
    if not isinstance(payload, dict) or not isinstance(payload.get("joints"), dict):
        raise ParseError('expected an object with a "joints" mapping', None, source)

    raw = payload["joints"]
    joints: dict[str, tuple] = {}
    for name, point in raw.items():
        if not isinstance(point, (list, tuple)) or not all(
            isinstance(c, (int, float)) and not isinstance(c, bool) for c in point
        ):
            raise ParseError(f"joint {name} must be a list of numbers", None, source)
        joints[name] = tuple(point)
    for canonical, alias in (joint_map or {}).items():
        if alias in raw:
            joints[canonical] = tuple(raw[alias])
    try:
        return Skeleton(joints)
    except ValueError as exc:
        raise ParseError(str(exc), None, source) from None


# -----------------------------
# Annotations
# -----------------------------
@dataclass(frozen=True)
class AnnotationRecord:
    mesh_id: str
    chest_m: float
    waist_m: float
    pelvis_m: float
    chest_y: float
    waist_y: float
    pelvis_y: float
    step_m: float
    tool_version: str = ""

    def rounded(self, digits: int = 6) -> "AnnotationRecord":
        values = {
            f.name: round(getattr(self, f.name), digits)
            if isinstance(getattr(self, f.name), float)
            else getattr(self, f.name)
            for f in fields(self)
        }
        return AnnotationRecord(**values)


_FLOAT_FIELDS = ANNOTATION_HEADER[1:]


def _fmt(value: float) -> str:
    text = f"{value:.6f}"
    # keep "-0.000000" out of the files
    return "0.000000" if text == "-0.000000" else text


def write_annotation(records: Iterable[AnnotationRecord], format: str = "json") -> str:
    """Serialize records with six fixed decimals (meters)."""
    records = list(records)
    if format == "csv":
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(ANNOTATION_HEADER)
        for r in records:
            writer.writerow([r.mesh_id] + [_fmt(getattr(r, k)) for k in _FLOAT_FIELDS])
        return out.getvalue()
    if format == "json":
        # floats are written by hand so the decimals stay fixed
        rows = []
        for r in records:
            items = [f'"mesh_id": {json.dumps(r.mesh_id)}']
            items += [f'"{k}": {_fmt(getattr(r, k))}' for k in _FLOAT_FIELDS]
            items.append(f'"tool_version": {json.dumps(r.tool_version)}')
            rows.append("    {" + ", ".join(items) + "}")
        body = ",\n".join(rows)
        return '{\n  "records": [\n' + body + ("\n" if rows else "") + "  ]\n}\n"
    raise ValueError(f"unknown annotation format {format!r}")


def parse_annotation(text: TextSource, format: str = "json") -> list[AnnotationRecord]:
    text = _read(text)
    if format == "csv":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if tuple(header or ()) != ANNOTATION_HEADER:
            raise ParseError(f"unexpected annotation header {header}", 1)
        records = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(ANNOTATION_HEADER):
                raise ParseError(f"expected {len(ANNOTATION_HEADER)} columns", lineno)
            try:
                values = [float(v) for v in row[1:]]
            except ValueError:
                raise ParseError("non-numeric annotation value", lineno) from None
            records.append(AnnotationRecord(row[0], *values))
        return records
    if format == "json":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON: {exc.msg}", exc.lineno) from None
        return [
            AnnotationRecord(
                mesh_id=row["mesh_id"],
                tool_version=row.get("tool_version", ""),
                **{k: float(row[k]) for k in _FLOAT_FIELDS},
            )
            for row in payload["records"]
        ]
    raise ValueError(f"unknown annotation format {format!r}")


def write_signature_csv(signature) -> str:
    """Two columns ``y,boundary_length``, highest slice first."""
    offsets = np.asarray(signature.offsets)
    if len(offsets) == 0:
        raise ValueError("cannot write an empty signature")
    out = io.StringIO()
    out.write(",".join(SIGNATURE_HEADER) + "\n")
    for y, length in zip(offsets.tolist(), np.asarray(signature.lengths).tolist()):
        out.write(f"{_fmt(y)},{_fmt(length)}\n")
    return out.getvalue()
