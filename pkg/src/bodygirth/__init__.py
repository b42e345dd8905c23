"""Chest, waist and pelvis circumference from triangulated body meshes."""

__version__ = "0.1.0"

from .formats import (  # noqa: E402
    AnnotationRecord,
    ParseError,
    Skeleton,
    parse_annotation,
    parse_obj,
    parse_skeleton,
    write_annotation,
    write_obj,
    write_signature_csv,
)
from .measure import MeasurementSet, PipelineError, PipelineResult, measure, run_pipeline  # noqa: E402
from .mesh import Aabb, AxisMap, GeometryError, Mesh, bounding_box, lsa_align, validate  # noqa: E402
from .segmentation import AxillaResult, Regions, locate_axilla, segment_regions  # noqa: E402
from .slicing import (  # noqa: E402
    CrossSection,
    Signature,
    SlicePlane,
    boundary_length,
    mesh_signature,
    slice_at,
)

__all__ = [
    "Aabb",
    "AnnotationRecord",
    "AxillaResult",
    "AxisMap",
    "CrossSection",
    "GeometryError",
    "MeasurementSet",
    "Mesh",
    "ParseError",
    "PipelineError",
    "PipelineResult",
    "Regions",
    "Signature",
    "Skeleton",
    "SlicePlane",
    "bounding_box",
    "boundary_length",
    "locate_axilla",
    "lsa_align",
    "measure",
    "mesh_signature",
    "parse_annotation",
    "parse_obj",
    "parse_skeleton",
    "run_pipeline",
    "segment_regions",
    "slice_at",
    "validate",
    "write_annotation",
    "write_obj",
    "write_signature_csv",
]
