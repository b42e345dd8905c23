"""
measure.py
----------

Chest, waist and pelvis circumference as extrema of the signature
inside each height band, and the end-to-end pipeline.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import __version__
from .formats import AnnotationRecord, Skeleton
from .mesh import AxisMap, Mesh, lsa_align
from .segmentation import DEFAULT_KNN, AxillaResult, Regions, locate_axilla, segment_regions
from .slicing import UP, Signature, mesh_signature

DEFAULT_STEP = 0.001


class PipelineError(Exception):
    """A pipeline stage failed; ``stage`` names it and ``__cause__`` holds the error."""

    def __init__(self, stage: str, error: Exception):
        self.stage = stage
        self.error = error
        super().__init__(f"{stage}: {error}")


@dataclass(frozen=True)
class MeasurementSet:
    chest: float
    waist: float
    pelvis: float
    chest_y: float
    waist_y: float
    pelvis_y: float
    step: float

    def record(self, mesh_id: str) -> AnnotationRecord:
        return AnnotationRecord(
            mesh_id=mesh_id,
            chest_m=self.chest,
            waist_m=self.waist,
            pelvis_m=self.pelvis,
            chest_y=self.chest_y,
            waist_y=self.waist_y,
            pelvis_y=self.pelvis_y,
            step_m=self.step,
            tool_version=__version__,
        )


def _extremum(signature: Signature, regions: Regions, name: str, largest: bool):
    inside = np.nonzero(regions.mask(name, signature.offsets))[0]
    if len(inside) == 0:
        raise ValueError(f"{name} region unsampled; decrease m")
    lengths = signature.lengths[inside]
    positive = lengths > 0.0
    if not positive.any():
        raise ValueError(f"empty cross-sections in {name} region")
    inside, lengths = inside[positive], lengths[positive]
    # offsets descend, so the first extremum is the highest one
    pick = int(np.argmax(lengths) if largest else np.argmin(lengths))
    return float(lengths[pick]), float(signature.offsets[inside[pick]])


def measure(signature: Signature, regions: Regions) -> MeasurementSet:
    """
    Chest: longest boundary in the chest band. Waist: shortest
    non-empty boundary in the waist band. Pelvis: longest boundary
    in the pelvis band. Ties go to the higher slice.
    """
    chest, chest_y = _extremum(signature, regions, "chest", largest=True)
    waist, waist_y = _extremum(signature, regions, "waist", largest=False)
    pelvis, pelvis_y = _extremum(signature, regions, "pelvis", largest=True)
    return MeasurementSet(chest, waist, pelvis, chest_y, waist_y, pelvis_y, signature.step)


@dataclass(frozen=True)
class PipelineResult:
    measurements: MeasurementSet
    signature: Signature
    regions: Regions
    axilla: AxillaResult


def run_pipeline(
    mesh: Mesh,
    skeleton: Skeleton,
    step: float = DEFAULT_STEP,
    k: int = DEFAULT_KNN,
    axis_map: AxisMap | None = None,
) -> PipelineResult:
    """
    Align (optional), find the axilla, build the bands, slice along +y
    and pick the three extrema. Failures are re-raised as
    ``PipelineError`` carrying the stage name.
    """
    stage = "align"
    try:
        if axis_map is not None and not axis_map.is_identity:
            mesh = lsa_align(mesh, axis_map)
            skeleton = skeleton.transformed(axis_map.apply)
        stage = "axilla"
        axilla = locate_axilla(mesh, skeleton, k)
        stage = "regions"
        regions = segment_regions(mesh, skeleton, axilla)
        stage = "signature"
        signature = mesh_signature(mesh, UP, step)
        stage = "measure"
        measurements = measure(signature, regions)
    except Exception as exc:
        raise PipelineError(stage, exc) from exc
    return PipelineResult(measurements, signature, regions, axilla)
