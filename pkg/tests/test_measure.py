import numpy as np
import pytest

from bodygirth.formats import Skeleton
from bodygirth.measure import MeasurementSet, PipelineError, measure, run_pipeline
from bodygirth.mesh import AxisMap
from bodygirth.segmentation import Regions
from bodygirth.slicing import UP, Signature, mesh_signature
from bodygirth.synthetic import FixtureSpec, generate


def signature(offsets, lengths, step=0.01):
    return Signature(step, UP, np.array(offsets, float), np.array(lengths, float))


REGIONS = Regions(chest=(0.30, 0.40), waist=(0.20, 0.30), pelvis=(0.10, 0.20))


def test_chest_is_direct_argmax():
    sig = signature([0.35, 0.32, 0.31, 0.25, 0.15], [1, 3, 2, 1, 1])
    m = measure(sig, REGIONS)
    assert (m.chest, m.chest_y) == (3.0, 0.32)


def test_ties_go_to_the_highest_slice():
    sig = signature([0.39, 0.35, 0.31, 0.29, 0.25, 0.21, 0.19, 0.11], [2, 2, 1, 5, 4, 4, 6, 6])
    m = measure(sig, REGIONS)
    assert m.chest_y == 0.39
    assert (m.waist, m.waist_y) == (4.0, 0.25)
    assert m.pelvis_y == 0.19


def test_half_open_bounds():
    # 0.40 belongs to nothing, 0.30 to the chest, 0.20 to the waist
    sig = signature([0.40, 0.30, 0.20, 0.10], [9, 1, 1, 1])
    m = measure(sig, REGIONS)
    assert m.chest_y == 0.30 and m.waist_y == 0.20 and m.pelvis_y == 0.10


def test_empty_slices_are_not_a_waist():
    sig = signature([0.35, 0.28, 0.25, 0.15], [3, 0.0, 2, 1])
    assert measure(sig, REGIONS).waist == 2.0


def test_unsampled_region():
    sig = signature([0.35, 0.15], [1, 1])
    with pytest.raises(ValueError, match="waist region unsampled; decrease m"):
        measure(sig, REGIONS)


def test_region_with_only_empty_sections():
    sig = signature([0.35, 0.25, 0.15], [1, 0, 1])
    with pytest.raises(ValueError, match="empty cross-sections in waist region"):
        measure(sig, REGIONS)


def test_hourglass_waist():
    fixture = generate(FixtureSpec("hourglass", n=64, rings=41, height=1.0, radius=0.5, waist_radius=0.2, waist_y=0.25))
    step = 0.007
    sig = mesh_signature(fixture.mesh, UP, step)
    regions = Regions(chest=(0.6, 0.9), waist=(0.1, 0.6), pelvis=(0.02, 0.1))
    m = measure(sig, regions)
    oracle = fixture.oracle
    assert abs(m.waist_y - 0.25) <= step
    assert oracle.features["waist_perimeter"] == pytest.approx(2 * 64 * 0.2 * np.sin(np.pi / 64))
    assert abs(m.waist - oracle.features["waist_perimeter"]) <= oracle.max_slope * step
    assert m.waist == pytest.approx(oracle.perimeter(m.waist_y), abs=1e-12)


def test_constant_cylinder_gives_equal_circumferences():
    fixture = generate(FixtureSpec("cylinder", n=64, rings=101, radius=0.3, height=1.0))
    regions = Regions(chest=(0.6, 0.9), waist=(0.4, 0.6), pelvis=(0.1, 0.4))
    # slices through the rings: every cut is the same set of ring edges
    m = measure(mesh_signature(fixture.mesh, UP, 0.01), regions)
    assert m.chest == m.waist == m.pelvis
    # between rings the collinear pieces differ in the last bits only
    m = measure(mesh_signature(fixture.mesh, UP, 0.0073), regions)
    assert m.chest == pytest.approx(m.waist, abs=1e-12) and m.pelvis == pytest.approx(m.waist, abs=1e-12)


def test_humanoid_pipeline(humanoid):
    result = run_pipeline(humanoid.mesh, humanoid.skeleton, 0.001, 80)
    m, f = result.measurements, humanoid.oracle.features
    assert abs(m.chest_y - f["chest_y"]) <= 0.001
    assert abs(m.waist_y - f["waist_y"]) <= 0.001
    assert abs(m.pelvis_y - f["pelvis_y"]) <= 0.001
    for name in ("chest", "waist", "pelvis"):
        lower, upper = result.regions.band(name)
        assert lower <= getattr(m, f"{name}_y") < upper
    assert m.chest > m.waist < m.pelvis
    assert m.step == 0.001


def test_pipeline_is_deterministic(humanoid):
    a = run_pipeline(humanoid.mesh, humanoid.skeleton, 0.002)
    b = run_pipeline(humanoid.mesh, humanoid.skeleton, 0.002)
    assert a.measurements == b.measurements
    assert a.signature == b.signature
    assert a.axilla == b.axilla


def test_pipeline_aligns_first(humanoid):
    # store the body z-up, x mirrored; the axis map brings it back
    to_file = AxisMap.parse("-x,z,y")
    stored = humanoid.mesh.transformed(to_file.apply(humanoid.mesh.vertices))
    skeleton = humanoid.skeleton.transformed(to_file.apply)
    back = to_file.inverse()
    aligned = run_pipeline(stored, skeleton, 0.002, axis_map=back)
    direct = run_pipeline(humanoid.mesh, humanoid.skeleton, 0.002)
    assert aligned.measurements == direct.measurements


def test_stage_errors_carry_the_stage(humanoid, cylinder):
    with pytest.raises(PipelineError) as err:
        run_pipeline(humanoid.mesh, humanoid.skeleton, 0.0)
    assert err.value.stage == "signature"
    # a cylinder's axilla ray lands on its bottom rim, below every joint
    with pytest.raises(PipelineError) as err:
        run_pipeline(cylinder.mesh, cylinder.skeleton)
    assert err.value.stage == "regions"
    joints = dict(humanoid.skeleton.joints)
    joints["R_Shoulder"] = (9.0, 9.0, 9.0)
    with pytest.raises(PipelineError) as err:
        run_pipeline(humanoid.mesh, Skeleton(joints))
    assert err.value.stage == "axilla"


def _stability(measure_at):
    for step in (0.02, 0.01, 0.005):
        coarse_sig, c = measure_at(step)
        _, f = measure_at(step / 2)
        bound = np.abs(np.diff(coarse_sig.lengths)).max()
        assert f.waist <= c.waist + 1e-12
        assert f.chest >= c.chest - bound and f.pelvis >= c.pelvis - bound
        for name in ("chest", "waist", "pelvis"):
            assert abs(getattr(c, name) - getattr(f, name)) <= bound


def test_refinement_stability_humanoid(humanoid):
    def measure_at(step):
        result = run_pipeline(humanoid.mesh, humanoid.skeleton, step)
        return result.signature, result.measurements

    _stability(measure_at)


def test_refinement_stability_hourglass():
    mesh = generate(FixtureSpec("hourglass", rings=31, waist_y=0.4)).mesh
    regions = Regions(chest=(0.6, 0.95), waist=(0.2, 0.6), pelvis=(0.05, 0.2))

    def measure_at(step):
        sig = mesh_signature(mesh, UP, step)
        return sig, measure(sig, regions)

    _stability(measure_at)


def test_record(humanoid):
    m = MeasurementSet(1.0, 0.8, 1.1, 0.6, 0.4, 0.2, 0.001)
    rec = m.record("body")
    assert rec.mesh_id == "body" and rec.chest_m == 1.0 and rec.step_m == 0.001
    assert rec.tool_version
