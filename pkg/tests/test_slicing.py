import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bodygirth.mesh import Mesh
from bodygirth.slicing import (
    PLANE_EPS,
    CrossSection,
    SlicePlane,
    boundary_length,
    mesh_signature,
    slice_at,
    slice_offsets,
    unit,
)
from bodygirth.synthetic import FixtureSpec, generate
from oracles import naive_boundary_length
from test_mesh import unit_cube

UP = (0.0, 1.0, 0.0)


def section_length(mesh, offset, normal=UP):
    return boundary_length(slice_at(mesh, SlicePlane(normal, offset)))


def test_unit_cube_mid_slice_is_a_unit_square():
    section = slice_at(unit_cube(), SlicePlane(UP, 0.5))
    assert len(section) == 8  # two segments per side face
    pts = section.segments.reshape(-1, 3)
    assert np.allclose(pts[:, 1], 0.5)
    assert boundary_length(section) == pytest.approx(4.0, abs=1e-15)


def test_plane_above_mesh_is_empty():
    section = slice_at(unit_cube(), SlicePlane(UP, 2.0))
    assert len(section) == 0
    assert boundary_length(section) == 0.0


def test_two_disjoint_squares():
    cube = unit_cube()
    far = cube.translated((3.0, 0.0, 0.0))
    mesh = Mesh(
        np.concatenate([cube.vertices, far.vertices]),
        np.concatenate([cube.triangles, far.triangles + 8]),
    )
    assert section_length(mesh, 0.25) == pytest.approx(8.0, abs=1e-14)


def test_cylinder_mid_height_has_one_segment_per_side(cylinder):
    # rings at 0, .25, ..., 1; 0.4 lies between rings so each side quad
    # (two triangles) emits two collinear pieces
    section = slice_at(cylinder.mesh, SlicePlane(UP, 0.4))
    assert len(section) == 2 * 64
    # at a ring height only the triangles above contribute, one edge per side
    section = slice_at(cylinder.mesh, SlicePlane(UP, 0.5))
    assert len(section) == 64
    expected = 64 * 2 * 0.5 * math.sin(math.pi / 64)
    assert expected == pytest.approx(3.140331, abs=1e-6)
    assert boundary_length(section) == pytest.approx(expected, abs=1e-12)


def test_vertex_on_plane_with_others_on_opposite_sides():
    mesh = Mesh([[0, 0, 0], [1, 1, 0], [1, -1, 0]], [[0, 1, 2]])
    section = slice_at(mesh, SlicePlane(UP, 0.0))
    assert sorted(map(tuple, section.segments[0].tolist())) == [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)]
    assert boundary_length(section) == 1.0


def test_touching_and_coplanar_triangles_emit_nothing():
    touching = Mesh([[0, 0, 0], [1, 1, 0], [-1, 1, 0]], [[0, 1, 2]])
    assert len(slice_at(touching, SlicePlane(UP, 0.0))) == 0
    flat = Mesh([[0, 0, 0], [1, 0, 0], [0, 0, 1]], [[0, 1, 2]])
    assert len(slice_at(flat, SlicePlane(UP, 0.0))) == 0


def test_edge_in_plane_is_counted_once():
    # two triangles sharing the edge (0,0,0)-(1,0,0), one above one below
    mesh = Mesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, -1, 0]], [[0, 1, 2], [0, 1, 3]])
    section = slice_at(mesh, SlicePlane(UP, 0.0))
    assert section.faces.tolist() == [0]
    assert boundary_length(section) == 1.0


def test_snapping_near_vertices():
    mesh = Mesh([[0, 0, 0], [1, 1, 0], [1, -1, 0]], [[0, 1, 2]])
    # within 1e-12 of the top corner: snapped onto it, a single-corner touch
    assert len(slice_at(mesh, SlicePlane(UP, 1.0 - 1e-13))) == 0
    assert len(slice_at(mesh, SlicePlane(UP, 1.0 - 1e-11))) == 1
    # snapped onto the middle corner: segment through that corner
    section = slice_at(mesh, SlicePlane(UP, 1e-13))
    assert section.segments[0][0].tolist() == [0.0, 0.0, 0.0]
    assert boundary_length(section) == pytest.approx(1.0, abs=1e-12)


def test_endpoints_lie_on_the_plane(humanoid):
    rng = np.random.default_rng(3)
    for _ in range(20):
        normal = unit(rng.normal(size=3))
        heights = humanoid.mesh.vertices @ np.array(normal)
        offset = rng.uniform(heights.min(), heights.max())
        section = slice_at(humanoid.mesh, SlicePlane(normal, offset))
        d = section.segments.reshape(-1, 3) @ np.array(normal) - offset
        assert np.abs(d).max() <= PLANE_EPS


def test_slice_plane_requires_unit_normal():
    with pytest.raises(ValueError):
        SlicePlane((0.0, 2.0, 0.0), 0.0)
    with pytest.raises(ValueError):
        unit((0.0, 0.0, 0.0))


def test_empty_section_length():
    assert boundary_length(CrossSection(SlicePlane(), np.zeros((0, 2, 3)), np.zeros(0, int))) == 0.0


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.2, 5.0))
def test_length_is_rigid_invariant_and_scales_linearly(seed, scale):
    rng = np.random.default_rng(seed)
    mesh = generate(FixtureSpec("hourglass", n=24, rings=9)).mesh
    normal = np.array(unit(rng.normal(size=3)))
    offset = float(rng.uniform(*np.sort((mesh.vertices @ normal)[[0, -1]])))
    base = section_length(mesh, offset, normal)

    rot = random_rotation(rng)
    shift = rng.normal(size=3)
    moved = mesh.transformed(mesh.vertices @ rot.T + shift)
    moved_normal = tuple(rot @ normal)
    moved_offset = offset + float(np.dot(rot @ normal, shift))
    assert section_length(moved, moved_offset, unit(moved_normal)) == pytest.approx(base, abs=1e-9)

    assert section_length(mesh.scaled(scale), offset * scale, tuple(normal)) == pytest.approx(
        base * scale, rel=1e-9, abs=1e-12
    )


def test_matches_brute_force_on_ring_planes(small_humanoid):
    mesh = small_humanoid.mesh
    # planes through whole rings of vertices exercise every snapping case
    for y in np.unique(mesh.vertices[:, 1])[::3]:
        assert section_length(mesh, y) == pytest.approx(naive_boundary_length(mesh, UP, y), abs=1e-12)


def test_slice_offsets():
    np.testing.assert_array_equal(slice_offsets(1.0, 0.0, 0.25), [1.0, 0.75, 0.5, 0.25, 0.0])
    offsets = slice_offsets(1.0, 0.0, 0.3)
    np.testing.assert_allclose(offsets, [1.0, 0.7, 0.4, 0.1, 0.0])
    assert offsets[-1] == 0.0
    np.testing.assert_array_equal(slice_offsets(1.0, 0.0, 5.0), [1.0, 0.0])
    with pytest.raises(ValueError):
        slice_offsets(1.0, 0.0, 0.0)


@given(st.floats(-2, 2), st.floats(0.01, 3), st.floats(1e-3, 1.0))
def test_slice_offsets_properties(bottom, span, step):
    offsets = slice_offsets(bottom + span, bottom, step)
    gaps = -np.diff(offsets)
    assert offsets[0] == bottom + span and offsets[-1] == bottom
    assert (gaps > 0).all()
    assert np.allclose(gaps[:-1], step, rtol=1e-6)
    assert gaps[-1] <= step * (1 + 1e-6)


def test_cylinder_signature(cylinder):
    sig = mesh_signature(cylinder.mesh, UP, 0.25)
    assert len(sig) == 5
    np.testing.assert_array_equal(sig.offsets, [1.0, 0.75, 0.5, 0.25, 0.0])
    expected = 64 * math.sin(math.pi / 64)
    # interior slices pass through rings; the top rim belongs to the walls
    # below it and is not counted, the bottom rim is
    assert np.all(np.abs(sig.lengths[1:-1] - expected) <= 1e-12)
    assert sig.lengths[0] == 0.0


def test_signature_step_validation(cylinder):
    with pytest.raises(ValueError, match="step must be positive"):
        mesh_signature(cylinder.mesh, UP, 0.0)
    sig = mesh_signature(cylinder.mesh, UP, 10.0)
    np.testing.assert_array_equal(sig.offsets, [1.0, 0.0])


def test_signature_agrees_with_slice_at(humanoid):
    sig = mesh_signature(humanoid.mesh, UP, 0.0037)
    for q, length in list(zip(sig.offsets, sig.lengths))[::7]:
        assert section_length(humanoid.mesh, q) == length


def test_body_sized_signature_has_one_slice_per_millimeter():
    body = generate(FixtureSpec("humanoid_proxy", n=62, rings=109, height=1.7))
    assert len(body.mesh.vertices) == 6890
    sig = mesh_signature(body.mesh, UP, 0.001)
    assert len(sig) == round(1.7 / 0.001) + 1


def test_forty_slices(humanoid):
    height = np.ptp(humanoid.mesh.vertices[:, 1])
    sig = mesh_signature(humanoid.mesh, UP, height / 39)
    assert len(sig) == 40


@pytest.mark.parametrize("kind", ["sphere", "cylinder"])
def test_convex_signature_is_unimodal(kind):
    mesh = generate(FixtureSpec(kind, n=48, rings=33)).mesh
    lengths = mesh_signature(mesh, UP, 0.013).lengths
    peak = int(np.argmax(lengths))
    tol = 1e-12
    assert (np.diff(lengths[: peak + 1]) >= -tol).all()
    assert (np.diff(lengths[peak:]) <= tol).all()


def test_sphere_signature_peaks_at_equator():
    sphere = generate(FixtureSpec("sphere", radius=1.0, n=128, rings=65))
    sig = mesh_signature(sphere.mesh, UP, 0.01)
    assert sig.offsets[int(np.argmax(sig.lengths))] == pytest.approx(1.0, abs=1e-9)
    assert sig.lengths[0] == 0.0 and sig.lengths[-1] == 0.0


def test_signature_does_not_depend_on_batching(humanoid, monkeypatch):
    from bodygirth import slicing

    whole = mesh_signature(humanoid.mesh, UP, 0.003)
    monkeypatch.setattr(slicing, "_BATCH", 997)
    assert mesh_signature(humanoid.mesh, UP, 0.003) == whole
