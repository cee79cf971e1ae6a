import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from groundtruth.alignment import (
    Correspondences,
    RigidAlignment,
    align_segments,
    alignment_cost,
    match_by_time,
    solve_rigid_alignment,
    stitch_trajectory,
)
from groundtruth.exceptions import DegenerateGeometry, InsufficientOverlap, NonMonotonicResult
from groundtruth.geometry import exp_so3, geodesic_distance, rot_x, rot_z
from groundtruth.synthetic import FlightProfile
from groundtruth.timeseries import Trajectory

from conftest import random_rotation

R_TRUE = rot_z(0.7) @ rot_x(0.02)
T_TRUE = np.array([3.0, -2.0, 0.5])


def segment(k0, k1, source="gnss", rate=20.0):
    t = np.arange(k0, k1 + 1) / rate
    profile = FlightProfile()
    return Trajectory(t, profile.rotation(t), profile.position(t), source=source)


def to_local(traj):
    """Express ``traj`` in the frame that R_TRUE, T_TRUE maps into the world."""
    return traj.transformed(R_TRUE.T, -R_TRUE.T @ T_TRUE)


def with_noise(traj, sigma, rng):
    return Trajectory(
        traj.t, traj.rotations, traj.positions + rng.normal(0.0, sigma, traj.positions.shape),
        traj.weights, traj.source,
    )


def test_identity_correspondence(rng):
    a = rng.normal(size=(10, 3))
    al = solve_rigid_alignment(Correspondences(a, a))
    assert np.allclose(al.rotation, np.eye(3), atol=1e-12)
    assert np.allclose(al.translation, 0.0, atol=1e-12)
    assert al.rms_residual < 1e-12
    assert not al.weighted


def test_forward_transform_recovered(rng):
    a = rng.normal(size=(10, 3))
    b = a @ rot_z(np.radians(30)).T + [1.0, 2.0, 3.0]
    al = solve_rigid_alignment(Correspondences(a, b))
    assert np.allclose(al.rotation, rot_z(np.radians(30)), atol=1e-10)
    assert np.allclose(al.translation, [1.0, 2.0, 3.0], atol=1e-10)


def test_reflection_is_never_returned(rng):
    a = rng.normal(size=(10, 3))
    b = a * [1.0, 1.0, -1.0]
    al = solve_rigid_alignment(Correspondences(a, b))
    assert np.isclose(np.linalg.det(al.rotation), 1.0)


def test_degenerate_geometry():
    with pytest.raises(DegenerateGeometry):
        solve_rigid_alignment(Correspondences(np.eye(3)[:2], np.eye(3)[:2]))
    line = np.outer(np.arange(5.0), [1.0, 2.0, 3.0])
    with pytest.raises(DegenerateGeometry):
        solve_rigid_alignment(Correspondences(line, line))


def test_correspondence_validation():
    with pytest.raises(ValueError):
        Correspondences(np.zeros((3, 3)), np.zeros((4, 3)))
    with pytest.raises(ValueError):
        Correspondences(np.eye(3), np.eye(3), weights=[1.0, -1.0, 1.0])


def test_match_by_time_rejects_large_gaps():
    ref = segment(0, 20)
    sparse = Trajectory([0.2, 0.51, 5.0], np.tile(np.eye(3), (3, 1, 1)), np.zeros((3, 3)))
    idx_ref, idx_sparse = match_by_time(ref, sparse, max_gap=0.02)
    assert idx_ref.tolist() == [4, 10]
    assert idx_sparse.tolist() == [0, 1]


def test_align_segments_exact():
    outdoor = segment(0, 200)
    transition = to_local(segment(100, 300, source="marker"))
    al = align_segments(outdoor, transition)
    assert np.allclose(al.rotation, R_TRUE, atol=1e-9)
    assert np.allclose(al.translation, T_TRUE, atol=1e-9)
    assert al.n_pairs == 101


def test_align_segments_disjoint():
    with pytest.raises(InsufficientOverlap):
        align_segments(segment(0, 50), to_local(segment(100, 150, source="marker")))


def test_align_segments_uses_outdoor_weights():
    outdoor = segment(0, 100)
    outdoor.weights = np.linspace(1.0, 2.0, len(outdoor))
    al = align_segments(outdoor, to_local(segment(0, 100, source="marker")))
    assert al.weighted
    assert not align_segments(outdoor, to_local(segment(0, 100)), use_weights=False).weighted


def test_three_noisy_approaches(rng):
    sigma = 0.02
    outdoors = [segment(k, k + 100) for k in (0, 300, 600)]
    transitions = [with_noise(to_local(segment(k, k + 100, "marker")), sigma, rng) for k in (0, 300, 600)]
    al = align_segments(outdoors, transitions)
    assert al.n_pairs == 303
    assert sigma < al.rms_residual < 2.5 * sigma
    assert np.degrees(geodesic_distance(al.rotation, R_TRUE)) < 0.5
    local = np.vstack([t.positions for t in transitions])
    err = np.linalg.norm(al.apply_points(local) - (local @ R_TRUE.T + T_TRUE), axis=1)
    assert err.max() < 0.01


def test_stitch_single_and_identity():
    seg = segment(0, 10)
    assert stitch_trajectory([seg], []) is seg
    a = segment(0, 10)
    b = segment(11, 20)
    stitched = stitch_trajectory([b, a], [RigidAlignment.identity()])
    assert np.allclose(stitched.t, np.arange(21) / 20.0)
    assert np.allclose(stitched.positions, FlightProfile().position(stitched.t))


def test_stitch_rejects_equal_priority_duplicates():
    with pytest.raises(NonMonotonicResult):
        stitch_trajectory([segment(0, 10), segment(10, 20)], [RigidAlignment.identity()])


def test_stitch_argument_checks():
    with pytest.raises(ValueError):
        stitch_trajectory([], [])
    with pytest.raises(ValueError):
        stitch_trajectory([segment(0, 10), segment(11, 20)], [])


def test_three_segment_flight_seams(rng):
    sigma = 0.02
    gnss_a = segment(0, 240)
    marker = to_local(segment(160, 400, "marker"))
    gnss_b = segment(360, 600)
    noisy = with_noise(marker, sigma, rng)
    al = align_segments([gnss_a, gnss_b], [noisy, noisy])
    assert np.degrees(geodesic_distance(al.rotation, R_TRUE)) < 0.5

    stitched = stitch_trajectory([gnss_a, marker, gnss_b], [al, RigidAlignment.identity()])
    assert np.all(np.diff(stitched.t) > 0)
    assert np.allclose(stitched.t, np.arange(601) / 20.0)
    truth = FlightProfile().position(stitched.t)
    for seam in (8.0, 20.0):
        k = int(np.argmin(np.abs(stitched.t - seam)))
        jump = (stitched.positions[k + 1] - stitched.positions[k - 1]) - (truth[k + 1] - truth[k - 1])
        assert np.linalg.norm(jump) < 0.03
    inside = (stitched.t >= 8.0) & (stitched.t <= 20.0)
    assert np.max(np.linalg.norm(stitched.positions[inside] - truth[inside], axis=1)) < 0.03


def noisy_correspondences(rng, n=20, weighted=True):
    a = rng.normal(scale=5.0, size=(n, 3))
    R = random_rotation(rng)
    b = a @ R.T + rng.normal(size=3) + rng.normal(0.0, 0.05, (n, 3))
    weights = rng.uniform(0.5, 2.0, n) if weighted else None
    return Correspondences(a, b, weights)


def test_alignment_cost_is_globally_minimal(rng):
    c = noisy_correspondences(rng)
    al = solve_rigid_alignment(c)
    best = alignment_cost(al.rotation, al.translation, c)
    for _ in range(10000):
        R = exp_so3(rng.normal(0.0, 0.05, 3)) @ al.rotation
        t = al.translation + rng.normal(0.0, 0.05, 3)
        assert alignment_cost(R, t, c) >= best - 1e-9 * (1.0 + best)


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_alignment_is_equivariant(seed):
    rng = np.random.default_rng(seed)
    c = noisy_correspondences(rng)
    Q, q = random_rotation(rng), rng.normal(scale=10.0, size=3)
    al = solve_rigid_alignment(c)
    moved = solve_rigid_alignment(Correspondences(c.points_a, c.points_b @ Q.T + q, c.weights))
    assert geodesic_distance(moved.rotation, Q @ al.rotation) < 1e-9
    assert np.allclose(moved.translation, Q @ al.translation + q, atol=1e-8)
    assert moved.rms_residual == pytest.approx(al.rms_residual, rel=1e-9, abs=1e-12)


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_doubling_weights_leaves_alignment_unchanged(seed):
    rng = np.random.default_rng(seed)
    c = noisy_correspondences(rng)
    al = solve_rigid_alignment(c)
    doubled = solve_rigid_alignment(Correspondences(c.points_a, c.points_b, 2.0 * c.weights))
    assert np.allclose(doubled.rotation, al.rotation, atol=1e-12)
    assert np.allclose(doubled.translation, al.translation, atol=1e-10)
    assert doubled.rms_residual == pytest.approx(al.rms_residual, rel=1e-9)
