import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from groundtruth.exceptions import NonMonotonicTime, SingularSystem
from groundtruth.geometry import (
    Pose,
    as_rotation,
    chordal_mean,
    compose_position,
    exp_so3,
    geodesic_distance,
    geometric_median,
    log_so3,
    project_to_so3,
    quaternion_to_rotation,
    rot_x,
    rot_z,
    rotation_to_quaternion,
    skew,
    unskew,
)
from groundtruth.timeseries import TimeSeries, Trajectory

from conftest import random_rotation

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)
vectors = st.tuples(finite, finite, finite).map(np.array)
# tangent vectors with norm strictly below pi
small_vectors = st.tuples(
    *[st.floats(min_value=-1.8, max_value=1.8, allow_nan=False, allow_infinity=False)] * 3
).map(np.array)


def test_skew_examples():
    assert np.array_equal(skew([0, 0, 0]), np.zeros((3, 3)))
    assert np.array_equal(skew([0, 0, 1]), np.array([[0, -1, 0], [1, 0, 0], [0, 0, 0]]))


@given(vectors, vectors)
def test_skew_is_cross_product(v, w):
    S = skew(v)
    assert np.allclose(S @ w, np.cross(v, w), atol=1e-9)
    assert np.allclose(S.T, -S)
    assert np.allclose(unskew(S), v)


def test_skew_rejects_bad_input():
    with pytest.raises(ValueError):
        skew([1.0, 2.0])
    with pytest.raises(ValueError):
        skew([np.nan, 0.0, 0.0])


def test_exp_examples():
    assert np.allclose(exp_so3([0, 0, 0]), np.eye(3))
    R = exp_so3([0, 0, np.pi / 2])
    assert np.allclose(R @ [1, 0, 0], [0, 1, 0], atol=1e-15)


def test_log_examples():
    assert np.allclose(log_so3(np.eye(3)), 0.0)
    assert np.allclose(log_so3(rot_z(np.pi / 2)), [0, 0, np.pi / 2])
    w = log_so3(exp_so3([np.pi, 0, 0]))
    assert np.isclose(np.linalg.norm(w), np.pi)
    assert np.allclose(np.abs(w), [np.pi, 0, 0], atol=1e-9)


def test_log_near_pi_recovers_axis():
    axis = np.array([1.0, 2.0, -2.0]) / 3.0
    w = log_so3(exp_so3((np.pi - 1e-5) * axis))
    assert np.allclose(w, (np.pi - 1e-5) * axis, atol=1e-6)


@given(small_vectors)
def test_exp_log_round_trip(w):
    assert np.allclose(log_so3(exp_so3(w)), w, atol=1e-9)


@given(small_vectors)
def test_exp_is_rotation(w):
    as_rotation(exp_so3(w))


def test_project_examples(rng):
    R = random_rotation(rng)
    assert np.allclose(project_to_so3(R), R, atol=1e-12)
    assert np.allclose(project_to_so3(2.0 * np.eye(3)), np.eye(3))
    with pytest.raises(SingularSystem):
        project_to_so3(np.zeros((3, 3)))


def test_project_noisy_rotation(rng):
    for _ in range(100):
        R = random_rotation(rng)
        noisy = R + rng.normal(0.0, 1e-3, (3, 3))
        assert geodesic_distance(project_to_so3(noisy), R) < 5e-3


@given(st.lists(finite, min_size=9, max_size=9))
@settings(max_examples=50)
def test_project_is_idempotent(entries):
    # spectral norm of the perturbation stays below 15
    M = 0.5 * np.array(entries).reshape(3, 3) + 20.0 * np.eye(3)
    P = project_to_so3(M)
    assert np.allclose(project_to_so3(P), P, atol=1e-9)


def test_compose_position_examples():
    assert np.allclose(
        compose_position([10, 0, 0], np.eye(3), np.eye(3), [0.424, -0.424, 0]), [9.576, 0.424, 0]
    )
    assert np.allclose(compose_position([1, 2, 3], rot_z(0.3), np.eye(3), [0, 0, 0]), [1, 2, 3])


def test_compose_position_inverts_forward_model(rng):
    R_W_I = random_rotation(rng)
    R_VG_I = random_rotation(rng)
    p_W_I = rng.normal(size=3) * 50.0
    p_I_G2 = rng.normal(size=3)
    p_W_G2 = p_W_I + R_W_I @ p_I_G2
    R_W_VG = R_W_I @ R_VG_I.T
    assert np.allclose(compose_position(p_W_G2, R_W_VG, R_VG_I, p_I_G2), p_W_I, atol=1e-12)


def test_quaternion_canonical_sign(rng):
    for _ in range(20):
        R = random_rotation(rng)
        q = rotation_to_quaternion(R)
        assert q[0] >= 0.0
        assert np.isclose(np.linalg.norm(q), 1.0)
        assert np.allclose(quaternion_to_rotation(q), R, atol=1e-12)
        assert np.allclose(quaternion_to_rotation(-q), R, atol=1e-12)


def test_pose_algebra(rng):
    a = Pose(random_rotation(rng), rng.normal(size=3))
    b = Pose(random_rotation(rng), rng.normal(size=3))
    ident = a @ a.inverse()
    assert np.allclose(ident.rotation, np.eye(3), atol=1e-12)
    assert np.allclose(ident.translation, 0.0, atol=1e-12)
    p = rng.normal(size=3)
    assert np.allclose((a @ b).transform(p), a.transform(b.transform(p)))
    assert np.allclose((a @ b).as_matrix(), a.as_matrix() @ b.as_matrix())


def test_chordal_mean_of_symmetric_pair():
    mean = chordal_mean(np.array([rot_x(0.2), rot_x(-0.2)]))
    assert np.allclose(mean, np.eye(3), atol=1e-12)


def test_geometric_median_resists_outlier():
    pts = np.vstack([np.zeros((9, 3)), [[10.0, 0.0, 0.0]]])
    assert np.allclose(geometric_median(pts), 0.0, atol=1e-9)


def _median_cost(x, pts):
    return np.sum(np.linalg.norm(pts - x, axis=1))


@given(st.lists(st.tuples(finite, finite, finite), min_size=3, max_size=12))
@settings(max_examples=50, deadline=None)
def test_geometric_median_is_optimal(points):
    pts = np.array(points)
    x = geometric_median(pts)
    best = _median_cost(x, pts)
    for step in np.vstack([np.eye(3), -np.eye(3)]) * 1e-3:
        assert best <= _median_cost(x + step, pts) + 1e-6 * (1.0 + best)


def test_timeseries_validation_and_interpolation():
    with pytest.raises(NonMonotonicTime):
        TimeSeries([0.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    series = TimeSeries([0.0, 1.0, 2.0], [[0.0, 0.0], [1.0, 2.0], [2.0, 4.0]])
    assert np.allclose(series.interpolate([0.5, 1.5]), [[0.5, 1.0], [1.5, 3.0]])
    assert np.all(np.isnan(series.interpolate([-0.1, 2.1])))
    idx, gap = series.nearest([0.4, 1.9])
    assert idx.tolist() == [0, 2]
    assert np.allclose(gap, [0.4, 0.1])


def test_trajectory_transformed_and_shift(rng):
    R = random_rotation(rng)
    traj = Trajectory([0.0, 1.0], np.array([np.eye(3), rot_z(0.1)]), [[1, 0, 0], [0, 1, 0]])
    moved = traj.transformed(R, [1.0, 2.0, 3.0])
    assert np.allclose(moved.positions[0], R @ [1, 0, 0] + [1, 2, 3])
    assert np.allclose(moved.rotations[1], R @ rot_z(0.1))
    assert np.allclose(traj.shift(0.5).t, [0.5, 1.5])
