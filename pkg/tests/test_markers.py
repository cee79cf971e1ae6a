import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from groundtruth.exceptions import DisconnectedMarker, NoKnownMarkers
from groundtruth.geometry import Pose, geodesic_distance, geometric_median, rot_x, rot_z
from groundtruth.markers import (
    MarkerFieldCalibration,
    MarkerObservation,
    PairwiseTransform,
    build_marker_graph,
    calibrate_field,
    extract_pairwise,
    filter_and_mean,
    inlier_mask,
    marker_trajectory,
    randomized_paths,
    shortest_path,
    vehicle_pose_from_markers,
)
from groundtruth.markers import field as field_module
from groundtruth.synthetic import grid_cameras, marker_grid, marker_observations


def relative_to_main(grid, main=0):
    T_main = grid[main].inverse()
    return {k: T_main @ p for k, p in grid.items()}


def translation(x, y=0.0, z=0.0, R=None):
    return Pose(np.eye(3) if R is None else R, np.array([x, y, z]))


def test_marker_id_must_be_non_negative():
    with pytest.raises(ValueError):
        MarkerObservation(0, -1, Pose.identity())


def test_pairwise_requires_ordered_ids():
    with pytest.raises(ValueError):
        PairwiseTransform(1, 3)


def test_extract_pairwise_example():
    obs = [
        MarkerObservation(0, 3, translation(1.0)),
        MarkerObservation(0, 1, translation(0.0, 1.0)),
        MarkerObservation(1, 5, translation(0.0)),
    ]
    pairs = extract_pairwise(obs)
    assert [(p.i, p.j) for p in pairs] == [(3, 1)]
    assert np.allclose(pairs[0].samples[0].translation, [-1.0, 1.0, 0.0])


def test_extract_pairwise_is_sorted():
    obs = [MarkerObservation(img, m, translation(0.1 * m)) for img in (1, 0) for m in (4, 0, 2)]
    pairs = extract_pairwise(obs)
    assert [(p.i, p.j) for p in pairs] == [(2, 0), (4, 0), (4, 2)]
    assert all(len(p.samples) == 2 for p in pairs)


def test_outlier_rejected():
    samples = [translation(1.0 + 0.01 * k) for k in range(-4, 5)] + [translation(5.0)]
    keep = inlier_mask(samples)
    assert not keep[-1]
    assert keep[4]
    mean = filter_and_mean(PairwiseTransform(1, 0, samples))
    assert np.allclose(mean.translation, [1.0, 0.0, 0.0])


def test_rotation_outlier_rejected():
    samples = [translation(1.0, R=rot_z(0.001 * k)) for k in range(-4, 5)] + [translation(1.0, R=rot_z(1.0))]
    assert not inlier_mask(samples)[-1]
    mean = filter_and_mean(PairwiseTransform(1, 0, samples))
    assert geodesic_distance(mean.rotation, np.eye(3)) < 1e-3


def test_two_samples_average_to_midpoint():
    pt = PairwiseTransform(1, 0, [translation(0.0), translation(2.0, R=rot_z(0.2))])
    assert inlier_mask(pt.samples).all()
    mean = filter_and_mean(pt)
    assert np.allclose(mean.translation, [1.0, 0.0, 0.0])
    assert np.allclose(mean.rotation, rot_z(0.1))


def test_empty_pair_rejected():
    with pytest.raises(ValueError):
        filter_and_mean(PairwiseTransform(1, 0))


def chain():
    T_1_0 = Pose(rot_z(0.3), np.array([0.5, 0.1, 0.0]))
    T_2_1 = Pose(rot_x(0.1), np.array([0.2, -0.4, 0.05]))
    return T_1_0, T_2_1, [PairwiseTransform(1, 0, [T_1_0]), PairwiseTransform(2, 1, [T_2_1])]


def test_graph_transforms_and_paths():
    T_1_0, T_2_1, pairs = chain()
    graph = build_marker_graph(pairs)
    assert graph.nodes == [0, 1, 2]
    assert graph.edges == [(0, 1), (1, 2)]
    assert np.allclose(graph.transform(0, 1).as_matrix(), T_1_0.inverse().as_matrix())
    assert shortest_path(graph, 0, 2) == [0, 1, 2]
    assert shortest_path(graph, 0, 9) is None
    paths = randomized_paths(graph, 0, 2, 5, np.random.default_rng(0))
    assert paths == [[0, 1, 2]] * 5


def test_chain_calibration():
    T_1_0, T_2_1, pairs = chain()
    field = calibrate_field(pairs, n_paths=4, max_workers=1)
    expected = T_1_0.inverse() @ T_2_1.inverse()
    assert np.allclose(field.poses[2].as_matrix(), expected.as_matrix(), atol=1e-9)
    assert np.allclose(field.initial_poses[2].as_matrix(), expected.as_matrix(), atol=1e-12)
    assert np.allclose(field.poses[0].as_matrix(), np.eye(4))
    assert field.disconnected == []


def test_isolated_marker():
    _, _, pairs = chain()
    field = calibrate_field(pairs, markers=[0, 1, 2, 7], n_paths=2)
    assert field.disconnected == [7]
    assert 7 not in field.poses
    with pytest.raises(DisconnectedMarker) as exc:
        calibrate_field(pairs, markers=[0, 1, 2, 7], strict=True)
    assert exc.value.markers == [7]


def test_noisy_grid_calibration():
    grid = marker_grid()
    obs = marker_observations(grid, grid_cameras(grid), noise=0.002, seed=4)
    field = calibrate_field(extract_pairwise(obs))
    truth = relative_to_main(grid)
    assert sorted(field.poses) == sorted(truth)
    for k, pose in field.poses.items():
        assert np.linalg.norm(pose.translation - truth[k].translation) < 0.03
        assert np.degrees(geodesic_distance(pose.rotation, truth[k].rotation)) < 1.0


def test_corrupted_edge_outvoted_by_random_paths():
    grid = marker_grid()
    pairs = extract_pairwise(marker_observations(grid, grid_cameras(grid), visible_radius=0.75))
    for pt in pairs:
        if (pt.i, pt.j) == (12, 6):
            good = filter_and_mean(pt)
            pt.mean = Pose(good.rotation, good.translation + np.array([0.3, 0.0, 0.0]))
    truth = relative_to_main(grid)[12]
    field = calibrate_field(pairs)
    # breadth-first search reaches marker 12 through the corrupted diagonal
    assert np.linalg.norm(field.initial_poses[12].translation - truth.translation) > 0.2
    assert np.linalg.norm(field.poses[12].translation - truth.translation) < 0.01


def test_calibration_is_deterministic():
    grid = marker_grid()
    pairs = extract_pairwise(marker_observations(grid, grid_cameras(grid), noise=0.002, seed=1))
    a = calibrate_field(pairs, seed=3, max_workers=1)
    b = calibrate_field(pairs, seed=3, max_workers=4)
    for k in a.poses:
        assert np.array_equal(a.poses[k].as_matrix(), b.poses[k].as_matrix())


def test_vehicle_pose_from_markers():
    field = MarkerFieldCalibration(0, {0: Pose.identity(), 1: translation(1.0)})
    T_field_cam = Pose(rot_x(np.pi), np.array([0.5, 0.0, 2.0]))
    obs = [MarkerObservation(0, k, T_field_cam.inverse() @ field.poses[k]) for k in (0, 1)]
    assert np.allclose(vehicle_pose_from_markers(obs[1:], field).as_matrix(), T_field_cam.as_matrix())
    assert np.allclose(vehicle_pose_from_markers(obs, field).as_matrix(), T_field_cam.as_matrix())

    T_cam_body = translation(0.0, 0.0, 0.1)
    body = vehicle_pose_from_markers(obs, field, camera_to_body=T_cam_body)
    assert np.allclose(body.translation, [0.5, 0.0, 1.9])

    with pytest.raises(NoKnownMarkers):
        vehicle_pose_from_markers([MarkerObservation(0, 9, Pose.identity())], field)


def test_marker_trajectory_follows_cameras():
    grid = marker_grid()
    cameras = grid_cameras(grid)
    obs = marker_observations(grid, cameras, t0=2.0, rate=10.0)
    traj = marker_trajectory(obs, MarkerFieldCalibration(0, grid))
    assert traj.source == "marker"
    assert len(traj) == len(cameras)
    assert np.allclose(traj.t, 2.0 + np.arange(len(cameras)) / 10.0)
    assert np.allclose(traj.positions, [c.translation for c in cameras], atol=1e-9)


def test_pairwise_samples_compose_on_exact_data():
    grid = marker_grid()
    pairs = {(p.i, p.j): p for p in extract_pairwise(marker_observations(grid, grid_cameras(grid)))}
    triples = [(i, j, k) for (i, j) in pairs for (jj, k) in pairs if jj == j and (i, k) in pairs]
    assert triples
    for i, j, k in triples:
        composed = pairs[(i, j)].samples[0] @ pairs[(j, k)].samples[0]
        for direct in pairs[(i, k)].samples:
            assert np.allclose(composed.as_matrix(), direct.as_matrix(), atol=1e-12)


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_calibration_independent_of_enumeration_order(seed):
    rng = np.random.default_rng(seed)
    grid = marker_grid()
    obs = marker_observations(grid, grid_cameras(grid))
    reference = calibrate_field(extract_pairwise(obs), n_paths=8)
    shuffled_obs = [obs[k] for k in rng.permutation(len(obs))]
    pairs = extract_pairwise(shuffled_obs)
    shuffled = calibrate_field([pairs[k] for k in rng.permutation(len(pairs))], n_paths=8)
    assert sorted(shuffled.poses) == sorted(reference.poses)
    for k, pose in reference.poses.items():
        assert np.allclose(shuffled.poses[k].as_matrix(), pose.as_matrix(), atol=1e-9)


def test_median_tolerance_reaches_translation_fusion(monkeypatch):
    seen = []

    def recording_median(points, tol=0.0, **kwargs):
        seen.append(tol)
        return geometric_median(points, tol=tol, **kwargs)

    monkeypatch.setattr(field_module, "geometric_median", recording_median)
    _, _, pairs = chain()
    calibrate_field(pairs, n_paths=2, median_tol=1e-4)
    assert seen and set(seen) == {1e-4}
