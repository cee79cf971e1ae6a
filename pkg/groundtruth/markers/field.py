"""Marker-field calibration by averaging randomized paths through the pairwise graph."""

import heapq
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from groundtruth import log
from groundtruth.exceptions import DisconnectedMarker, NoKnownMarkers
from groundtruth.geometry import Pose, chordal_mean, geometric_median
from groundtruth.gt_globals import MEDIAN_TOL
from groundtruth.markers.pairwise import (
    MarkerObservation,
    PairwiseTransform,
    filter_and_mean,
    group_by_image,
)
from groundtruth.timeseries import Trajectory

Edge = Tuple[int, int]


@dataclass
class MarkerFieldCalibration:
    """Marker poses T_main_k relative to the main marker."""

    main_marker: int
    poses: Dict[int, Pose]
    initial_poses: Dict[int, Pose] = field(default_factory=dict)
    disconnected: List[int] = field(default_factory=list)


class MarkerGraph:
    """Undirected graph of markers; ``transform(a, b)`` is T_a_b."""

    def __init__(self, pairwise: Iterable[PairwiseTransform]) -> None:
        self._transforms: Dict[Edge, Pose] = {}
        self.adjacency: Dict[int, List[int]] = {}
        for pt in pairwise:
            mean = pt.mean if pt.mean is not None else filter_and_mean(pt)
            self._transforms[(pt.i, pt.j)] = mean
            self._transforms[(pt.j, pt.i)] = mean.inverse()
            self.adjacency.setdefault(pt.i, []).append(pt.j)
            self.adjacency.setdefault(pt.j, []).append(pt.i)
        for node in self.adjacency:
            self.adjacency[node] = sorted(set(self.adjacency[node]))
        self.edges: List[Edge] = sorted((min(e), max(e)) for e in self._transforms if e[0] > e[1])

    @property
    def nodes(self) -> List[int]:
        return sorted(self.adjacency)

    def transform(self, a: int, b: int) -> Pose:
        return self._transforms[(a, b)]

    def compose(self, path: Sequence[int]) -> Pose:
        pose = Pose.identity()
        for a, b in zip(path[:-1], path[1:]):
            pose = pose @ self.transform(a, b)
        return pose


def build_marker_graph(pairwise: Iterable[PairwiseTransform]) -> MarkerGraph:
    return MarkerGraph(pairwise)


def shortest_path(graph: MarkerGraph, source: int, target: int) -> Optional[List[int]]:
    """Fewest-hop path by breadth-first search with neighbours visited in id order."""
    if source not in graph.adjacency or target not in graph.adjacency:
        return None
    parent: Dict[int, Optional[int]] = {source: None}
    queue = deque([source])
    while queue:
        node = queue.popleft()
        if node == target:
            break
        for nxt in graph.adjacency[node]:
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
    if target not in parent:
        return None
    path = [target]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]


def _dijkstra(graph: MarkerGraph, source: int, target: int, cost: Dict[Edge, float]) -> List[int]:
    dist = {source: 0.0}
    parent: Dict[int, int] = {}
    heap = [(0.0, source)]
    done = set()
    while heap:
        d, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        if node == target:
            break
        for nxt in graph.adjacency[node]:
            nd = d + cost[(min(node, nxt), max(node, nxt))]
            if nd < dist.get(nxt, np.inf):
                dist[nxt] = nd
                parent[nxt] = node
                heapq.heappush(heap, (nd, nxt))
    path = [target]
    while path[-1] != source:
        path.append(parent[path[-1]])
    return path[::-1]


def randomized_paths(
    graph: MarkerGraph,
    source: int,
    target: int,
    n_paths: int,
    rng: np.random.Generator,
    penalty: float = 1.0,
    jitter: float = 0.5,
) -> List[List[int]]:
    """Cycle-free paths from cheapest-path searches with per-use penalties and random jitter.

    Every edge costs 1 + penalty·(times used so far) + jitter·U(0, 1), so successive paths
    spread over the graph instead of repeating the shortest one.
    """
    uses = {e: 0 for e in graph.edges}
    paths: List[List[int]] = []
    for _ in range(n_paths):
        noise = rng.uniform(size=len(graph.edges))
        cost = {e: 1.0 + penalty * uses[e] + jitter * u for e, u in zip(graph.edges, noise)}
        path = _dijkstra(graph, source, target, cost)
        for a, b in zip(path[:-1], path[1:]):
            uses[(min(a, b), max(a, b))] += 1
        paths.append(path)
    return paths


def _reachable(graph: MarkerGraph, source: int) -> set:
    seen = {source}
    queue = deque([source])
    while queue:
        for nxt in graph.adjacency.get(queue.popleft(), []):
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


def calibrate_field(
    pairwise: Iterable[PairwiseTransform],
    main: int = 0,
    n_paths: int = 32,
    seed: int = 0,
    path_penalty: float = 1.0,
    path_jitter: float = 0.5,
    markers: Optional[Iterable[int]] = None,
    strict: bool = False,
    max_workers: int = 4,
    median_tol: float = MEDIAN_TOL,
) -> MarkerFieldCalibration:
    """Pose of every marker relative to ``main``.

    Per marker the shortest path gives the initial pose; ``n_paths`` randomized paths are
    then fused, translation by geometric median and rotation by chordal mean. Markers
    without a path to ``main`` are listed in ``disconnected`` (raised when ``strict``).
    """
    graph = build_marker_graph(pairwise)
    known = set(graph.nodes) | set(markers or ()) | {main}
    reachable = _reachable(graph, main) if main in graph.adjacency else {main}
    disconnected = sorted(known - reachable)
    if disconnected:
        log.warning(f"markers without a path to main marker {main}: {disconnected}")
        if strict:
            raise DisconnectedMarker(f"markers {disconnected} are not connected to marker {main}", disconnected)

    targets = sorted(reachable - {main})

    def worker(target: int) -> Tuple[int, Pose, Pose]:
        initial = graph.compose(shortest_path(graph, main, target))
        rng = np.random.default_rng([seed, target])
        estimates = [
            graph.compose(p)
            for p in randomized_paths(graph, main, target, n_paths, rng, path_penalty, path_jitter)
        ]
        translation = geometric_median(np.array([e.translation for e in estimates]), tol=median_tol)
        rotation = chordal_mean(np.array([e.rotation for e in estimates]))
        return target, initial, Pose(rotation, translation)

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(worker, targets))

    poses = {main: Pose.identity()}
    initial_poses = {main: Pose.identity()}
    for target, initial, final in results:
        initial_poses[target] = initial
        poses[target] = final
    log.info(f"Calibrated {len(poses)} marker(s) relative to marker {main} with {n_paths} paths each")
    return MarkerFieldCalibration(main, poses, initial_poses, disconnected)


def _fuse(poses: List[Pose]) -> Pose:
    if len(poses) == 1:
        return poses[0]
    translation = geometric_median(np.array([p.translation for p in poses]))
    rotation = chordal_mean(np.array([p.rotation for p in poses]))
    return Pose(rotation, translation)


def vehicle_pose_from_markers(
    obs: Sequence[MarkerObservation],
    field: MarkerFieldCalibration,
    camera_to_body: Optional[Pose] = None,
) -> Pose:
    """Camera pose in the field frame from one image (body pose when ``camera_to_body``
    T_cam_body is given)."""
    candidates = []
    for o in obs:
        if o.marker_id not in field.poses:
            continue
        T_field_cam = field.poses[o.marker_id] @ o.pose.inverse()
        if camera_to_body is not None:
            T_field_cam = T_field_cam @ camera_to_body
        candidates.append(T_field_cam)
    if not candidates:
        raise NoKnownMarkers("none of the detected markers is part of the calibrated field")
    return _fuse(candidates)


def marker_trajectory(
    observations: Iterable[MarkerObservation],
    field: MarkerFieldCalibration,
    camera_to_body: Optional[Pose] = None,
) -> Trajectory:
    """Time-stamped trajectory from every image that has a timestamp and a known marker."""
    stamped: List[Tuple[float, Pose]] = []
    for image_id, per_image in sorted(group_by_image(observations).items()):
        obs = list(per_image.values())
        times = [o.t for o in obs if o.t is not None]
        if not times:
            continue
        try:
            stamped.append((times[0], vehicle_pose_from_markers(obs, field, camera_to_body)))
        except NoKnownMarkers:
            log.debug(f"image {image_id}: no calibrated marker visible")
    stamped.sort(key=lambda item: item[0])
    return Trajectory.from_poses(
        [t for t, _ in stamped], [p for _, p in stamped], source="marker"
    )
