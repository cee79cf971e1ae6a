from groundtruth.markers.pairwise import (
    MarkerObservation,
    PairwiseTransform,
    extract_pairwise,
    filter_and_mean,
    group_by_image,
    inlier_mask,
)
from groundtruth.markers.field import (
    MarkerFieldCalibration,
    MarkerGraph,
    build_marker_graph,
    calibrate_field,
    marker_trajectory,
    randomized_paths,
    shortest_path,
    vehicle_pose_from_markers,
)

__all__ = (
    "MarkerObservation",
    "PairwiseTransform",
    "extract_pairwise",
    "filter_and_mean",
    "group_by_image",
    "inlier_mask",
    "MarkerFieldCalibration",
    "MarkerGraph",
    "build_marker_graph",
    "calibrate_field",
    "marker_trajectory",
    "randomized_paths",
    "shortest_path",
    "vehicle_pose_from_markers",
)
