from groundtruth.alignment.rigid import (
    Correspondences,
    RigidAlignment,
    alignment_cost,
    solve_rigid_alignment,
)
from groundtruth.alignment.segments import (
    SEGMENT_PRIORITY,
    align_segments,
    match_by_time,
    stitch_trajectory,
)

__all__ = (
    "Correspondences",
    "RigidAlignment",
    "alignment_cost",
    "solve_rigid_alignment",
    "SEGMENT_PRIORITY",
    "align_segments",
    "match_by_time",
    "stitch_trajectory",
)
