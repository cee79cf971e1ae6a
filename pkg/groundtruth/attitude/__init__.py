from groundtruth.attitude.triads import (
    KLAGENFURT,
    MAGNETIC_PRESETS,
    AntennaCalibration,
    DirectionalTriad,
    WorldMagneticModel,
    build_body_triad,
    build_world_triad,
    make_triad,
    world_mag_vector,
)
from groundtruth.attitude.solvers import (
    SOLVER_MAPPER,
    RotationEstimate,
    RotationMethod,
    solve_rotation,
    solve_rotation_linear,
    solve_rotation_tangent,
    solve_rotation_wahba,
    solver_dispatcher,
    tangent_jacobian,
    tangent_prediction,
    tangent_residual,
    wahba_svd,
)
from groundtruth.attitude.pose import (
    EpochError,
    TrajectoryEstimate,
    estimate_pose_epoch,
    estimate_trajectory,
    worst_case_heading_error,
)

__all__ = (
    "KLAGENFURT",
    "MAGNETIC_PRESETS",
    "AntennaCalibration",
    "DirectionalTriad",
    "WorldMagneticModel",
    "build_body_triad",
    "build_world_triad",
    "make_triad",
    "world_mag_vector",
    "SOLVER_MAPPER",
    "RotationEstimate",
    "RotationMethod",
    "solve_rotation",
    "solve_rotation_linear",
    "solve_rotation_tangent",
    "solve_rotation_wahba",
    "solver_dispatcher",
    "tangent_jacobian",
    "tangent_prediction",
    "tangent_residual",
    "wahba_svd",
    "EpochError",
    "TrajectoryEstimate",
    "estimate_pose_epoch",
    "estimate_trajectory",
    "worst_case_heading_error",
)
