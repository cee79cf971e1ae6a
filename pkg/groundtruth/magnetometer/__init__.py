from groundtruth.magnetometer.intrinsic import (
    EllipsoidCalibration,
    correct_sample,
    correct_samples,
    fit_ellipsoid,
    sphere_coverage_deficiency,
)
from groundtruth.magnetometer.extrinsic import (
    MagExtrinsics,
    StaticOrientationSet,
    build_static_orientation_set,
    detect_static_windows,
    estimate_extrinsics,
    extrinsic_residual,
)

__all__ = (
    "EllipsoidCalibration",
    "correct_sample",
    "correct_samples",
    "fit_ellipsoid",
    "sphere_coverage_deficiency",
    "MagExtrinsics",
    "StaticOrientationSet",
    "build_static_orientation_set",
    "detect_static_windows",
    "estimate_extrinsics",
    "extrinsic_residual",
)
