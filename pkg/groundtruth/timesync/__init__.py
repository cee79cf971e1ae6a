from groundtruth.timesync.xcorr import (
    SignalTrace,
    TimeOffset,
    differentiate,
    estimate_offset_xcorr,
    resample_common,
)
from groundtruth.timesync.cascade import (
    angular_rate_trace,
    baseline_heading_trace,
    magnetic_heading_trace,
    speed_trace,
    sync_gnss_pair,
    sync_imu_to_gt,
    sync_mag_to_vg,
)

__all__ = (
    "SignalTrace",
    "TimeOffset",
    "differentiate",
    "estimate_offset_xcorr",
    "resample_common",
    "angular_rate_trace",
    "baseline_heading_trace",
    "magnetic_heading_trace",
    "speed_trace",
    "sync_gnss_pair",
    "sync_imu_to_gt",
    "sync_mag_to_vg",
)
