import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from groundtruth.attitude import world_mag_vector
from groundtruth.config import PipelineConfig
from groundtruth.geometry import rot_x, rot_y, rot_z
from groundtruth.synthetic import GRAVITY, simulate_flight, write_fixtures
from groundtruth.timeseries import TimeSeries


def random_rotation(rng):
    q = rng.normal(size=4)
    return Rotation.from_quat(q / np.linalg.norm(q)).as_matrix()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def exact_flight():
    """Zero clock offsets and no noise: every stream shares the GNSS 1 lattice."""
    return simulate_flight(duration=20.0, offsets=(0.0, 0.0, 0.0))


@pytest.fixture(scope="session")
def offset_flight():
    return simulate_flight(duration=60.0)


@pytest.fixture
def flight_config():
    """Configuration matching the synthetic antennas and magnetometer distortion."""

    def build(flight, **sections):
        data = dict(flight.config)
        data.update(sections)
        return PipelineConfig.from_dict(data)

    return build


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixtures")
    flight = simulate_flight(duration=30.0)
    paths = write_fixtures(str(out), flight)
    return out, paths, flight


STATIC_ORIENTATIONS = [
    (0.0, 0.0, 0.0),
    (0.3, 0.5, 0.0),
    (1.2, 0.0, 0.6),
    (2.0, -0.7, 0.3),
    (-1.0, 0.2, -0.8),
    (3.0, 1.0, 1.2),
]


def static_session(R_I_M, wmm, orientations=STATIC_ORIENTATIONS, rate=50.0, hold=2.0, turn=1.0):
    """IMU and magnetometer streams holding each (yaw, pitch, roll) still for ``hold`` seconds.

    Between holds the vehicle turns with a gyro norm well above the static threshold.
    """
    m_w = world_mag_vector(wmm)
    rows_imu, rows_mag = [], []
    n_hold, n_turn = int(hold * rate), int(turn * rate)
    for yaw, pitch, roll in orientations:
        R = rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)
        f = R.T @ np.array([0.0, 0.0, GRAVITY])
        m = R_I_M.T @ R.T @ m_w
        rows_imu += [np.concatenate([np.zeros(3), f])] * n_hold
        rows_mag += [m] * n_hold
        rows_imu += [np.concatenate([[0.5, 0.0, 0.0], f])] * n_turn
        rows_mag += [m] * n_turn
    t = np.arange(len(rows_imu)) / rate
    return TimeSeries(t, np.array(rows_imu)), TimeSeries(t, np.array(rows_mag))
