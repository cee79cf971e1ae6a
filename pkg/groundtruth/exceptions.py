from typing import Optional, Sequence


class GroundTruthBaseException(Exception):
    """General base exception for the ground-truth toolkit."""

    pass


class DataException(GroundTruthBaseException):
    """The input data cannot be processed (CLI exit code 1)."""

    pass


class ConfigInvalidException(GroundTruthBaseException):
    """Exception raised for invalid configuration error (CLI exit code 2)."""

    pass


# Geometry / attitude


class DegenerateBaseline(DataException):
    """The two antenna positions coincide (baseline below the minimum)."""

    pass


class ParallelVectors(DataException):
    """Triad vectors are (anti-)parallel or zero, the cross product vanishes."""

    pass


class SingularSystem(DataException):
    """Linear least-squares system does not have full rank."""

    pass


class NonConvergence(DataException):
    """Iterative solver stopped at the iteration limit."""

    def __init__(self, msg: str, residual: Optional[float] = None) -> None:
        super().__init__(msg)
        self.residual = residual


class DegenerateSVD(DataException):
    """Attitude profile matrix has two vanishing singular values."""

    pass


# Time calibration


class TooFewSamples(DataException):
    pass


class InsufficientOverlap(DataException):
    """Not enough common time span between two signals or trajectories."""

    pass


class FlatSignal(DataException):
    """Signal has zero variance, a time offset is unobservable."""

    pass


# Alignment


class DegenerateGeometry(DataException):
    """Point set is collinear or coincident."""

    pass


class NonMonotonicResult(DataException):
    """Stitched trajectory would contain duplicate timestamps."""

    pass


# Magnetometer


class DegenerateFit(DataException):
    """Samples do not determine an ellipsoid (planar or great-circle coverage)."""

    pass


class IllConditioned(DataException):
    pass


# Markers


class DisconnectedMarker(DataException):
    """Markers without a path to the main marker."""

    def __init__(self, msg: str, markers: Sequence[int] = ()) -> None:
        super().__init__(msg)
        self.markers = list(markers)


class NoKnownMarkers(DataException):
    pass


# Vibration


class WindowTooLong(DataException):
    pass


class NoPeak(DataException):
    pass


class RankDeficient(DataException):
    """Too few distinct abscissae for the requested polynomial fit."""

    pass


class TauOutOfRange(DataException):
    pass


# Ingestion


class ParseError(DataException):
    """A CSV row could not be parsed."""

    def __init__(self, msg: str, line: Optional[int] = None) -> None:
        super().__init__(msg)
        self.line = line


class NonMonotonicTime(DataException):
    """Timestamps are not strictly increasing."""

    def __init__(self, msg: str, line: Optional[int] = None) -> None:
        super().__init__(msg)
        self.line = line


class MissingColumn(DataException):
    def __init__(self, msg: str, column: str = "") -> None:
        super().__init__(msg)
        self.column = column
