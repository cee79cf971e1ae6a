"""Pairwise marker transforms from co-visible detections and their robust means."""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from groundtruth import log
from groundtruth.geometry import Pose, chordal_mean, geodesic_distance

# Slack on the 1-sigma bound so samples exactly at one standard deviation survive
SIGMA_SLACK = 1e-9


@dataclass(frozen=True)
class MarkerObservation:
    """Detection of ``marker_id`` in image ``image_id``; ``pose`` is T_cam_marker."""

    image_id: int
    marker_id: int
    pose: Pose
    t: Optional[float] = None

    def __post_init__(self) -> None:
        if self.marker_id < 0:
            raise ValueError(f"marker id must be non-negative, got {self.marker_id}")


@dataclass
class PairwiseTransform:
    """Samples of T_i_j (pose of marker j in the frame of marker i), j < i."""

    i: int
    j: int
    samples: List[Pose] = field(default_factory=list)
    mean: Optional[Pose] = None

    def __post_init__(self) -> None:
        if not self.j < self.i:
            raise ValueError(f"pairwise transform requires j < i, got i={self.i}, j={self.j}")


def group_by_image(observations: Iterable[MarkerObservation]) -> Dict[int, Dict[int, MarkerObservation]]:
    images: Dict[int, Dict[int, MarkerObservation]] = defaultdict(dict)
    for obs in observations:
        per_image = images[obs.image_id]
        if obs.marker_id in per_image:
            log.warning(f"image {obs.image_id}: duplicate detection of marker {obs.marker_id} ignored")
            continue
        per_image[obs.marker_id] = obs
    return dict(images)


def extract_pairwise(observations: Iterable[MarkerObservation]) -> List[PairwiseTransform]:
    """Every co-visible pair (i, j), j < i, contributes pose_i⁻¹ ∘ pose_j per image."""
    acc: Dict[Tuple[int, int], PairwiseTransform] = {}
    for image_id, per_image in sorted(group_by_image(observations).items()):
        ids = sorted(per_image)
        for a, i in enumerate(ids):
            T_i_cam = per_image[i].pose.inverse()
            for j in ids[:a]:
                key = (i, j)
                if key not in acc:
                    acc[key] = PairwiseTransform(i, j)
                acc[key].samples.append(T_i_cam @ per_image[j].pose)
    log.debug(f"extracted {len(acc)} marker pairs")
    return [acc[key] for key in sorted(acc)]


def inlier_mask(samples: List[Pose]) -> np.ndarray:
    """Samples within one standard deviation per translation component and in rotation.

    The rotation statistic is the geodesic distance to the chordal mean, bounded by its RMS.
    """
    n = len(samples)
    if n <= 2:
        return np.ones(n, dtype=bool)
    t = np.array([s.translation for s in samples])
    mu = t.mean(axis=0)
    sigma = t.std(axis=0)
    keep = np.all(np.abs(t - mu) <= sigma * (1.0 + SIGMA_SLACK) + 1e-12, axis=1)

    R_mean = chordal_mean(np.array([s.rotation for s in samples]))
    dist = np.array([geodesic_distance(R_mean, s.rotation) for s in samples])
    rms = float(np.sqrt(np.mean(dist * dist)))
    keep &= dist <= rms * (1.0 + SIGMA_SLACK) + 1e-12
    return keep


def filter_and_mean(pt: PairwiseTransform) -> Pose:
    """1-sigma outlier filter, then arithmetic mean translation and chordal mean rotation.

    If the filter rejects every sample the unfiltered mean is returned and a warning logged.
    """
    if not pt.samples:
        raise ValueError(f"pair ({pt.i}, {pt.j}) has no samples")
    keep = inlier_mask(pt.samples)
    if not np.any(keep):
        log.warning(f"pair ({pt.i}, {pt.j}): all {len(pt.samples)} samples rejected, using unfiltered mean")
        keep = np.ones(len(pt.samples), dtype=bool)
    chosen = [s for s, k in zip(pt.samples, keep) if k]
    translation = np.mean([s.translation for s in chosen], axis=0)
    rotation = chordal_mean(np.array([s.rotation for s in chosen]))
    return Pose(rotation, translation)
