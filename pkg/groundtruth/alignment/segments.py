"""Segment alignment and stitching into one continuous trajectory."""

from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from groundtruth import log
from groundtruth.alignment.rigid import Correspondences, RigidAlignment, solve_rigid_alignment
from groundtruth.exceptions import InsufficientOverlap, NonMonotonicResult
from groundtruth.gt_globals import DUPLICATE_TIME_TOL, MAX_MATCH_GAP
from groundtruth.timeseries import Trajectory

SEGMENT_PRIORITY: Dict[str, int] = {
    "mocap": 3,
    "marker": 2,
    "gnss": 1,
}


def match_by_time(
    reference: Trajectory, sparse: Trajectory, max_gap: float = MAX_MATCH_GAP
) -> Tuple[np.ndarray, np.ndarray]:
    """Nearest reference sample for every sparse sample, rejecting gaps above ``max_gap``.

    Returns index arrays ``(idx_reference, idx_sparse)`` of equal length.
    """
    if not len(reference) or not len(sparse):
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    idx, gap = reference.position_series().nearest(sparse.t)
    keep = gap <= max_gap
    return idx[keep], np.flatnonzero(keep)


def _overlap(a: Trajectory, b: Trajectory, window: Optional[float]) -> Tuple[float, float]:
    if not len(a) or not len(b):
        return 0.0, -1.0
    start = max(a.t[0], b.t[0])
    stop = min(a.t[-1], b.t[-1])
    if window is not None:
        stop = min(stop, start + window)
    return start, stop


def align_segments(
    outdoor: Union[Trajectory, Sequence[Trajectory]],
    transition: Union[Trajectory, Sequence[Trajectory]],
    overlap_window: Optional[float] = None,
    max_gap: float = MAX_MATCH_GAP,
    use_weights: bool = True,
) -> RigidAlignment:
    """Rigid transform taking the transition frame into the outdoor (world) frame.

    ``outdoor`` and ``transition`` may be single trajectories or equal-length lists, one
    pair per entry approach; the matched positions of all approaches form one
    correspondence set.
    """
    outdoors = [outdoor] if isinstance(outdoor, Trajectory) else list(outdoor)
    transitions = [transition] if isinstance(transition, Trajectory) else list(transition)
    if len(outdoors) != len(transitions):
        raise ValueError("align_segments needs one transition trajectory per outdoor trajectory")

    points_a: List[np.ndarray] = []
    points_b: List[np.ndarray] = []
    weights: List[np.ndarray] = []
    weighted = use_weights and all(o.weights is not None for o in outdoors)
    for approach, (out, trans) in enumerate(zip(outdoors, transitions)):
        start, stop = _overlap(out, trans, overlap_window)
        if stop < start:
            log.debug(f"approach {approach}: no temporal overlap")
            continue
        out_w = out.window(start - max_gap, stop + max_gap)
        trans_w = trans.window(start, stop)
        idx_out, idx_trans = match_by_time(out_w, trans_w, max_gap)
        log.debug(f"approach {approach}: {len(idx_out)} matched pairs")
        points_a.append(trans_w.positions[idx_trans])
        points_b.append(out_w.positions[idx_out])
        if weighted:
            weights.append(out_w.weights[idx_out])
        else:
            weights.append(np.ones(len(idx_out)))

    n_pairs = sum(len(p) for p in points_a)
    if n_pairs < 3:
        raise InsufficientOverlap(f"only {n_pairs} time-matched position pairs, need at least 3")

    c = Correspondences(np.vstack(points_a), np.vstack(points_b), np.concatenate(weights))
    alignment = solve_rigid_alignment(c)
    log.info(f"Aligned {n_pairs} pairs from {len(outdoors)} approach(es), rms {alignment.rms_residual:.4f} m")
    return alignment


def stitch_trajectory(
    segments: Sequence[Trajectory],
    alignments: Sequence[RigidAlignment],
    priority: Optional[Dict[str, int]] = None,
) -> Trajectory:
    """Map segments into the frame of ``segments[0]`` and merge them by time.

    ``alignments[k]`` maps ``segments[k + 1]`` into the reference frame. Where segments
    overlap in time, samples from a lower-priority source inside the span of a
    higher-priority segment are dropped.
    """
    if not segments:
        raise ValueError("stitch_trajectory needs at least one segment")
    if len(alignments) != len(segments) - 1:
        raise ValueError(
            f"{len(segments)} segments need {len(segments) - 1} alignments, got {len(alignments)}"
        )
    if len(segments) == 1:
        return segments[0]

    priority = SEGMENT_PRIORITY if priority is None else priority
    mapped = [segments[0]] + [al.apply(seg) for al, seg in zip(alignments, segments[1:])]
    ranks = [priority.get(seg.source, 0) for seg in mapped]

    kept: List[Trajectory] = []
    for k, seg in enumerate(mapped):
        mask = np.ones(len(seg), dtype=bool)
        for j, other in enumerate(mapped):
            if j == k or ranks[j] <= ranks[k] or not len(other):
                continue
            mask &= ~((seg.t >= other.t[0]) & (seg.t <= other.t[-1]))
        dropped = int(np.sum(~mask))
        if dropped:
            log.debug(f"segment {k} ({seg.source}): {dropped} samples superseded by higher priority")
        kept.append(seg.select(mask))

    t = np.concatenate([seg.t for seg in kept])
    order = np.argsort(t, kind="stable")
    t = t[order]
    steps = np.diff(t)
    if np.any(steps <= DUPLICATE_TIME_TOL):
        k = int(np.argmax(steps <= DUPLICATE_TIME_TOL))
        raise NonMonotonicResult(
            f"segments of equal priority share timestamp {t[k]:.6f} s within {DUPLICATE_TIME_TOL} s"
        )

    rotations = np.concatenate([seg.rotations for seg in kept])[order]
    positions = np.concatenate([seg.positions for seg in kept])[order]
    weights = None
    if all(seg.weights is not None for seg in kept):
        weights = np.concatenate([seg.weights for seg in kept])[order]
    return Trajectory(t, rotations, positions, weights, source="stitched")
