"""Multi-leaf tracking: Kalman prediction, gated cascade association,
track lifecycle management.

The shape follows the classic appearance-augmented SORT recipe: motion
is gated by squared Mahalanobis distance in measurement space, cost is
a blend of normalized motion distance and cosine appearance distance,
and recently seen tracks get first pick of the detections (matching
cascade). Tentative tracks that survive n_init consecutive frames are
promoted; anything unseen for more than max_age frames is dropped.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .assignment import solve_assignment
from .features import FEATURE_DIM, appearance_feature, min_cosine_distance
from .kalman import CHI2_GATE_95_4DOF, KalmanFilter

TENTATIVE = "tentative"
CONFIRMED = "confirmed"
DELETED = "deleted"

IOU_PASS_THRESHOLD = 0.3


@dataclass
class TrackerConfig:
    n_init: int = 3                 # consecutive matches to confirm
    max_age: int = 9                # missed frames before deletion (3 s at 3 fps)
    gate_threshold: float = CHI2_GATE_95_4DOF
    lambda_motion: float = 0.2      # motion weight in the cost blend
    appearance_gallery: int = 30    # features retained per track

    def validate(self) -> None:
        from ..errors import UsageError
        if self.n_init < 1:
            raise UsageError(f"n_init must be >= 1, got {self.n_init}")
        if self.max_age < 1:
            raise UsageError(f"max_age must be >= 1, got {self.max_age}")
        if not (0.0 <= self.lambda_motion <= 1.0):
            raise UsageError(f"lambda_motion must be in [0,1], got {self.lambda_motion}")
        if self.gate_threshold <= 0:
            raise UsageError("gate_threshold must be positive")
        if self.appearance_gallery < 1:
            raise UsageError("appearance_gallery must be >= 1")


@dataclass
class Assignment:
    matches: list[tuple[int, int]] = field(default_factory=list)  # (track id, det ordinal)
    unmatched_tracks: list[int] = field(default_factory=list)
    unmatched_detections: list[int] = field(default_factory=list)


def bbox_to_measurement(bbox) -> np.ndarray:
    """(x, y, w, h) -> (cx, cy, aspect w/h, h)."""
    x, y, w, h = bbox
    return np.array([x + w / 2.0, y + h / 2.0, w / h, h], dtype=np.float64)


def measurement_to_bbox(measurement) -> tuple[float, float, float, float]:
    cx, cy, a, h = (float(v) for v in measurement)
    w = a * h
    return (cx - w / 2.0, cy - h / 2.0, w, h)


def box_iou(a, b) -> float:
    """Intersection over union of two (x, y, w, h) boxes."""
    ax0, ay0, aw, ah = a
    bx0, by0, bw, bh = b
    ix0 = max(ax0, bx0)
    iy0 = max(ay0, by0)
    ix1 = min(ax0 + aw, bx0 + bw)
    iy1 = min(ay0 + ah, by0 + bh)
    iw = max(0.0, ix1 - ix0)
    ih = max(0.0, iy1 - iy0)
    inter = iw * ih
    union = aw * ah + bw * bh - inter
    if union <= 0:
        return 0.0
    return inter / union


class Track:
    """One leaf identity. Mutable, owned by a single tracker."""

    def __init__(self, track_id: int, measurement: np.ndarray, feature: np.ndarray,
                 frame_index: int, bbox, cfg: TrackerConfig, kf: KalmanFilter):
        self.id = track_id
        self.mean, self.covariance = kf.initiate(measurement)
        self.status = CONFIRMED if cfg.n_init <= 1 else TENTATIVE
        self.hits = 1
        self.age = 1
        self.time_since_update = 0
        self.features: deque = deque([feature], maxlen=cfg.appearance_gallery)
        # (frame_index, bbox) of every matched detection, tentative phase included
        self.history: list[tuple[int, tuple]] = [(frame_index, tuple(bbox))]

    def predict(self, kf: KalmanFilter) -> None:
        self.mean, self.covariance = kf.predict(self.mean, self.covariance)
        self.age += 1
        self.time_since_update += 1

    def update(self, kf: KalmanFilter, measurement: np.ndarray, feature: np.ndarray,
               frame_index: int, bbox, cfg: TrackerConfig) -> None:
        self.mean, self.covariance = kf.update(self.mean, self.covariance, measurement)
        self.mean[2] = max(self.mean[2], 1e-3)
        self.mean[3] = max(self.mean[3], 1e-3)
        self.hits += 1
        self.time_since_update = 0
        self.features.append(feature)
        self.history.append((frame_index, tuple(bbox)))
        if self.status == TENTATIVE and self.hits >= cfg.n_init:
            self.status = CONFIRMED

    def mark_missed(self, cfg: TrackerConfig) -> None:
        self.hits = 0
        if self.status == TENTATIVE:
            self.status = DELETED
        elif self.time_since_update > cfg.max_age:
            self.status = DELETED

    def predicted_bbox(self) -> tuple[float, float, float, float]:
        return measurement_to_bbox(self.mean[:4])


def _blended_costs(tracks: list[Track], measurements: np.ndarray, features: np.ndarray,
                   cfg: TrackerConfig, kf: KalmanFilter) -> tuple[np.ndarray, np.ndarray]:
    cost = np.zeros((len(tracks), measurements.shape[0]))
    forbidden = np.zeros_like(cost, dtype=bool)
    for i, track in enumerate(tracks):
        motion = kf.gating_distance(track.mean, track.covariance, measurements)
        gallery = np.asarray(track.features, dtype=np.float64)
        appearance = min_cosine_distance(gallery, features)
        cost[i] = (cfg.lambda_motion * (motion / cfg.gate_threshold)
                   + (1.0 - cfg.lambda_motion) * appearance)
        forbidden[i] = motion > cfg.gate_threshold
    return cost, forbidden


def associate(tracks: list[Track], detections, features: np.ndarray,
              cfg: TrackerConfig, kf: KalmanFilter) -> Assignment:
    """Match predicted tracks against the current frame's detections.

    Confirmed tracks are matched level by level in ascending
    time_since_update (recently seen first); each level is a min-cost
    assignment over the still-unmatched detections with Mahalanobis
    forbidding. Tentative tracks get a final IoU pass.
    """
    result = Assignment()
    unmatched = list(range(len(detections)))
    matched_track_ids: set[int] = set()

    confirmed = [t for t in tracks if t.status == CONFIRMED]
    tentative = [t for t in tracks if t.status == TENTATIVE]

    if detections:
        measurements = np.stack([bbox_to_measurement(d.bbox) for d in detections])
        for level in sorted({t.time_since_update for t in confirmed}):
            if not unmatched:
                break
            level_tracks = [t for t in confirmed if t.time_since_update == level]
            cost, forbidden = _blended_costs(
                level_tracks, measurements[unmatched], features[unmatched], cfg, kf)
            taken = set()
            for ri, ci in solve_assignment(cost, forbidden):
                track = level_tracks[ri]
                result.matches.append((track.id, unmatched[ci]))
                matched_track_ids.add(track.id)
                taken.add(unmatched[ci])
            unmatched = [j for j in unmatched if j not in taken]

    if tentative and unmatched:
        cost = np.zeros((len(tentative), len(unmatched)))
        forbidden = np.zeros_like(cost, dtype=bool)
        for i, track in enumerate(tentative):
            box = track.predicted_bbox()
            for k, j in enumerate(unmatched):
                overlap = box_iou(box, detections[j].bbox)
                cost[i, k] = 1.0 - overlap
                forbidden[i, k] = overlap < IOU_PASS_THRESHOLD
        taken = set()
        for ri, ci in solve_assignment(cost, forbidden):
            track = tentative[ri]
            result.matches.append((track.id, unmatched[ci]))
            matched_track_ids.add(track.id)
            taken.add(unmatched[ci])
        unmatched = [j for j in unmatched if j not in taken]

    result.unmatched_detections = unmatched
    result.unmatched_tracks = [t.id for t in tracks if t.id not in matched_track_ids]
    return result


class LeafTracker:
    """Stateful per-video tracker. step() must be called with strictly
    increasing frame indices; instances are single-owner."""

    def __init__(self, cfg: TrackerConfig | None = None):
        self.cfg = cfg or TrackerConfig()
        self.cfg.validate()
        self.kf = KalmanFilter()
        self.tracks: list[Track] = []
        self._next_id = 1
        self._last_frame: int | None = None
        self._confirmed_histories: dict[int, list] = {}

    def step(self, frame_index: int, detections, roi_provider) -> list[tuple[int, object]]:
        """Advance one frame.

        Args:
            frame_index: current frame ordinal, strictly increasing.
            detections: list of Detection for this frame.
            roi_provider: callable(Detection) -> RGB raster used for
                appearance features (may return None for degenerate crops).

        Returns:
            (track_id, Detection) pairs for confirmed tracks, sorted by id.
        """
        if self._last_frame is not None and frame_index <= self._last_frame:
            raise ValueError(
                f"frame indices must increase: got {frame_index} after {self._last_frame}")
        self._last_frame = frame_index

        for track in self.tracks:
            track.predict(self.kf)

        features = np.zeros((len(detections), 0))
        if detections:
            rows = []
            for det in detections:
                roi = roi_provider(det)
                if roi is None or roi.size == 0:
                    rows.append(np.full(FEATURE_DIM, 1.0 / np.sqrt(FEATURE_DIM)))  # signal-free crop
                else:
                    rows.append(appearance_feature(roi))
            features = np.stack(rows)

        assignment = associate(self.tracks, detections, features, self.cfg, self.kf)

        by_id = {t.id: t for t in self.tracks}
        returned = []
        for track_id, j in assignment.matches:
            track = by_id[track_id]
            det = detections[j]
            track.update(self.kf, bbox_to_measurement(det.bbox), features[j],
                         frame_index, det.bbox, self.cfg)
            if track.status == CONFIRMED:
                self._confirmed_histories.setdefault(track.id, track.history)
                returned.append((track.id, det))

        for track_id in assignment.unmatched_tracks:
            by_id[track_id].mark_missed(self.cfg)

        for j in assignment.unmatched_detections:
            det = detections[j]
            track = Track(self._next_id, bbox_to_measurement(det.bbox), features[j],
                          frame_index, det.bbox, self.cfg, self.kf)
            self.tracks.append(track)
            self._next_id += 1
            if track.status == CONFIRMED:  # n_init == 1 confirms at spawn
                self._confirmed_histories.setdefault(track.id, track.history)
                returned.append((track.id, det))

        self.tracks = [t for t in self.tracks if t.status != DELETED]
        returned.sort(key=lambda pair: pair[0])
        return returned

    def confirmed_histories(self) -> dict[int, list[tuple[int, tuple]]]:
        """Full (frame_index, bbox) history of every ever-confirmed track,
        including its tentative warm-up frames."""
        return {tid: list(hist) for tid, hist in self._confirmed_histories.items()}
