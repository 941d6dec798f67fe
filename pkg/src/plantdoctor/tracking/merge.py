"""Post-hoc merge of fragmented tracks.

A leaf that disappears long enough for its track to die comes back as a
fresh id — the double-identification failure. Once the whole video has
been tracked we can repair that offline: a later track whose start is
close in time, position (by linear extrapolation of the earlier track),
and scale to an earlier track's end is folded into it. The remapping is
transitively closed, so chains A <- B <- C collapse onto A's id.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SCALE_RATIO_MIN = 0.5
SCALE_RATIO_MAX = 2.0


@dataclass
class MergeConfig:
    gap_max: int = 6      # frames between one track's end and the next's start
    dist_max: float = 1.0  # allowed extrapolation miss, in box heights

    def validate(self) -> None:
        from ..errors import UsageError
        if self.gap_max < 1:
            raise UsageError(f"gap_max must be >= 1, got {self.gap_max}")
        if self.dist_max <= 0:
            raise UsageError(f"dist_max must be positive, got {self.dist_max}")


def _center(bbox) -> np.ndarray:
    x, y, w, h = bbox
    return np.array([x + w / 2.0, y + h / 2.0])


def _extrapolate(history: list[tuple[int, tuple]], to_frame: int) -> np.ndarray:
    """Linear extrapolation of the track's center to `to_frame`, using the
    velocity between its last two observations (zero for single-entry)."""
    last_frame, last_bbox = history[-1]
    last_center = _center(last_bbox)
    if len(history) < 2:
        return last_center
    prev_frame, prev_bbox = history[-2]
    span = last_frame - prev_frame
    if span <= 0:
        return last_center
    velocity = (last_center - _center(prev_bbox)) / span
    return last_center + velocity * (to_frame - last_frame)


def merge_fragmented_tracks(histories: dict[int, list[tuple[int, tuple]]],
                            cfg: MergeConfig | None = None) -> dict[int, int]:
    """Compute an id remapping that reunites fragments of one leaf.

    Args:
        histories: id -> ordered list of (frame_index, (x, y, w, h)).

    Returns:
        Mapping id -> surviving id for every input id (identity when the
        track stands alone). Survivor is the group's smallest id, which
        is also its earliest fragment.

    A later fragment B joins an earlier fragment A when all hold:
    1 <= B.start - A.end <= gap_max (so overlapping tracks never merge);
    A's extrapolated center at B.start is within dist_max * h of B's
    first center (h = A's final box height); and sqrt(area ratio) of the
    adjoining boxes lies in [0.5, 2]. Among several candidate
    predecessors, the closest extrapolation wins; each predecessor is
    consumed by at most one successor.
    """
    cfg = cfg or MergeConfig()
    cfg.validate()

    segments = []
    for tid, history in histories.items():
        if not history:
            continue
        segments.append({
            "id": tid,
            "start": history[0][0],
            "end": history[-1][0],
            "history": history,
        })
    segments.sort(key=lambda s: (s["start"], s["id"]))

    parent = {s["id"]: s["id"] for s in segments}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    claimed: set[int] = set()
    for seg in segments:
        first_frame, first_bbox = seg["history"][0]
        first_center = _center(first_bbox)
        first_area = first_bbox[2] * first_bbox[3]

        best = None  # (distance, -end, id)
        for other in segments:
            if other["id"] == seg["id"] or other["id"] in claimed:
                continue
            gap = first_frame - other["end"]
            if gap < 1 or gap > cfg.gap_max:
                continue
            _, last_bbox = other["history"][-1]
            scale = np.sqrt(first_area / (last_bbox[2] * last_bbox[3]))
            if not (SCALE_RATIO_MIN <= scale <= SCALE_RATIO_MAX):
                continue
            predicted = _extrapolate(other["history"], first_frame)
            distance = float(np.linalg.norm(predicted - first_center))
            if distance > cfg.dist_max * last_bbox[3]:
                continue
            key = (distance, -other["end"], other["id"])
            if best is None or key < best[0]:
                best = (key, other["id"])
        if best is not None:
            predecessor = best[1]
            claimed.add(predecessor)
            ra, rb = find(predecessor), find(seg["id"])
            if ra != rb:
                root, child = min(ra, rb), max(ra, rb)
                parent[child] = root

    return {tid: find(tid) for tid in parent}
