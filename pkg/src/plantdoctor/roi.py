"""Per-leaf ROI stacks and best-frame selection.

Every confirmed track accumulates one cropped ROI per matched frame.
After the video ends, each crop is scored as sharpness x similarity:
sharpness is the Laplacian variance of the native crop, similarity the
mean SSIM against the rest of the stack (all members normalized to the
stack's median size in grayscale). The highest-scoring sufficiently
similar crop is the leaf's representative image.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import cv2
import numpy as np

from .metrics import grayscale, laplacian_variance, ssim

CROP_MARGIN = 0.05          # extra context on each side of the detector box
MIN_REFERENCE_SIDE = 11     # SSIM window must fit the normalized crops
DEFAULT_SIMILARITY_FLOOR = 0.4


@dataclass(frozen=True)
class RoiEntry:
    track_id: int
    frame_index: int
    roi: np.ndarray          # native-resolution RGB crop
    sharpness: float
    similarity: float
    score: float             # sharpness * similarity, full precision


@dataclass
class RoiStack:
    """Ordered crops of one track. Appended by the tracking loop; scored
    once the video is complete."""
    track_id: int
    crops: list[tuple[int, np.ndarray]] = field(default_factory=list)

    def append(self, frame_index: int, roi: np.ndarray) -> None:
        if self.crops and frame_index <= self.crops[-1][0]:
            raise ValueError("stack entries must arrive in frame order")
        self.crops.append((frame_index, roi))

    def reference_size(self) -> tuple[int, int]:
        """Median (w, h) over the stack, never below the SSIM window."""
        widths = [roi.shape[1] for _, roi in self.crops]
        heights = [roi.shape[0] for _, roi in self.crops]
        w = max(MIN_REFERENCE_SIDE, int(round(float(np.median(widths)))))
        h = max(MIN_REFERENCE_SIDE, int(round(float(np.median(heights)))))
        return (w, h)


def crop_window(frame_shape, bbox, margin: float = CROP_MARGIN):
    """Pixel window (x0, y0, x1, y1) of `bbox` grown by a relative margin
    and clamped to the frame; None when nothing remains."""
    frame_h, frame_w = frame_shape[:2]
    x, y, w, h = (float(v) for v in bbox)
    x -= w * margin
    y -= h * margin
    w *= 1.0 + 2.0 * margin
    h *= 1.0 + 2.0 * margin

    x0 = max(0, int(math.floor(x)))
    y0 = max(0, int(math.floor(y)))
    x1 = min(frame_w, int(math.ceil(x + w)))
    y1 = min(frame_h, int(math.ceil(y + h)))
    if x1 <= x0 or y1 <= y0:
        return None
    return (x0, y0, x1, y1)


def crop_roi(image: np.ndarray, bbox, margin: float = CROP_MARGIN):
    """Crop `bbox` from an RGB frame with a relative margin on each side.

    Returns a pixel-exact copy, or None when the (clamped) box does not
    intersect the frame — callers treat that as a skip signal.
    """
    window = crop_window(image.shape, bbox, margin)
    if window is None:
        return None
    x0, y0, x1, y1 = window
    return image[y0:y1, x0:x1].copy()


def score_entry(sharpness: float, similarity: float) -> float:
    """Plain product; formatting to 2 decimals happens only at output."""
    return sharpness * similarity


def truncate_score(value: float) -> float:
    """Score as reported in tables: truncated (not rounded) to 2 decimals."""
    return math.floor(value * 100.0 + 1e-9) / 100.0


def compute_similarity(normalized: list[np.ndarray], ordinal: int) -> float:
    """Mean SSIM of one normalized crop against every other stack member.

    Single-entry stacks have nothing to compare against; by convention
    the lone crop is perfectly representative (1.0).
    """
    if len(normalized) == 1:
        return 1.0
    others = [ssim(normalized[ordinal], g) for i, g in enumerate(normalized) if i != ordinal]
    return float(np.mean(others))


def score_stack(stack: RoiStack) -> list[RoiEntry]:
    """Score every crop in the stack (sharpness, similarity, product)."""
    if not stack.crops:
        return []
    ref_w, ref_h = stack.reference_size()
    normalized = [
        grayscale(cv2.resize(roi, (ref_w, ref_h), interpolation=cv2.INTER_LINEAR))
        for _, roi in stack.crops
    ]
    n = len(normalized)
    pairwise = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            pairwise[i, j] = pairwise[j, i] = ssim(normalized[i], normalized[j])
    entries = []
    for ordinal, (frame_index, roi) in enumerate(stack.crops):
        sharpness = laplacian_variance(grayscale(roi))
        similarity = 1.0 if n == 1 else float((pairwise[ordinal].sum() - 1.0) / (n - 1))
        entries.append(RoiEntry(
            track_id=stack.track_id,
            frame_index=frame_index,
            roi=roi,
            sharpness=sharpness,
            similarity=similarity,
            score=score_entry(sharpness, similarity),
        ))
    return entries


def select_best(entries: list[RoiEntry],
                similarity_floor: float = DEFAULT_SIMILARITY_FLOOR) -> RoiEntry:
    """Best entry: max score among sufficiently similar crops.

    Crops below the similarity floor (unframed/occluded outliers) are
    excluded first; if that empties the stack the floor is waived. Score
    ties go to the earliest frame.
    """
    if not entries:
        raise ValueError("cannot select from an empty stack")
    survivors = [e for e in entries if e.similarity >= similarity_floor]
    if not survivors:
        survivors = entries
    return max(survivors, key=lambda e: (e.score, -e.frame_index))


def dump_stacks(scored: dict[int, list[RoiEntry]], directory: str) -> None:
    """Write every crop plus a per-stack score table.

    Layout: <dir>/<track_id>/<frame_index>.png and <dir>/<track_id>/scores.tsv
    with columns frame / similarity / sharpness / score (2 decimals, score
    truncated the way the tables report it).
    """
    for track_id in sorted(scored):
        track_dir = os.path.join(directory, str(track_id))
        os.makedirs(track_dir, exist_ok=True)
        lines = ["frame\tsimilarity\tsharpness\tscore"]
        for entry in scored[track_id]:
            cv2.imwrite(os.path.join(track_dir, f"{entry.frame_index}.png"),
                        cv2.cvtColor(entry.roi, cv2.COLOR_RGB2BGR))
            lines.append(f"{entry.frame_index}\t{entry.similarity:.2f}"
                         f"\t{entry.sharpness:.2f}\t{truncate_score(entry.score):.2f}")
        with open(os.path.join(track_dir, "scores.tsv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
