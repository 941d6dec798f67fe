"""Two-pass leaf-health quantification.

Pass 1 isolates the whole leaf (the baseline area), pass 2 the damaged
pixels; the damage ratio is their quotient. Pixel classification itself
sits behind SegmenterBackend so the same pipeline runs against a
serialized neural model or the synthetic-scene oracle.
"""

from __future__ import annotations

import os
from abc import ABC, abstractmethod
from dataclasses import dataclass

import cv2
import numpy as np
from scipy import ndimage

from .errors import BackendError

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class RoiContext:
    """Where a crop came from — oracle backends answer from ground truth
    and need the geometry; model backends ignore it."""
    source_index: int                       # source frame the crop was taken from
    window: tuple[int, int, int, int]       # x0, y0, x1, y1 in frame pixels


@dataclass(frozen=True)
class DamageResult:
    track_id: int
    best_frame: int
    leaf_area_px: int
    damage_area_px: int
    ratio_pct: float | None  # None when no leaf pixels were found


class SegmenterBackend(ABC):
    """Produces per-pixel probabilities for the two classes.

    Implementations must be safe for concurrent calls on distinct ROIs.
    """

    kind: str = "abstract"

    @abstractmethod
    def probabilities(self, roi: np.ndarray,
                      context: RoiContext | None = None) -> tuple[np.ndarray, np.ndarray]:
        """(leaf, damage) float arrays, ROI-shaped, values in [0, 1]."""


def equalize_luminance(rgb: np.ndarray) -> np.ndarray:
    """Equalize the Y histogram in YCbCr space, keeping original chroma.

    The mapping is v -> floor(255 * cdf(v)) with an inclusive CDF, so a
    50/50 two-level luminance histogram lands on 127/255. An image with
    a single luminance level is returned unchanged (equalizing one bin
    is the identity). Working on luminance only preserves the color cues
    that distinguish damage types (brown vs white stains).
    """
    ycrcb = cv2.cvtColor(rgb, cv2.COLOR_RGB2YCrCb)
    y = ycrcb[..., 0]
    counts = np.bincount(y.ravel(), minlength=256)
    if np.count_nonzero(counts) <= 1:
        return rgb
    cdf = np.cumsum(counts) / float(y.size)
    lut = np.floor(255.0 * cdf).astype(np.uint8)
    ycrcb[..., 0] = lut[y]
    return cv2.cvtColor(ycrcb, cv2.COLOR_YCrCb2RGB)


def preprocess(roi: np.ndarray) -> np.ndarray:
    """Denoise + normalize an ROI before segmentation: 5x5 Gaussian blur
    (sigma 1.0) per channel, then luminance equalization. Deterministic;
    output shape equals input shape."""
    if roi.size == 0:
        raise ValueError("empty ROI")
    blurred = cv2.GaussianBlur(roi, (5, 5), sigmaX=1.0, sigmaY=1.0)
    return equalize_luminance(blurred)


def binarize(probabilities: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    return np.asarray(probabilities, dtype=np.float64) >= threshold


def largest_component(mask: np.ndarray) -> np.ndarray:
    """Keep only the largest 4-connected component (empty stays empty)."""
    labeled, count = ndimage.label(mask)  # default structure = 4-connectivity
    if count <= 1:
        return mask.astype(bool)
    sizes = ndimage.sum_labels(np.ones_like(labeled), labeled, index=range(1, count + 1))
    keep = int(np.argmax(sizes)) + 1
    return labeled == keep


def segment_leaf(backend: SegmenterBackend, roi: np.ndarray,
                 threshold: float = DEFAULT_THRESHOLD,
                 context: RoiContext | None = None) -> np.ndarray:
    """Leaf-area mask (pass 1). Out-of-focus background leaves tend to
    appear as separate blobs, so everything but the largest connected
    component is discarded."""
    leaf_prob, _ = backend.probabilities(roi, context)
    return largest_component(binarize(leaf_prob, threshold))


def segment_damage(backend: SegmenterBackend, roi: np.ndarray,
                   threshold: float = DEFAULT_THRESHOLD,
                   context: RoiContext | None = None) -> np.ndarray:
    """Damage mask (pass 2). No component filtering: damage is often many
    small spots, stains, and lines."""
    _, damage_prob = backend.probabilities(roi, context)
    return binarize(damage_prob, threshold)


def damage_ratio(leaf: np.ndarray, damage: np.ndarray) -> tuple[int, int, float | None]:
    """Areas and ratio from the two masks.

    Damage is intersected with the leaf mask first — the leaf is the
    baseline, so stray damage pixels off the leaf never count. Returns
    (leaf_px, damage_px, ratio_pct); ratio is None when no leaf was found.
    """
    leaf = np.asarray(leaf, dtype=bool)
    damage = np.asarray(damage, dtype=bool)
    if leaf.shape != damage.shape:
        raise ValueError(f"mask shapes differ: {leaf.shape} vs {damage.shape}")
    leaf_px = int(leaf.sum())
    damage_px = int(np.logical_and(leaf, damage).sum())
    if leaf_px == 0:
        return 0, 0, None
    return leaf_px, damage_px, 100.0 * damage_px / leaf_px


class OnnxSegmenter(SegmenterBackend):
    """Serialized-model backend.

    Expects a model taking a 1x3xHxW float32 RGB tensor in [0,1] at the
    ROI's native size and returning a (1, 2, H, W) float array: channel 0
    = leaf probability, channel 1 = damage probability.
    """

    kind = "model"

    def __init__(self, model_path: str):
        if not os.path.isfile(model_path):
            raise BackendError(f"segmenter model file not found: {model_path}")
        try:
            import onnxruntime
        except ImportError as exc:
            raise BackendError(
                "onnxruntime is required for model backends (pip install plantdoctor[onnx])") from exc
        try:
            self._session = onnxruntime.InferenceSession(
                model_path, providers=["CPUExecutionProvider"])
        except Exception as exc:
            raise BackendError(f"cannot load segmenter model: {exc}") from exc
        self._input_name = self._session.get_inputs()[0].name

    def probabilities(self, roi, context=None):
        tensor = np.transpose(roi.astype(np.float32) / 255.0, (2, 0, 1))[np.newaxis]
        try:
            (raw,) = self._session.run(None, {self._input_name: tensor})[:1]
        except Exception as exc:
            raise BackendError(f"segmenter inference failed: {exc}") from exc
        raw = np.asarray(raw, dtype=np.float64)
        if raw.ndim == 4:
            raw = raw[0]
        if raw.shape[0] < 2 or raw.shape[1:] != roi.shape[:2]:
            raise BackendError(
                f"segmenter output shape {raw.shape} does not match ROI {roi.shape[:2]}")
        return np.clip(raw[0], 0.0, 1.0), np.clip(raw[1], 0.0, 1.0)


def dump_masks(masks: dict[int, tuple[np.ndarray, np.ndarray]], directory: str) -> None:
    """Write per-track leaf/damage masks as 0/255 PNGs."""
    os.makedirs(directory, exist_ok=True)
    for track_id in sorted(masks):
        leaf, damage = masks[track_id]
        cv2.imwrite(os.path.join(directory, f"{track_id}_leaf.png"),
                    leaf.astype(np.uint8) * 255)
        cv2.imwrite(os.path.join(directory, f"{track_id}_damage.png"),
                    damage.astype(np.uint8) * 255)
