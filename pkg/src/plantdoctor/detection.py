"""Leaf detection interface.

The real detector is whatever model the user brings (ONNX file); tests
and desk runs use the synthetic scene oracle. Both sides speak the same
Detection schema, so everything downstream is backend-agnostic.
"""

from __future__ import annotations

import os
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import BackendError
from .ingest import Frame


@dataclass(frozen=True)
class Detection:
    bbox: tuple[float, float, float, float]  # x, y, w, h — top-left origin, pixels
    confidence: float
    frame_index: int


@dataclass
class DetectorConfig:
    confidence_floor: float = 0.25
    max_detections_per_frame: int = 300

    def validate(self) -> None:
        from .errors import UsageError
        if not (0.0 <= self.confidence_floor <= 1.0):
            raise UsageError(f"confidence_floor must be in [0,1], got {self.confidence_floor}")
        if self.max_detections_per_frame <= 0:
            raise UsageError("max_detections_per_frame must be positive")


def clamp_bbox(bbox, width: int, height: int):
    """Clamp (x, y, w, h) to frame bounds; None if nothing remains."""
    x, y, w, h = bbox
    x0 = max(0.0, float(x))
    y0 = max(0.0, float(y))
    x1 = min(float(width), float(x) + float(w))
    y1 = min(float(height), float(y) + float(h))
    if x1 - x0 <= 0 or y1 - y0 <= 0:
        return None
    return (x0, y0, x1 - x0, y1 - y0)


def filter_detections(dets: list[Detection], cfg: DetectorConfig) -> list[Detection]:
    """Confidence floor + stable descending-confidence order + truncation."""
    kept = [d for d in dets if d.confidence >= cfg.confidence_floor]
    kept.sort(key=lambda d: -d.confidence)
    return kept[:cfg.max_detections_per_frame]


class LeafDetector(ABC):
    """Per-frame leaf detector. Implementations must be safe to call from
    multiple threads concurrently on distinct frames."""

    @abstractmethod
    def detect(self, frame: Frame) -> list[Detection]:
        """Detections satisfying the schema invariants, best first."""


class OnnxDetector(LeafDetector):
    """Serialized-model backend.

    Expects a single-input model taking a 1x3xHxW float32 RGB tensor in
    [0,1] at the frame's native size and returning an (N,5) float array
    of (x, y, w, h, confidence) rows in input pixels. A leading batch
    axis on the output is tolerated.
    """

    def __init__(self, model_path: str, cfg: DetectorConfig | None = None):
        if not os.path.isfile(model_path):
            raise BackendError(f"detector model file not found: {model_path}")
        try:
            import onnxruntime
        except ImportError as exc:
            raise BackendError(
                "onnxruntime is required for model backends (pip install plantdoctor[onnx])") from exc
        try:
            self._session = onnxruntime.InferenceSession(
                model_path, providers=["CPUExecutionProvider"])
        except Exception as exc:
            raise BackendError(f"cannot load detector model: {exc}") from exc
        self._input_name = self._session.get_inputs()[0].name
        self.cfg = cfg or DetectorConfig()

    def detect(self, frame: Frame) -> list[Detection]:
        img = frame.image.astype(np.float32) / 255.0
        tensor = np.transpose(img, (2, 0, 1))[np.newaxis]
        try:
            (raw,) = self._session.run(None, {self._input_name: tensor})[:1]
        except Exception as exc:
            raise BackendError(f"detector inference failed: {exc}") from exc
        raw = np.asarray(raw, dtype=np.float64)
        if raw.ndim == 3:
            raw = raw[0]
        h, w = frame.image.shape[:2]
        dets = []
        for row in raw:
            box = clamp_bbox(tuple(row[:4]), w, h)
            if box is None:
                continue
            conf = float(np.clip(row[4], 0.0, 1.0))
            dets.append(Detection(bbox=box, confidence=conf, frame_index=frame.index))
        return filter_detections(dets, self.cfg)
