"""Run configuration: defaults, config files, CLI overrides.

Config files are plain `section.key = value` lines (comments with #).
Sections mirror the module configs (ingest.*, detector.*, tracker.*,
selector.*, segmenter.*, merge.*). Unknown keys are rejected outright —
a silently ignored typo in a threshold is worse than an error.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .detection import DetectorConfig
from .errors import UsageError
from .ingest import IngestConfig
from .roi import DEFAULT_SIMILARITY_FLOOR
from .segmentation import DEFAULT_THRESHOLD
from .tracking.merge import MergeConfig
from .tracking.tracker import TrackerConfig

ENV_THREADS = "PLANTDOCTOR_THREADS"


@dataclass
class SelectorConfig:
    similarity_floor: float = DEFAULT_SIMILARITY_FLOOR

    def validate(self) -> None:
        if not (0.0 <= self.similarity_floor <= 1.0):
            raise UsageError(f"similarity_floor must be in [0,1], got {self.similarity_floor}")


@dataclass
class SegmenterConfig:
    backend: str = "oracle"  # "oracle" or "model:<path>"
    threshold: float = DEFAULT_THRESHOLD

    def validate(self) -> None:
        if not (0.0 < self.threshold < 1.0):
            raise UsageError(f"binarization threshold must be in (0,1), got {self.threshold}")
        if self.backend != "oracle" and not self.backend.startswith("model:"):
            raise UsageError(f"unknown segmenter backend {self.backend!r}")


@dataclass
class RunConfig:
    ingest: IngestConfig = field(default_factory=lambda: IngestConfig(source_fps=3.0))
    detector_backend: str = "oracle"  # "oracle" or "model:<path>"
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    selector: SelectorConfig = field(default_factory=SelectorConfig)
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)
    merge: MergeConfig = field(default_factory=MergeConfig)
    merge_enabled: bool = True

    def validate(self) -> None:
        self.ingest.validate()
        if self.detector_backend != "oracle" and not self.detector_backend.startswith("model:"):
            raise UsageError(f"unknown detector backend {self.detector_backend!r}")
        self.detector.validate()
        self.tracker.validate()
        self.selector.validate()
        self.segmenter.validate()
        self.merge.validate()


def _coerce(value: str, like, key: str):
    try:
        if isinstance(like, bool):
            lowered = value.strip().lower()
            if lowered in ("1", "true", "yes", "on"):
                return True
            if lowered in ("0", "false", "no", "off"):
                return False
            raise ValueError(value)
        if isinstance(like, int):
            return int(value)
        if isinstance(like, float):
            return float(value)
        return value
    except ValueError as exc:
        raise UsageError(f"config key {key}: cannot parse {value!r}") from exc


def parse_config_file(path: str) -> dict[str, str]:
    """Raw key -> value pairs from a config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    values: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise UsageError(f"{path}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def apply_config_values(config: RunConfig, values: dict[str, str]) -> None:
    """Apply `section.key` pairs onto a RunConfig, with type checking."""
    targets = {
        "ingest": config.ingest,
        "detector": config.detector,
        "tracker": config.tracker,
        "selector": config.selector,
        "segmenter": config.segmenter,
        "merge": config.merge,
    }
    renamed = {"detector.backend": ("detector_backend", config)}
    for key, value in values.items():
        if key in renamed:
            attr, obj = renamed[key]
            setattr(obj, attr, value)
            continue
        if "." not in key:
            raise UsageError(f"config key {key!r} must be section.name")
        section, name = key.split(".", 1)
        target = targets.get(section)
        if target is None or not hasattr(target, name):
            raise UsageError(f"unknown config key {key!r}")
        current = getattr(target, name)
        setattr(target, name, _coerce(value, current, key))


def worker_count() -> int:
    """Parallelism for the frame/ROI stages; capped by PLANTDOCTOR_THREADS."""
    workers = min(8, os.cpu_count() or 1)
    cap = os.environ.get(ENV_THREADS)
    if cap is not None:
        try:
            cap_value = int(cap)
        except ValueError:
            raise UsageError(f"{ENV_THREADS} must be an integer, got {cap!r}") from None
        if cap_value < 1:
            raise UsageError(f"{ENV_THREADS} must be >= 1, got {cap_value}")
        workers = min(workers, cap_value)
    return workers
