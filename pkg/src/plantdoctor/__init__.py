"""Per-leaf crop damage quantification from video footage.

Detect leaves frame by frame, keep their identities stable across the
video, pick each leaf's sharpest well-framed crop, measure leaf and
damage areas with two segmentation passes, and report one damage ratio
per leaf as CSV.
"""

from .config import RunConfig, SegmenterConfig, SelectorConfig
from .detection import Detection, DetectorConfig, LeafDetector, filter_detections
from .errors import BackendError, InputError, PlantDoctorError, UsageError
from .ingest import Frame, IngestConfig, downsample_indices, resize_frame
from .metrics import dice, dice_loss, grayscale, laplacian_variance, mask_iou, ssim
from .report import LeafReport, compare_annotations, render_csv, write_csv
from .roi import RoiEntry, RoiStack, crop_roi, score_entry, score_stack, select_best
from .segmentation import (
    DamageResult,
    RoiContext,
    SegmenterBackend,
    damage_ratio,
    preprocess,
    segment_damage,
    segment_leaf,
)
from .synthetic import (
    LeafSpec,
    OracleDetector,
    OracleSegmenter,
    SceneSpec,
    SyntheticScene,
    linear_positions,
)
from .tracking import (
    KalmanFilter,
    LeafTracker,
    MergeConfig,
    TrackerConfig,
    appearance_feature,
    merge_fragmented_tracks,
    solve_assignment,
)

__version__ = "0.1.0"

__all__ = [
    "BackendError",
    "DamageResult",
    "Detection",
    "DetectorConfig",
    "Frame",
    "IngestConfig",
    "InputError",
    "KalmanFilter",
    "LeafDetector",
    "LeafReport",
    "LeafSpec",
    "LeafTracker",
    "MergeConfig",
    "OracleDetector",
    "OracleSegmenter",
    "PlantDoctorError",
    "RoiContext",
    "RoiEntry",
    "RoiStack",
    "RunConfig",
    "SceneSpec",
    "SegmenterBackend",
    "SegmenterConfig",
    "SelectorConfig",
    "SyntheticScene",
    "TrackerConfig",
    "UsageError",
    "appearance_feature",
    "compare_annotations",
    "crop_roi",
    "damage_ratio",
    "dice",
    "dice_loss",
    "downsample_indices",
    "filter_detections",
    "grayscale",
    "laplacian_variance",
    "linear_positions",
    "mask_iou",
    "merge_fragmented_tracks",
    "preprocess",
    "render_csv",
    "resize_frame",
    "score_entry",
    "score_stack",
    "segment_damage",
    "segment_leaf",
    "select_best",
    "solve_assignment",
    "ssim",
    "write_csv",
]
