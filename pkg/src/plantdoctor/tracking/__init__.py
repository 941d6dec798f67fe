from .assignment import solve_assignment
from .features import FEATURE_DIM, appearance_feature, min_cosine_distance
from .kalman import CHI2_GATE_95_4DOF, KalmanFilter
from .merge import MergeConfig, merge_fragmented_tracks
from .tracker import (
    CONFIRMED,
    DELETED,
    TENTATIVE,
    Assignment,
    LeafTracker,
    Track,
    TrackerConfig,
    associate,
    bbox_to_measurement,
    box_iou,
    measurement_to_bbox,
)

__all__ = [
    "Assignment",
    "CHI2_GATE_95_4DOF",
    "CONFIRMED",
    "DELETED",
    "FEATURE_DIM",
    "KalmanFilter",
    "LeafTracker",
    "MergeConfig",
    "TENTATIVE",
    "Track",
    "TrackerConfig",
    "appearance_feature",
    "associate",
    "bbox_to_measurement",
    "box_iou",
    "measurement_to_bbox",
    "merge_fragmented_tracks",
    "min_cosine_distance",
    "solve_assignment",
]
