"""End-to-end orchestration: frames in, per-leaf damage report out.

Stage order: ingest -> detect -> track -> stack -> select best ->
preprocess -> segment leaf/damage -> ratio -> merge remap -> report.
Detection, stack scoring, and segmentation fan out across a thread pool
(bounded by PLANTDOCTOR_THREADS); tracking stays strictly sequential.
"""

from __future__ import annotations

import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .config import RunConfig, worker_count
from .detection import LeafDetector, OnnxDetector
from .errors import InputError, UsageError
from .ingest import Frame, iter_directory_frames, iter_raw_frames
from .report import LeafReport
from .roi import RoiEntry, RoiStack, crop_roi, crop_window, score_stack, select_best
from .segmentation import (
    DamageResult,
    OnnxSegmenter,
    RoiContext,
    SegmenterBackend,
    damage_ratio,
    preprocess,
    segment_damage,
    segment_leaf,
)
from .synthetic import OracleDetector, OracleSegmenter, SyntheticScene, load_scene
from .tracking import LeafTracker, merge_fragmented_tracks

SCENE_SIDECAR = "scene.spec"


@dataclass
class AnalysisResult:
    reports: list[LeafReport] = field(default_factory=list)
    remap: dict[int, int] = field(default_factory=dict)
    scored_stacks: dict[int, list[RoiEntry]] = field(default_factory=dict)   # raw track id
    best_entries: dict[int, RoiEntry] = field(default_factory=dict)          # surviving id
    masks: dict[int, tuple] = field(default_factory=dict)                    # surviving id
    histories: dict[int, list] = field(default_factory=dict)                 # raw track id


def build_detector(backend: str, scene: SyntheticScene | None, config: RunConfig) -> LeafDetector:
    if backend == "oracle":
        if scene is None:
            raise UsageError(
                "oracle detector needs a scene description "
                f"({SCENE_SIDECAR} next to the frames, or --scene)")
        return OracleDetector(scene, config.detector)
    if backend.startswith("model:"):
        return OnnxDetector(backend[len("model:"):], config.detector)
    raise UsageError(f"unknown detector backend {backend!r}")


def build_segmenter(backend: str, scene: SyntheticScene | None) -> SegmenterBackend:
    if backend == "oracle":
        if scene is None:
            raise UsageError(
                "oracle segmenter needs a scene description "
                f"({SCENE_SIDECAR} next to the frames, or --scene)")
        return OracleSegmenter(scene)
    if backend.startswith("model:"):
        return OnnxSegmenter(backend[len("model:"):])
    raise UsageError(f"unknown segmenter backend {backend!r}")


def frames_from_input(input_spec: str, config: RunConfig, raw_geometry=None):
    """Frame iterator for a directory of images or '-' (raw RGB24 stdin)."""
    if input_spec == "-":
        if raw_geometry is None:
            raise UsageError("stdin input requires --raw-geometry WxH")
        width, height = raw_geometry
        return iter_raw_frames(sys.stdin.buffer, width, height, config.ingest)
    if os.path.isdir(input_spec):
        return iter_directory_frames(input_spec, config.ingest)
    if os.path.exists(input_spec):
        raise InputError(
            f"{input_spec} is not a directory; decode video externally, e.g. "
            "ffmpeg -i video.mp4 -f rawvideo -pix_fmt rgb24 - | plantdoctor analyze --input -")
    raise InputError(f"input not found: {input_spec}")


def discover_scene(input_spec: str, scene_path: str | None) -> SyntheticScene | None:
    """Scene description for oracle backends: explicit path, or the
    sidecar written next to synthesized frames."""
    if scene_path is not None:
        return load_scene(scene_path)
    if input_spec != "-" and os.path.isdir(input_spec):
        sidecar = os.path.join(input_spec, SCENE_SIDECAR)
        if os.path.isfile(sidecar):
            return load_scene(sidecar)
    return None


def run_analysis(frames, detector: LeafDetector, segmenter: SegmenterBackend,
                 config: RunConfig) -> AnalysisResult:
    """The full pipeline over an iterable of Frames."""
    config.validate()
    workers = worker_count()
    result = AnalysisResult()

    tracker = LeafTracker(config.tracker)
    stacks: dict[int, RoiStack] = {}
    contexts: dict[tuple[int, int], RoiContext] = {}  # (track id, frame index) -> context

    with ThreadPoolExecutor(max_workers=workers) as pool:
        detected = pool.map(lambda f: (f, detector.detect(f)), frames)
        for frame, detections in detected:
            matches = tracker.step(
                frame.index, detections,
                lambda det: crop_roi(frame.image, det.bbox, margin=0.0))
            for track_id, det in matches:
                window = crop_window(frame.image.shape, det.bbox)
                if window is None:
                    continue
                x0, y0, x1, y1 = window
                stack = stacks.setdefault(track_id, RoiStack(track_id))
                stack.append(frame.index, frame.image[y0:y1, x0:x1].copy())
                contexts[(track_id, frame.index)] = RoiContext(
                    source_index=frame.source_index, window=window)

    result.histories = tracker.confirmed_histories()

    if not stacks:
        return result

    track_ids = sorted(stacks)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        scored = dict(zip(track_ids, pool.map(
            lambda tid: score_stack(stacks[tid]), track_ids)))
    result.scored_stacks = scored

    best: dict[int, RoiEntry] = {
        tid: select_best(entries, config.selector.similarity_floor)
        for tid, entries in scored.items() if entries
    }

    def quantify(tid: int):
        entry = best[tid]
        context = contexts.get((tid, entry.frame_index))
        roi = preprocess(entry.roi)
        leaf = segment_leaf(segmenter, roi, config.segmenter.threshold, context)
        damage = segment_damage(segmenter, roi, config.segmenter.threshold, context)
        leaf_px, damage_px, ratio = damage_ratio(leaf, damage)
        return DamageResult(tid, entry.frame_index, leaf_px, damage_px, ratio), (leaf, damage)

    quant_ids = sorted(best)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        quantified = dict(zip(quant_ids, pool.map(quantify, quant_ids)))

    if config.merge_enabled:
        result.remap = merge_fragmented_tracks(result.histories, config.merge)
    else:
        result.remap = {tid: tid for tid in result.histories}

    groups: dict[int, list[int]] = {}
    for tid in quant_ids:
        root = result.remap.get(tid, tid)
        groups.setdefault(root, []).append(tid)

    for root in sorted(groups):
        members = groups[root]
        # the fragment with the best representative image speaks for the leaf
        rep = max(members, key=lambda tid: (best[tid].score, -tid))
        damage_result, masks = quantified[rep]
        result.reports.append(LeafReport(
            leaf_id=root,
            best_frame=damage_result.best_frame,
            leaf_area_px=damage_result.leaf_area_px,
            damage_area_px=damage_result.damage_area_px,
            ratio_pct=damage_result.ratio_pct,
        ))
        result.best_entries[root] = best[rep]
        result.masks[root] = masks

    return result
