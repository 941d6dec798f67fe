"""Command-line interface.

Subcommands: analyze (video -> per-leaf CSV), synth (render a test
scene), eval (mask-set IoU/Dice table), compare (two reports side by
side). Exit status: 0 ok, 1 usage/config, 2 unreadable input, 3 backend.
"""

from __future__ import annotations

import argparse
import os
import sys

import cv2
import numpy as np

from .config import RunConfig, apply_config_values, parse_config_file
from .errors import InputError, PlantDoctorError, UsageError
from .metrics import dice, mask_iou
from .pipeline import build_detector, build_segmenter, discover_scene, frames_from_input, run_analysis
from .report import compare_annotations, render_comparison, summary_line, write_csv
from .roi import dump_stacks
from .segmentation import dump_masks
from .synthetic import SyntheticScene, parse_scene_spec, write_scene


def _parse_geometry(value: str) -> tuple[int, int]:
    try:
        w, h = value.lower().split("x")
        return int(w), int(h)
    except ValueError as exc:
        raise UsageError(f"--raw-geometry must be WxH, got {value!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plantdoctor",
        description="Per-leaf crop damage quantification from video footage.")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="run the full pipeline, write the per-leaf CSV")
    analyze.add_argument("--input", required=True,
                         help="directory of frames, or '-' for raw RGB24 on stdin")
    analyze.add_argument("--out", default="report.csv", help="output CSV path")
    analyze.add_argument("--config", help="key=value config file")
    analyze.add_argument("--source-fps", type=float, default=None,
                         help="fps of the input footage (default: same as --target-fps)")
    analyze.add_argument("--target-fps", type=float, default=None,
                         help="analysis frame rate (default 3)")
    analyze.add_argument("--size", type=int, default=None,
                         help="letterbox frames to this square size (default 640)")
    analyze.add_argument("--raw-geometry", default=None, metavar="WxH",
                         help="frame geometry for stdin input")
    analyze.add_argument("--detector", default=None,
                         help="'oracle' or 'model:<path.onnx>' (default oracle)")
    analyze.add_argument("--segmenter", default=None,
                         help="'oracle' or 'model:<path.onnx>' (default oracle)")
    analyze.add_argument("--scene", default=None,
                         help="scene description for oracle backends "
                              "(default: scene.spec inside the input directory)")
    analyze.add_argument("--no-merge", action="store_true",
                         help="skip the fragmented-track merge pass")
    analyze.add_argument("--max-age", type=int, default=None, help="tracker max_age override")
    analyze.add_argument("--n-init", type=int, default=None, help="tracker n_init override")
    analyze.add_argument("--gap-max", type=int, default=None, help="merge gap_max override")
    analyze.add_argument("--similarity-floor", type=float, default=None,
                         help="best-frame similarity floor override")
    analyze.add_argument("--confidence-floor", type=float, default=None,
                         help="detector confidence floor override")
    analyze.add_argument("--dump-stacks", default=None, metavar="DIR",
                         help="write every ROI and per-stack score tables")
    analyze.add_argument("--dump-masks", default=None, metavar="DIR",
                         help="write leaf/damage masks per surviving track")
    analyze.add_argument("--figures", default=None, metavar="DIR",
                         help="render ratio chart and annotated best ROIs")
    analyze.set_defaults(func=cmd_analyze)

    synth = sub.add_parser("synth", help="render a synthetic scene to frames + ground truth")
    synth.add_argument("--spec", required=True, help="scene description file")
    synth.add_argument("--out", required=True, help="output directory")
    synth.set_defaults(func=cmd_synth)

    evaluate = sub.add_parser("eval", help="IoU/Dice between two mask directories")
    evaluate.add_argument("--pred", required=True, help="predicted-mask directory")
    evaluate.add_argument("--truth", required=True, help="ground-truth-mask directory")
    evaluate.set_defaults(func=cmd_eval)

    compare = sub.add_parser("compare", help="diff a report against manual annotations")
    compare.add_argument("ours", help="pipeline report CSV")
    compare.add_argument("manual", help="manual annotation CSV (same schema)")
    compare.add_argument("--figures", default=None, metavar="DIR",
                         help="render a side-by-side bar chart")
    compare.set_defaults(func=cmd_compare)
    return parser


def _run_config_from_args(args) -> RunConfig:
    config = RunConfig()
    if args.config:
        apply_config_values(config, parse_config_file(args.config))
    if args.target_fps is not None:
        config.ingest.target_fps = args.target_fps
    if args.source_fps is not None:
        config.ingest.source_fps = args.source_fps
    elif config.ingest.source_fps < config.ingest.target_fps:
        config.ingest.source_fps = config.ingest.target_fps
    if args.size is not None:
        config.ingest.target_size = args.size
    if args.detector is not None:
        config.detector_backend = args.detector
    if args.segmenter is not None:
        config.segmenter.backend = args.segmenter
    if args.no_merge:
        config.merge_enabled = False
    if args.max_age is not None:
        config.tracker.max_age = args.max_age
    if args.n_init is not None:
        config.tracker.n_init = args.n_init
    if args.gap_max is not None:
        config.merge.gap_max = args.gap_max
    if args.similarity_floor is not None:
        config.selector.similarity_floor = args.similarity_floor
    if args.confidence_floor is not None:
        config.detector.confidence_floor = args.confidence_floor
    config.validate()
    return config


def cmd_analyze(args) -> int:
    config = _run_config_from_args(args)
    raw_geometry = _parse_geometry(args.raw_geometry) if args.raw_geometry else None

    needs_scene = (config.detector_backend == "oracle"
                   or config.segmenter.backend == "oracle")
    scene = discover_scene(args.input, args.scene) if needs_scene else None
    detector = build_detector(config.detector_backend, scene, config)
    segmenter = build_segmenter(config.segmenter.backend, scene)

    frames = frames_from_input(args.input, config, raw_geometry)
    result = run_analysis(frames, detector, segmenter, config)

    write_csv(result.reports, args.out)
    print(summary_line(result.reports), file=sys.stderr)

    if args.dump_stacks:
        dump_stacks(result.scored_stacks, args.dump_stacks)
    if args.dump_masks:
        dump_masks(result.masks, args.dump_masks)
    if args.figures:
        from .figures import render_report_figures
        render_report_figures(result.reports, result.best_entries, args.figures)
    return 0


def cmd_synth(args) -> int:
    try:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec_text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read scene description: {exc}") from exc
    scene = SyntheticScene(parse_scene_spec(spec_text))
    write_scene(scene, args.out, spec_text)
    print(f"rendered {scene.spec.frame_count} frames to {args.out}", file=sys.stderr)
    return 0


def _read_mask(path: str) -> np.ndarray:
    img = cv2.imread(path, cv2.IMREAD_GRAYSCALE)
    if img is None:
        raise InputError(f"cannot decode mask: {path}")
    return img > 127


def cmd_eval(args) -> int:
    def mask_files(directory):
        if not os.path.isdir(directory):
            raise InputError(f"not a directory: {directory}")
        return {name: os.path.join(directory, name)
                for name in os.listdir(directory) if name.lower().endswith(".png")}

    pred = mask_files(args.pred)
    truth = mask_files(args.truth)
    shared = sorted(set(pred) & set(truth))
    for name in sorted(set(pred) ^ set(truth)):
        print(f"warning: {name} present on one side only, skipped", file=sys.stderr)

    print("name\tiou\tdice")
    ious, dices = [], []
    for name in shared:
        a = _read_mask(pred[name])
        b = _read_mask(truth[name])
        if a.shape != b.shape:
            raise InputError(f"{name}: mask shapes differ {a.shape} vs {b.shape}")
        iou = mask_iou(a, b)
        d = dice(a, b)
        ious.append(iou)
        dices.append(d)
        print(f"{name}\t{iou:.4f}\t{d:.4f}")
    if ious:
        print(f"mean\t{np.mean(ious):.4f}\t{np.mean(dices):.4f}")
    return 0


def cmd_compare(args) -> int:
    result = compare_annotations(args.ours, args.manual)
    sys.stdout.write(render_comparison(result))
    if args.figures:
        from .figures import render_comparison_chart
        os.makedirs(args.figures, exist_ok=True)
        render_comparison_chart(result, os.path.join(args.figures, "comparison.png"))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except PlantDoctorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_status
    except BrokenPipeError:
        return 1


def entrypoint() -> None:
    sys.exit(main())
