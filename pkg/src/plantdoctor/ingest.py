"""Frame acquisition: rate downsampling and letterbox resizing.

Decoding is delegated to whatever produced the input: either a directory
of numbered PNG/JPEG frames or a raw RGB24 byte stream on stdin with
declared geometry. No color transforms happen here — frames pass through
untouched except for the geometric letterbox resize.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import BinaryIO, Iterator

import cv2
import numpy as np

from .errors import InputError, UsageError

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")


@dataclass(frozen=True)
class Frame:
    """One video frame. `index` is the ordinal in the analyzed (downsampled)
    sequence; `source_index` is the ordinal in the original footage."""
    image: np.ndarray  # HxWx3 uint8, RGB
    index: int
    source_index: int


@dataclass
class IngestConfig:
    source_fps: float
    target_fps: float = 3.0
    target_size: int = 640

    def validate(self) -> None:
        if not (0 < self.target_fps <= self.source_fps):
            raise UsageError(
                f"need 0 < target_fps <= source_fps, got target={self.target_fps} source={self.source_fps}")
        if self.target_size <= 0:
            raise UsageError(f"target_size must be positive, got {self.target_size}")


def downsample_indices(source_fps: float, target_fps: float, frame_count: int) -> list[int]:
    """Source ordinals kept when resampling source_fps footage to target_fps.

    Ordinal k of the output maps to source frame floor(k * source/target);
    generation stops at frame_count. The first kept ordinal is always 0.
    """
    if target_fps <= 0 or target_fps > source_fps:
        raise UsageError(
            f"need 0 < target_fps <= source_fps, got target={target_fps} source={source_fps}")
    if frame_count < 0:
        raise UsageError(f"frame_count must be >= 0, got {frame_count}")
    kept = []
    k = 0
    while True:
        src = int(np.floor(k * source_fps / target_fps))
        if src >= frame_count:
            break
        kept.append(src)
        k += 1
    return kept


def resize_frame(frame: Frame, target_size: int) -> Frame:
    """Letterbox `frame` onto a target_size x target_size black canvas.

    Scale preserves aspect ratio (bilinear); the image is centered and
    padded with black bars. A frame already at target size passes through
    bit-identical.
    """
    img = frame.image
    h, w = img.shape[:2]
    if h == 0 or w == 0:
        raise InputError("zero-area frame")
    if h == target_size and w == target_size:
        return frame

    scale = min(target_size / w, target_size / h)
    new_w = max(1, int(round(w * scale)))
    new_h = max(1, int(round(h * scale)))
    resized = cv2.resize(img, (new_w, new_h), interpolation=cv2.INTER_LINEAR)

    canvas = np.zeros((target_size, target_size, 3), dtype=img.dtype)
    x0 = (target_size - new_w) // 2
    y0 = (target_size - new_h) // 2
    canvas[y0:y0 + new_h, x0:x0 + new_w] = resized
    return Frame(image=canvas, index=frame.index, source_index=frame.source_index)


def _list_frame_files(directory: str) -> list[str]:
    try:
        names = os.listdir(directory)
    except OSError as exc:
        raise InputError(f"cannot read input directory: {exc}") from exc
    files = sorted(n for n in names if n.lower().endswith(IMAGE_EXTENSIONS))
    if not files:
        return []
    return [os.path.join(directory, n) for n in files]


def iter_directory_frames(directory: str, cfg: IngestConfig) -> Iterator[Frame]:
    """Frames from a directory of images, lexicographically ordered,
    downsampled and letterboxed per `cfg`."""
    cfg.validate()
    paths = _list_frame_files(directory)
    kept = downsample_indices(cfg.source_fps, cfg.target_fps, len(paths))
    for out_index, src_index in enumerate(kept):
        bgr = cv2.imread(paths[src_index], cv2.IMREAD_COLOR)
        if bgr is None:
            raise InputError(f"cannot decode image: {paths[src_index]}")
        rgb = cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
        yield resize_frame(Frame(rgb, out_index, src_index), cfg.target_size)


def iter_raw_frames(stream: BinaryIO, width: int, height: int, cfg: IngestConfig) -> Iterator[Frame]:
    """Frames from a raw RGB24 stream (e.g. ffmpeg rawvideo on stdin)."""
    cfg.validate()
    if width <= 0 or height <= 0:
        raise UsageError(f"raw geometry must be positive, got {width}x{height}")
    frame_bytes = width * height * 3
    step = cfg.source_fps / cfg.target_fps
    out_index = 0
    next_keep = 0
    src_index = 0
    while True:
        chunk = stream.read(frame_bytes)
        if not chunk:
            break
        if len(chunk) != frame_bytes:
            raise InputError(
                f"truncated raw stream: frame {src_index} has {len(chunk)} of {frame_bytes} bytes")
        if src_index == next_keep:
            img = np.frombuffer(chunk, dtype=np.uint8).reshape(height, width, 3)
            yield resize_frame(Frame(img.copy(), out_index, src_index), cfg.target_size)
            out_index += 1
            next_keep = int(np.floor(out_index * step))
        src_index += 1
