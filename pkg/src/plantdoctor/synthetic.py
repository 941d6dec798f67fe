"""Deterministic synthetic scenes with exact ground truth.

Leaves are textured elliptical sprites on scripted trajectories; damage
is a set of flat-colored disks riding on the sprite. Because every
raster is a pure function of the scene description, the scene doubles as
an oracle: detector and segmenter backends that answer from ground truth
let the whole pipeline run — and be tested — without any trained model.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import dataclass, field

import cv2
import numpy as np

from .detection import Detection, DetectorConfig, LeafDetector, filter_detections
from .errors import BackendError, InputError, UsageError
from .ingest import Frame
from .segmentation import RoiContext, SegmenterBackend
from .tracking.tracker import box_iou

BACKGROUND = (24, 28, 20)  # dark soil


@dataclass
class LeafSpec:
    id_truth: int
    axes: tuple[float, float]                  # semi-axes (a, b) in pixels
    color: tuple[int, int, int]                # base RGB
    positions: list[tuple[float, float]]       # per-frame centers
    damage_blobs: list[tuple[float, float, float, tuple[int, int, int]]] = field(default_factory=list)
    occlusions: list[tuple[int, int]] = field(default_factory=list)  # inclusive intervals
    confidence: float = 1.0                    # detector confidence override

    def occluded(self, frame_index: int) -> bool:
        return any(a <= frame_index <= b for a, b in self.occlusions)


@dataclass
class SceneSpec:
    frame_count: int
    frame_size: int
    leaves: list[LeafSpec] = field(default_factory=list)
    seed: int = 0
    blur: dict[int, int] = field(default_factory=dict)  # frame -> box-blur radius

    def validate(self) -> None:
        if self.frame_count <= 0 or self.frame_size <= 0:
            raise InputError("scene needs positive frame count and size")
        seen = set()
        for leaf in self.leaves:
            if leaf.id_truth in seen:
                raise InputError(f"duplicate leaf id {leaf.id_truth}")
            seen.add(leaf.id_truth)
            a, b = leaf.axes
            if a <= 0 or b <= 0:
                raise InputError(f"leaf {leaf.id_truth}: axes must be positive")
            if len(leaf.positions) != self.frame_count:
                raise InputError(
                    f"leaf {leaf.id_truth}: {len(leaf.positions)} positions for "
                    f"{self.frame_count} frames")
            for rx, ry, radius, _ in leaf.damage_blobs:
                if rx * rx + ry * ry > 1.0:
                    raise InputError(
                        f"leaf {leaf.id_truth}: damage blob center ({rx},{ry}) outside unit disk")
                if radius <= 0:
                    raise InputError(f"leaf {leaf.id_truth}: damage radius must be positive")
            for start, end in leaf.occlusions:
                if start > end:
                    raise InputError(f"leaf {leaf.id_truth}: occlusion window {start}>{end}")
            if not (0.0 <= leaf.confidence <= 1.0):
                raise InputError(f"leaf {leaf.id_truth}: confidence outside [0,1]")
        for frame, radius in self.blur.items():
            if not (0 <= frame < self.frame_count) or radius < 1:
                raise InputError(f"bad blur entry frame={frame} radius={radius}")


def linear_positions(start: tuple[float, float], velocity: tuple[float, float],
                     frame_count: int) -> list[tuple[float, float]]:
    return [(start[0] + velocity[0] * k, start[1] + velocity[1] * k)
            for k in range(frame_count)]


class SyntheticScene:
    """Renderer + ground-truth answering service for one SceneSpec."""

    def __init__(self, spec: SceneSpec):
        spec.validate()
        self.spec = spec
        self._texture = {
            leaf.id_truth: self._texture_params(spec.seed, leaf.id_truth)
            for leaf in spec.leaves
        }
        for leaf in spec.leaves:
            if not any(self._leaf_raster(leaf, i)[0].any()
                       for i in range(spec.frame_count) if not leaf.occluded(i)):
                warnings.warn(f"leaf {leaf.id_truth} is never visible in any frame")

    @staticmethod
    def _texture_params(seed: int, leaf_id: int) -> tuple:
        rng = np.random.RandomState(seed * 1000 + leaf_id)
        f1x = rng.uniform(0.25, 0.6)
        f1y = rng.uniform(0.25, 0.6)
        p1 = rng.uniform(0.0, 2.0 * np.pi)
        f2x = rng.uniform(0.7, 1.3)
        f2y = rng.uniform(0.7, 1.3)
        p2 = rng.uniform(0.0, 2.0 * np.pi)
        amp = rng.uniform(28.0, 42.0)
        return f1x, f1y, p1, f2x, f2y, p2, amp

    def _texture_values(self, leaf_id: int, dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
        """Vein-like brightness modulation, rigid with the sprite (arguments
        are pixel offsets from the sprite center)."""
        f1x, f1y, p1, f2x, f2y, p2, amp = self._texture[leaf_id]
        return amp * 0.5 * (np.sin(f1x * dx + f1y * dy + p1)
                            + np.sin(f2x * dx + f2y * dy + p2))

    def _leaf_region(self, leaf: LeafSpec, frame_index: int):
        """Integer pixel grid covering the sprite, clipped to the frame.
        Returns (xs, ys, dx, dy) or None when fully outside."""
        size = self.spec.frame_size
        cx, cy = leaf.positions[frame_index]
        a, b = leaf.axes
        x0 = max(0, int(np.floor(cx - a)) - 1)
        x1 = min(size, int(np.ceil(cx + a)) + 2)
        y0 = max(0, int(np.floor(cy - b)) - 1)
        y1 = min(size, int(np.ceil(cy + b)) + 2)
        if x1 <= x0 or y1 <= y0:
            return None
        xs = np.arange(x0, x1, dtype=np.float64)
        ys = np.arange(y0, y1, dtype=np.float64)
        dx = xs[np.newaxis, :] - cx
        dy = ys[:, np.newaxis] - cy
        return (x0, y0, x1, y1), dx, dy

    def _leaf_raster(self, leaf: LeafSpec, frame_index: int):
        """(inside, damage, region) boolean rasters on the clipped grid.
        Pixels are sampled at integer centers."""
        region = self._leaf_region(leaf, frame_index)
        empty = np.zeros((0, 0), dtype=bool)
        if region is None:
            return empty, empty, None
        bounds, dx, dy = region
        a, b = leaf.axes
        u = dx / a
        v = dy / b
        inside = (u * u + v * v) <= 1.0
        damage = np.zeros_like(inside)
        for rx, ry, radius, _ in leaf.damage_blobs:
            bx = rx * a
            by = ry * b
            damage |= ((dx - bx) ** 2 + (dy - by) ** 2) <= radius * radius
        damage &= inside
        return inside, damage, bounds

    def render_frame(self, frame_index: int) -> np.ndarray:
        size = self.spec.frame_size
        img = np.empty((size, size, 3), dtype=np.uint8)
        img[:] = BACKGROUND
        for leaf in self.spec.leaves:  # painter's order: later leaves on top
            if leaf.occluded(frame_index):
                continue
            inside, damage, bounds = self._leaf_raster(leaf, frame_index)
            if bounds is None or not inside.any():
                continue
            x0, y0, x1, y1 = bounds
            cx, cy = leaf.positions[frame_index]
            dx = np.arange(x0, x1, dtype=np.float64)[np.newaxis, :] - cx
            dy = np.arange(y0, y1, dtype=np.float64)[:, np.newaxis] - cy
            tex = self._texture_values(leaf.id_truth, dx, dy)
            patch = img[y0:y1, x0:x1].astype(np.float64)
            for ch in range(3):
                channel = patch[..., ch]
                channel[inside] = leaf.color[ch] + tex[inside]
            for rx, ry, radius, blob_color in leaf.damage_blobs:
                blob = (((dx - rx * leaf.axes[0]) ** 2 + (dy - ry * leaf.axes[1]) ** 2)
                        <= radius * radius) & inside
                patch[blob] = blob_color
            img[y0:y1, x0:x1] = np.clip(patch, 0, 255).astype(np.uint8)
        radius = self.spec.blur.get(frame_index)
        if radius:
            k = 2 * radius + 1
            img = cv2.blur(img, (k, k))
        return img

    def frames(self):
        for i in range(self.spec.frame_count):
            yield i, self.render_frame(i)

    def leaf_mask(self, frame_index: int, leaf_id: int) -> np.ndarray:
        """Full-frame boolean raster of one leaf (empty while occluded)."""
        size = self.spec.frame_size
        mask = np.zeros((size, size), dtype=bool)
        leaf = self._leaf_by_id(leaf_id)
        if leaf.occluded(frame_index):
            return mask
        inside, _, bounds = self._leaf_raster(leaf, frame_index)
        if bounds is not None:
            x0, y0, x1, y1 = bounds
            mask[y0:y1, x0:x1] = inside
        return mask

    def damage_mask(self, frame_index: int, leaf_id: int) -> np.ndarray:
        size = self.spec.frame_size
        mask = np.zeros((size, size), dtype=bool)
        leaf = self._leaf_by_id(leaf_id)
        if leaf.occluded(frame_index):
            return mask
        _, damage, bounds = self._leaf_raster(leaf, frame_index)
        if bounds is not None:
            x0, y0, x1, y1 = bounds
            mask[y0:y1, x0:x1] = damage
        return mask

    def truth_boxes(self, frame_index: int) -> list[tuple[int, tuple, float]]:
        """(leaf id, tight bbox (x, y, w, h), confidence) for each visible leaf."""
        out = []
        for leaf in self.spec.leaves:
            if leaf.occluded(frame_index):
                continue
            inside, _, bounds = self._leaf_raster(leaf, frame_index)
            if bounds is None or not inside.any():
                continue
            x0, y0, _, _ = bounds
            rows = np.any(inside, axis=1)
            cols = np.any(inside, axis=0)
            ry = np.where(rows)[0]
            rx = np.where(cols)[0]
            bbox = (float(x0 + rx[0]), float(y0 + ry[0]),
                    float(rx[-1] - rx[0] + 1), float(ry[-1] - ry[0] + 1))
            out.append((leaf.id_truth, bbox, leaf.confidence))
        return out

    def true_ratio(self, leaf_id: int) -> float:
        """Scene-defined damage percentage: rasterized on an unclipped local
        grid, so it equals any fully-visible frame's ratio exactly when the
        trajectory moves by whole pixels."""
        leaf = self._leaf_by_id(leaf_id)
        a, b = leaf.axes
        ext = int(np.ceil(max(a, b))) + 2
        xs = np.arange(-ext, ext + 1, dtype=np.float64)
        dx = xs[np.newaxis, :]
        dy = xs[:, np.newaxis]
        inside = (dx / a) ** 2 + (dy / b) ** 2 <= 1.0
        damage = np.zeros_like(inside)
        for rx, ry, radius, _ in leaf.damage_blobs:
            damage |= ((dx - rx * a) ** 2 + (dy - ry * b) ** 2) <= radius * radius
        damage &= inside
        leaf_px = int(inside.sum())
        if leaf_px == 0:
            return 0.0
        return 100.0 * int(damage.sum()) / leaf_px

    def _leaf_by_id(self, leaf_id: int) -> LeafSpec:
        for leaf in self.spec.leaves:
            if leaf.id_truth == leaf_id:
                return leaf
        raise KeyError(f"no leaf with id {leaf_id}")


class OracleDetector(LeafDetector):
    """Detector that answers with ground-truth boxes.

    Only valid when ingest preserved the scene's native geometry (no
    letterboxing, no rescale); otherwise box coordinates would lie.
    """

    def __init__(self, scene: SyntheticScene, cfg: DetectorConfig | None = None):
        self.scene = scene
        self.cfg = cfg or DetectorConfig()

    def detect(self, frame: Frame) -> list[Detection]:
        size = self.scene.spec.frame_size
        if frame.image.shape[:2] != (size, size):
            raise UsageError(
                f"oracle detector needs frames at the scene's native {size}x{size}; "
                f"got {frame.image.shape[1]}x{frame.image.shape[0]} — run with --size {size}")
        dets = [
            Detection(bbox=bbox, confidence=conf, frame_index=frame.index)
            for _, bbox, conf in self.scene.truth_boxes(frame.source_index)
        ]
        return filter_detections(dets, self.cfg)


class OracleSegmenter(SegmenterBackend):
    """Segmenter that answers with ground-truth masks cropped to the ROI.

    The owning leaf is the one whose ground-truth box overlaps the crop
    window best; a window overlapping no leaf yields empty masks.
    """

    kind = "oracle"

    def __init__(self, scene: SyntheticScene):
        self.scene = scene

    def probabilities(self, roi, context=None):
        if context is None:
            raise BackendError("oracle segmenter requires crop context")
        x0, y0, x1, y1 = context.window
        if (y1 - y0, x1 - x0) != roi.shape[:2]:
            raise BackendError(
                f"crop window {context.window} does not match ROI shape {roi.shape[:2]}")
        window_box = (x0, y0, x1 - x0, y1 - y0)
        best_id, best_overlap = None, 0.0
        for leaf_id, bbox, _ in self.scene.truth_boxes(context.source_index):
            overlap = box_iou(window_box, bbox)
            if overlap > best_overlap:
                best_id, best_overlap = leaf_id, overlap
        shape = roi.shape[:2]
        if best_id is None:
            zero = np.zeros(shape, dtype=np.float64)
            return zero, zero.copy()
        leaf = self.scene.leaf_mask(context.source_index, best_id)[y0:y1, x0:x1]
        damage = self.scene.damage_mask(context.source_index, best_id)[y0:y1, x0:x1]
        return leaf.astype(np.float64), damage.astype(np.float64)


# ---------------------------------------------------------------------------
# Scene description files
# ---------------------------------------------------------------------------

def parse_scene_spec(text: str) -> SceneSpec:
    """Parse the line-oriented scene description format.

    Global keys: seed, frames, size, blur=frame,radius (repeatable).
    Each [leaf] section: id, axes=a,b, color=r,g,b, start=x,y,
    velocity=vx,vy, damage=rx,ry,radius,r,g,b (repeatable),
    occlude=first,last (repeatable), confidence.
    """
    header: dict[str, object] = {"seed": 0, "blur": {}}
    leaves: list[dict] = []
    current: dict | None = None

    def numbers(value: str, count: int, what: str) -> list[float]:
        parts = [p.strip() for p in value.split(",")]
        if len(parts) != count:
            raise InputError(f"{what}: expected {count} comma-separated values, got {value!r}")
        try:
            return [float(p) for p in parts]
        except ValueError as exc:
            raise InputError(f"{what}: bad number in {value!r}") from exc

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line != "[leaf]":
                raise InputError(f"line {lineno}: unknown section {line}")
            current = {"damage": [], "occlude": [], "confidence": 1.0, "velocity": (0.0, 0.0)}
            leaves.append(current)
            continue
        if "=" not in line:
            raise InputError(f"line {lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if current is None:
            if key == "seed":
                header["seed"] = int(float(value))
            elif key == "frames":
                header["frames"] = int(float(value))
            elif key == "size":
                header["size"] = int(float(value))
            elif key == "blur":
                frame, radius = numbers(value, 2, "blur")
                header["blur"][int(frame)] = int(radius)  # type: ignore[index]
            else:
                raise InputError(f"line {lineno}: unknown scene key {key!r}")
            continue
        if key == "id":
            current["id"] = int(float(value))
        elif key == "axes":
            current["axes"] = tuple(numbers(value, 2, "axes"))
        elif key == "color":
            current["color"] = tuple(int(v) for v in numbers(value, 3, "color"))
        elif key == "start":
            current["start"] = tuple(numbers(value, 2, "start"))
        elif key == "velocity":
            current["velocity"] = tuple(numbers(value, 2, "velocity"))
        elif key == "damage":
            rx, ry, radius, r, g, b = numbers(value, 6, "damage")
            current["damage"].append((rx, ry, radius, (int(r), int(g), int(b))))
        elif key == "occlude":
            first, last = numbers(value, 2, "occlude")
            current["occlude"].append((int(first), int(last)))
        elif key == "confidence":
            current["confidence"] = float(value)
        else:
            raise InputError(f"line {lineno}: unknown leaf key {key!r}")

    for required in ("frames", "size"):
        if required not in header:
            raise InputError(f"scene is missing required key {required!r}")
    frame_count = int(header["frames"])  # type: ignore[arg-type]

    leaf_specs = []
    for entry in leaves:
        for required in ("id", "axes", "color", "start"):
            if required not in entry:
                raise InputError(f"a [leaf] section is missing required key {required!r}")
        leaf_specs.append(LeafSpec(
            id_truth=entry["id"],
            axes=entry["axes"],
            color=entry["color"],
            positions=linear_positions(entry["start"], entry["velocity"], frame_count),
            damage_blobs=entry["damage"],
            occlusions=entry["occlude"],
            confidence=entry["confidence"],
        ))
    spec = SceneSpec(
        frame_count=frame_count,
        frame_size=int(header["size"]),  # type: ignore[arg-type]
        leaves=leaf_specs,
        seed=int(header["seed"]),        # type: ignore[arg-type]
        blur=header["blur"],             # type: ignore[arg-type]
    )
    spec.validate()
    return spec


def load_scene(path: str) -> SyntheticScene:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read scene description: {exc}") from exc
    return SyntheticScene(parse_scene_spec(text))


def write_scene(scene: SyntheticScene, out_dir: str, spec_text: str | None = None) -> None:
    """Render a scene to disk: numbered frames, the scene description
    (so `analyze` can find its oracle), and ground-truth sidecars."""
    os.makedirs(out_dir, exist_ok=True)
    for index, image in scene.frames():
        cv2.imwrite(os.path.join(out_dir, f"frame_{index:04d}.png"),
                    cv2.cvtColor(image, cv2.COLOR_RGB2BGR))
    if spec_text is not None:
        with open(os.path.join(out_dir, "scene.spec"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(spec_text)

    box_lines = ["frame\tid\tx\ty\tw\th\tconfidence"]
    for i in range(scene.spec.frame_count):
        for leaf_id, (x, y, w, h), conf in scene.truth_boxes(i):
            box_lines.append(f"{i}\t{leaf_id}\t{x:.0f}\t{y:.0f}\t{w:.0f}\t{h:.0f}\t{conf:g}")
    with open(os.path.join(out_dir, "truth_boxes.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(box_lines) + "\n")

    ratio_lines = ["id\tratio_pct"]
    for leaf in scene.spec.leaves:
        ratio_lines.append(f"{leaf.id_truth}\t{scene.true_ratio(leaf.id_truth):.6f}")
    with open(os.path.join(out_dir, "truth_ratios.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(ratio_lines) + "\n")
