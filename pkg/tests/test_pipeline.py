import numpy as np
import pytest

from plantdoctor.config import RunConfig
from plantdoctor.errors import UsageError
from plantdoctor.pipeline import (
    build_detector,
    build_segmenter,
    discover_scene,
    frames_from_input,
    run_analysis,
)
from plantdoctor.synthetic import OracleDetector, OracleSegmenter


def run_scene(scene, frames, **config_changes):
    config = RunConfig()
    for key, value in config_changes.items():
        setattr(config, key, value)
    detector = OracleDetector(scene, config.detector)
    segmenter = OracleSegmenter(scene)
    return run_analysis(frames, detector, segmenter, config)


class TestRunAnalysis:
    def test_reports_and_side_tables(self, two_leaf_scene, as_frames):
        result = run_scene(two_leaf_scene, as_frames(two_leaf_scene))
        assert sorted(r.leaf_id for r in result.reports) == [1, 2]
        assert set(result.histories) == {1, 2}
        assert result.remap == {1: 1, 2: 2}
        assert set(result.best_entries) == {1, 2}
        assert set(result.masks) == {1, 2}
        # confirmed from frame 2 in a 10-frame scene: 8 stacked crops each
        assert {len(v) for v in result.scored_stacks.values()} == {8}
        # history spans the tentative warm-up too
        for history in result.histories.values():
            assert history[0][0] == 0
            assert history[-1][0] == 9

    def test_ratios_match_scene_truth(self, two_leaf_scene, as_frames):
        result = run_scene(two_leaf_scene, as_frames(two_leaf_scene))
        by_id = {r.leaf_id: r for r in result.reports}
        assert by_id[1].ratio_pct == pytest.approx(
            two_leaf_scene.true_ratio(1), abs=0.5
        )
        assert by_id[2].ratio_pct == pytest.approx(0.0, abs=1e-9)
        assert by_id[1].leaf_area_px > 0
        assert by_id[1].damage_area_px > 0

    def test_merge_disabled_is_identity_when_unfragmented(
        self, two_leaf_scene, as_frames
    ):
        merged = run_scene(two_leaf_scene, as_frames(two_leaf_scene))
        plain = run_scene(
            two_leaf_scene, as_frames(two_leaf_scene), merge_enabled=False
        )
        assert [r.leaf_id for r in merged.reports] == [r.leaf_id for r in plain.reports]
        assert merged.remap == plain.remap

    def test_no_frames_gives_empty_result(self, two_leaf_scene):
        result = run_scene(two_leaf_scene, [])
        assert result.reports == []
        assert result.histories == {}
        assert result.remap == {}

    def test_masks_pair_with_best_entry_shape(self, two_leaf_scene, as_frames):
        result = run_scene(two_leaf_scene, as_frames(two_leaf_scene))
        for leaf_id, (leaf_mask, damage_mask) in result.masks.items():
            roi = result.best_entries[leaf_id].roi
            assert leaf_mask.shape == roi.shape[:2]
            assert damage_mask.shape == roi.shape[:2]
            assert leaf_mask.dtype == bool


class TestBuilders:
    def test_oracle_backends_need_scene(self):
        config = RunConfig()
        with pytest.raises(UsageError):
            build_detector("oracle", None, config)
        with pytest.raises(UsageError):
            build_segmenter("oracle", None)

    def test_unknown_backend_names(self):
        config = RunConfig()
        with pytest.raises(UsageError):
            build_detector("magic", None, config)
        with pytest.raises(UsageError):
            build_segmenter("magic", None)

    def test_frames_from_stdin_requires_geometry(self):
        with pytest.raises(UsageError):
            frames_from_input("-", RunConfig(), None)

    def test_discover_scene_prefers_explicit_path(self, tmp_path):
        assert discover_scene(str(tmp_path), None) is None
