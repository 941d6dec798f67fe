"""Shared fixtures: deterministic image patches and a small rendered scene."""

import numpy as np
import pytest

from plantdoctor.ingest import Frame
from plantdoctor.synthetic import LeafSpec, SceneSpec, SyntheticScene, linear_positions


@pytest.fixture
def textured_patch():
    """Factory for reproducible textured RGB patches (uint8)."""

    def make(seed, height=48, width=48):
        rng = np.random.RandomState(seed)
        base = rng.randint(40, 200, size=3).astype(np.float64)
        yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
        wave = 30.0 * np.sin(0.35 * xx + 0.2 * yy + rng.uniform(0, 2 * np.pi))
        ripple = 12.0 * np.sin(0.9 * xx - 0.5 * yy + rng.uniform(0, 2 * np.pi))
        img = base[None, None, :] + (wave + ripple)[..., None]
        return np.clip(img, 0, 255).astype(np.uint8)

    return make


@pytest.fixture
def as_frames():
    """Wrap rendered scene images into Frame records."""

    def make(scene):
        return [Frame(image, index, index) for index, image in scene.frames()]

    return make


@pytest.fixture
def two_leaf_scene():
    spec = SceneSpec(
        frame_count=10,
        frame_size=256,
        seed=3,
        leaves=[
            LeafSpec(
                id_truth=1,
                axes=(24.0, 18.0),
                color=(70, 150, 80),
                positions=linear_positions((60.0, 60.0), (2.0, 1.0), 10),
                damage_blobs=[(0.3, -0.2, 5.0, (150, 100, 60))],
            ),
            LeafSpec(
                id_truth=2,
                axes=(20.0, 26.0),
                color=(95, 130, 60),
                positions=linear_positions((180.0, 170.0), (-1.0, 2.0), 10),
            ),
        ],
    )
    return SyntheticScene(spec)
