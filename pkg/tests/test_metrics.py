import cv2
import numpy as np
import pytest

from plantdoctor.metrics import (
    dice,
    dice_loss,
    grayscale,
    laplacian_variance,
    mask_iou,
    ssim,
)


class TestLaplacianVariance:
    def test_constant_image_is_zero(self):
        assert laplacian_variance(np.full((16, 16), 77.0)) == 0.0

    def test_linear_ramp_is_zero(self):
        # the 4-neighbour Laplacian annihilates any affine surface
        ramp = np.tile(np.arange(32, dtype=np.float64), (16, 1))
        assert laplacian_variance(ramp) == 0.0
        assert laplacian_variance(ramp.T.copy()) == 0.0

    def test_checkerboard_value(self):
        board = ((np.indices((8, 8)).sum(axis=0) % 2) * 255).astype(np.float64)
        assert laplacian_variance(board) == 1040400.0

    def test_offset_invariance(self):
        rng = np.random.RandomState(11)
        img = rng.uniform(0, 200, (24, 31))
        assert laplacian_variance(img + 55.0) == pytest.approx(
            laplacian_variance(img), abs=1e-6
        )

    def test_blur_lowers_variance(self):
        rng = np.random.RandomState(4)
        img = rng.uniform(0, 255, (40, 40))
        blurred = cv2.blur(img, (5, 5))
        assert laplacian_variance(blurred) < laplacian_variance(img)

    def test_rejects_images_smaller_than_kernel(self):
        with pytest.raises(ValueError):
            laplacian_variance(np.zeros((2, 5)))

    def test_accepts_uint8(self):
        board = ((np.indices((8, 8)).sum(axis=0) % 2) * 255).astype(np.uint8)
        assert laplacian_variance(board) == 1040400.0


class TestSsim:
    def test_identical_images_score_one(self):
        rng = np.random.RandomState(0)
        img = rng.uniform(0, 255, (32, 32))
        assert ssim(img, img) == pytest.approx(1.0, abs=1e-9)

    def test_constant_pair_closed_form(self):
        # both variances and the covariance vanish, so only the luminance
        # term survives: (2*mu_x*mu_y + C1) / (mu_x^2 + mu_y^2 + C1)
        a = np.full((16, 16), 100.0)
        b = np.full((16, 16), 200.0)
        c1 = (0.01 * 255) ** 2
        expected = (2 * 100.0 * 200.0 + c1) / (100.0**2 + 200.0**2 + c1)
        assert ssim(a, b) == pytest.approx(expected, abs=1e-6)

    def test_symmetry(self):
        rng = np.random.RandomState(7)
        a = rng.uniform(0, 255, (24, 40))
        b = rng.uniform(0, 255, (24, 40))
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)

    def test_monotone_under_gaussian_noise(self):
        rng = np.random.RandomState(5)
        base = rng.uniform(60, 200, (48, 48))
        scores = []
        for sigma in (5.0, 10.0, 20.0, 40.0):
            noisy = base + np.random.RandomState(99).normal(0, sigma, base.shape)
            scores.append(ssim(base, np.clip(noisy, 0, 255)))
        assert all(s2 < s1 for s1, s2 in zip(scores, scores[1:]))
        assert all(s < 1.0 for s in scores)

    def test_matches_reference_implementation(self):
        skimage_metrics = pytest.importorskip("skimage.metrics")
        rng = np.random.RandomState(21)
        for _ in range(5):
            a = rng.uniform(0, 255, (40, 56))
            b = np.clip(a + rng.normal(0, 12, a.shape), 0, 255)
            ref = skimage_metrics.structural_similarity(
                a,
                b,
                gaussian_weights=True,
                sigma=1.5,
                use_sample_covariance=False,
                data_range=255,
            )
            assert ssim(a, b) == pytest.approx(ref, abs=1e-9)

    def test_shape_mismatch_raises(self):
        with pytest.raises(ValueError):
            ssim(np.zeros((16, 16)), np.zeros((16, 17)))

    def test_too_small_raises(self):
        with pytest.raises(ValueError):
            ssim(np.zeros((10, 16)), np.zeros((10, 16)))

    def test_eleven_pixel_minimum_is_accepted(self):
        img = np.random.RandomState(1).uniform(0, 255, (11, 11))
        assert ssim(img, img) == pytest.approx(1.0, abs=1e-9)


class TestMaskOverlap:
    def test_identical_masks(self):
        m = np.random.RandomState(3).rand(20, 20) > 0.5
        assert mask_iou(m, m) == 1.0
        assert dice(m, m) == 1.0

    def test_disjoint_masks(self):
        a = np.zeros((10, 10), bool)
        b = np.zeros((10, 10), bool)
        a[:5] = True
        b[5:] = True
        assert mask_iou(a, b) == 0.0
        assert dice(a, b) == 0.0

    def test_half_overlap(self):
        # a covers rows 0..1, b covers rows 1..2: |i|=4, |u|=12, |a|+|b|=16
        a = np.zeros((4, 4), bool)
        b = np.zeros((4, 4), bool)
        a[0:2] = True
        b[1:3] = True
        assert mask_iou(a, b) == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert dice(a, b) == pytest.approx(0.5, abs=1e-12)

    def test_both_empty_score_one(self):
        a = np.zeros((8, 8), bool)
        assert mask_iou(a, a) == 1.0
        assert dice(a, a) == 1.0

    def test_one_empty_scores_zero(self):
        a = np.zeros((8, 8), bool)
        b = np.ones((8, 8), bool)
        assert mask_iou(a, b) == 0.0
        assert dice(a, b) == 0.0

    def test_dice_from_iou_identity(self):
        rng = np.random.RandomState(42)
        for _ in range(200):
            a = rng.rand(12, 12) > rng.uniform(0.2, 0.8)
            b = rng.rand(12, 12) > rng.uniform(0.2, 0.8)
            i = mask_iou(a, b)
            assert dice(a, b) == pytest.approx(2 * i / (1 + i), abs=1e-12)

    def test_dice_loss_complement(self):
        a = np.zeros((6, 6), bool)
        b = np.zeros((6, 6), bool)
        a[:3] = True
        b[1:4] = True
        assert dice_loss(a, b) == pytest.approx(1.0 - dice(a, b), abs=1e-12)

    def test_shape_mismatch_raises(self):
        with pytest.raises(ValueError):
            mask_iou(np.zeros((4, 4), bool), np.zeros((4, 5), bool))
        with pytest.raises(ValueError):
            dice(np.zeros((4, 4), bool), np.zeros((5, 4), bool))

    def test_symmetry(self):
        rng = np.random.RandomState(9)
        a = rng.rand(15, 15) > 0.5
        b = rng.rand(15, 15) > 0.5
        assert mask_iou(a, b) == mask_iou(b, a)
        assert dice(a, b) == dice(b, a)


class TestGrayscale:
    def test_pure_channels(self):
        img = np.zeros((2, 2, 3), np.uint8)
        img[..., 0] = 255
        assert grayscale(img) == pytest.approx(np.full((2, 2), 255 * 0.299), abs=1e-9)
        img = np.zeros((2, 2, 3), np.uint8)
        img[..., 1] = 255
        assert grayscale(img) == pytest.approx(np.full((2, 2), 255 * 0.587), abs=1e-9)
        img = np.zeros((2, 2, 3), np.uint8)
        img[..., 2] = 255
        assert grayscale(img) == pytest.approx(np.full((2, 2), 255 * 0.114), abs=1e-9)

    def test_white_maps_to_255(self):
        img = np.full((3, 3, 3), 255, np.uint8)
        assert grayscale(img) == pytest.approx(np.full((3, 3), 255.0), abs=1e-9)

    def test_two_dim_input_passes_through_as_float(self):
        img = np.arange(9, dtype=np.uint8).reshape(3, 3)
        out = grayscale(img)
        assert out.dtype == np.float64
        assert np.array_equal(out, img.astype(np.float64))
