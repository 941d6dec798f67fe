"""Image-quality and mask-evaluation kernels.

All functions are pure and operate on plain numpy arrays: grayscale
images as 2-D float or integer arrays with values in [0, 255], binary
masks as 2-D boolean arrays.
"""

from __future__ import annotations

import cv2
import numpy as np
from scipy.signal import convolve2d

LAPLACIAN_KERNEL = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=np.float64)

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_L = 255.0


def laplacian_variance(img: np.ndarray) -> float:
    """Variance of 4-neighbor Laplacian responses over interior pixels.

    The kernel is applied without padding, so only pixels whose full
    3x3 neighborhood lies inside the image contribute. Returns the
    population variance of the responses; constant and affine-ramp
    images give exactly 0.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 3 or img.shape[1] < 3:
        raise ValueError(f"image must be at least 3x3, got {img.shape}")
    responses = convolve2d(img, LAPLACIAN_KERNEL, mode="valid")
    return float(np.var(responses))


def _gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalized 1-D sampled Gaussian; the 2-D window is its outer product."""
    r = size // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean local structural similarity between two grayscale images.

    Uses an 11x11 Gaussian window (sigma 1.5), K1=0.01, K2=0.03 and a
    dynamic range of 255. Windows are evaluated only where they fit
    entirely inside the images, so both inputs must be at least 11x11.
    Symmetric in its arguments; ssim(x, x) == 1.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim != 2 or a.shape[0] < SSIM_WINDOW or a.shape[1] < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.shape}")

    g = _gaussian_window()
    r = SSIM_WINDOW // 2
    c1 = (SSIM_K1 * SSIM_L) ** 2
    c2 = (SSIM_K2 * SSIM_L) ** 2

    def filt(img):
        # separable Gaussian; interior slice == valid-mode convolution
        return cv2.sepFilter2D(img, -1, g, g)[r:-r, r:-r]

    mu_a = filt(a)
    mu_b = filt(b)
    var_a = filt(a * a) - mu_a * mu_a
    var_b = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b

    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def _check_masks(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError(f"mask shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection over union of two binary masks.

    Two empty masks agree perfectly on absence and score 1.0.
    """
    a, b = _check_masks(a, b)
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return 1.0
    return float(np.count_nonzero(a & b)) / union


def dice(a: np.ndarray, b: np.ndarray) -> float:
    """Dice coefficient 2|a&b| / (|a|+|b|); 1.0 when both masks are empty."""
    a, b = _check_masks(a, b)
    total = int(np.count_nonzero(a)) + int(np.count_nonzero(b))
    if total == 0:
        return 1.0
    return 2.0 * np.count_nonzero(a & b) / total


def dice_loss(a: np.ndarray, b: np.ndarray) -> float:
    return 1.0 - dice(a, b)


def grayscale(rgb: np.ndarray) -> np.ndarray:
    """Rec.601 luminance of an HxWx3 image as float64 in [0, 255]."""
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim == 2:
        return rgb
    return rgb[..., 0] * 0.299 + rgb[..., 1] * 0.587 + rgb[..., 2] * 0.114
