"""Handcrafted appearance descriptors for re-identification.

A deliberately simple, deterministic stand-in for a learned re-ID
embedding: a coarse 16x16 color thumbnail concatenated with per-channel
intensity-weighted histograms taken over an 8x8x3 reduction of the ROI.
Descriptors are unit L2 vectors, so cosine distance is 1 - dot.
"""

from __future__ import annotations

import cv2
import numpy as np

# 16*16*3 thumbnail values + 3 channels * 8 histogram bins
FEATURE_DIM = 16 * 16 * 3 + 3 * 8


def appearance_feature(roi: np.ndarray) -> np.ndarray:
    """Descriptor for one ROI; always a unit vector of FEATURE_DIM floats.

    A fully black ROI carries no appearance signal at all; it falls back
    to the uniform unit vector so the norm contract still holds.
    """
    roi = np.asarray(roi)
    if roi.ndim != 3 or roi.shape[2] != 3:
        raise ValueError("expected an HxWx3 color ROI")
    if roi.shape[0] == 0 or roi.shape[1] == 0:
        raise ValueError("empty ROI")

    patch = cv2.resize(roi, (16, 16), interpolation=cv2.INTER_AREA).astype(np.float64)
    thumb = cv2.resize(roi, (8, 8), interpolation=cv2.INTER_AREA)

    histograms = []
    bin_index = (thumb.astype(np.int64) >> 5)  # 8 bins of width 32
    weights = thumb.astype(np.float64)
    for channel in range(3):
        hist = np.zeros(8, dtype=np.float64)
        np.add.at(hist, bin_index[..., channel].ravel(), weights[..., channel].ravel())
        histograms.append(hist)

    vec = np.concatenate([patch.ravel(), *histograms])
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        vec = np.ones_like(vec)
        norm = np.linalg.norm(vec)
    return vec / norm


def min_cosine_distance(gallery: np.ndarray, features: np.ndarray) -> np.ndarray:
    """Smallest cosine distance from each feature to any gallery entry.

    Args:
        gallery: (k, d) unit vectors belonging to one track.
        features: (n, d) unit vectors for the current detections.

    Returns:
        Length-n array of distances in [0, 2].
    """
    gallery = np.atleast_2d(np.asarray(gallery, dtype=np.float64))
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    similarity = gallery @ features.T
    return np.clip(1.0 - similarity.max(axis=0), 0.0, 2.0)
