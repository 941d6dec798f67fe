"""Constant-velocity Kalman filter over bounding boxes.

State is an 8-vector (cx, cy, a, h, vcx, vcy, va, vh) where `a` is the
width/height aspect ratio. Measurement is the first four components.
Process and observation noise scale with box height, so large boxes are
allowed to move and deform more in absolute pixels than small ones.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

# 0.95 quantile of the chi-square distribution with 4 degrees of freedom.
# Gating threshold for squared Mahalanobis distances in measurement space.
CHI2_GATE_95_4DOF = 9.4877


class KalmanFilter:

    def __init__(self) -> None:
        ndim, dt = 4, 1.0
        self._motion_mat = np.eye(2 * ndim, 2 * ndim)
        for i in range(ndim):
            self._motion_mat[i, ndim + i] = dt
        self._update_mat = np.eye(ndim, 2 * ndim)
        self._std_weight_position = 1.0 / 20
        self._std_weight_velocity = 1.0 / 160

    def initiate(self, measurement: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Start a new track from an unassociated measurement (cx, cy, a, h)."""
        mean_pos = np.asarray(measurement, dtype=np.float64)
        mean_vel = np.zeros_like(mean_pos)
        mean = np.concatenate([mean_pos, mean_vel])

        h = float(measurement[3])
        std = [
            2 * self._std_weight_position * h,
            2 * self._std_weight_position * h,
            1e-2,
            2 * self._std_weight_position * h,
            10 * self._std_weight_velocity * h,
            10 * self._std_weight_velocity * h,
            1e-5,
            10 * self._std_weight_velocity * h,
        ]
        covariance = np.diag(np.square(std))
        return mean, covariance

    def predict(self, mean: np.ndarray, covariance: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Advance the state one frame."""
        h = float(mean[3])
        std_pos = [
            self._std_weight_position * h,
            self._std_weight_position * h,
            1e-2,
            self._std_weight_position * h,
        ]
        std_vel = [
            self._std_weight_velocity * h,
            self._std_weight_velocity * h,
            1e-5,
            self._std_weight_velocity * h,
        ]
        motion_cov = np.diag(np.square(np.concatenate([std_pos, std_vel])))

        mean = self._motion_mat @ mean
        covariance = self._motion_mat @ covariance @ self._motion_mat.T + motion_cov
        return mean, covariance

    def project(self, mean: np.ndarray, covariance: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map state distribution into measurement space (adds observation noise)."""
        h = float(mean[3])
        std = [
            self._std_weight_position * h,
            self._std_weight_position * h,
            1e-1,
            self._std_weight_position * h,
        ]
        innovation_cov = np.diag(np.square(std))

        mean = self._update_mat @ mean
        covariance = self._update_mat @ covariance @ self._update_mat.T + innovation_cov
        return mean, covariance

    def update(self, mean: np.ndarray, covariance: np.ndarray,
               measurement: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Fold a matched measurement into the state."""
        projected_mean, projected_cov = self.project(mean, covariance)

        chol, lower = scipy.linalg.cho_factor(projected_cov, lower=True, check_finite=False)
        kalman_gain = scipy.linalg.cho_solve(
            (chol, lower), (covariance @ self._update_mat.T).T, check_finite=False).T
        innovation = np.asarray(measurement, dtype=np.float64) - projected_mean

        new_mean = mean + kalman_gain @ innovation
        new_covariance = covariance - kalman_gain @ projected_cov @ kalman_gain.T
        return new_mean, new_covariance

    def gating_distance(self, mean: np.ndarray, covariance: np.ndarray,
                        measurements: np.ndarray) -> np.ndarray:
        """Squared Mahalanobis distance from the state to each measurement.

        Args:
            measurements: N x 4 array of (cx, cy, a, h) rows.

        Returns:
            Length-N array of squared distances in measurement space.
        """
        projected_mean, projected_cov = self.project(mean, covariance)
        measurements = np.atleast_2d(np.asarray(measurements, dtype=np.float64))

        chol = np.linalg.cholesky(projected_cov)
        delta = measurements - projected_mean
        z = scipy.linalg.solve_triangular(
            chol, delta.T, lower=True, check_finite=False, overwrite_b=True)
        return np.sum(z * z, axis=0)
