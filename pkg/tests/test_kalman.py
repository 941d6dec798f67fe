import numpy as np
import pytest

from plantdoctor.tracking.kalman import CHI2_GATE_95_4DOF, KalmanFilter


@pytest.fixture
def kf():
    return KalmanFilter()


def run_track(kf, measurements):
    mean, cov = kf.initiate(np.asarray(measurements[0], float))
    for z in measurements[1:]:
        mean, cov = kf.predict(mean, cov)
        mean, cov = kf.update(mean, cov, np.asarray(z, float))
    return mean, cov


class TestInitiate:
    def test_state_layout(self, kf):
        mean, cov = kf.initiate(np.array([10.0, 20.0, 1.5, 40.0]))
        assert mean.shape == (8,)
        assert cov.shape == (8, 8)
        assert np.array_equal(mean[:4], [10.0, 20.0, 1.5, 40.0])
        assert np.array_equal(mean[4:], np.zeros(4))

    def test_covariance_scales_with_height(self, kf):
        _, small = kf.initiate(np.array([0.0, 0.0, 1.0, 10.0]))
        _, large = kf.initiate(np.array([0.0, 0.0, 1.0, 100.0]))
        assert large[0, 0] == 100 * small[0, 0]
        assert large[4, 4] == 100 * small[4, 4]
        # aspect-ratio variance does not depend on box size
        assert large[2, 2] == small[2, 2]

    def test_covariance_is_diagonal(self, kf):
        _, cov = kf.initiate(np.array([5.0, 5.0, 1.0, 30.0]))
        assert np.array_equal(cov, np.diag(np.diag(cov)))


class TestPredict:
    def test_constant_velocity_extrapolation(self, kf):
        mean, cov = kf.initiate(np.array([100.0, 50.0, 1.0, 20.0]))
        mean[4] = 5.0  # px/frame horizontally
        mean, cov = kf.predict(mean, cov)
        assert mean[0] == 105.0
        assert mean[1] == 50.0
        assert mean[4] == 5.0

    def test_zero_velocity_keeps_position(self, kf):
        mean, cov = kf.initiate(np.array([7.0, 9.0, 1.1, 25.0]))
        out, _ = kf.predict(mean, cov)
        assert np.array_equal(out[:4], mean[:4])

    def test_uncertainty_grows(self, kf):
        mean, cov = kf.initiate(np.array([0.0, 0.0, 1.0, 30.0]))
        _, cov2 = kf.predict(mean, cov)
        assert np.trace(cov2) > np.trace(cov)


class TestUpdate:
    def test_zero_innovation_keeps_position(self, kf):
        mean, cov = kf.initiate(np.array([40.0, 60.0, 0.8, 22.0]))
        pred_mean, pred_cov = kf.predict(mean, cov)
        new_mean, _ = kf.update(pred_mean, pred_cov, pred_mean[:4].copy())
        assert new_mean[:4] == pytest.approx(pred_mean[:4], abs=1e-9)

    def test_update_shrinks_position_variance(self, kf):
        mean, cov = kf.initiate(np.array([0.0, 0.0, 1.0, 30.0]))
        pred_mean, pred_cov = kf.predict(mean, cov)
        _, new_cov = kf.update(pred_mean, pred_cov, np.array([1.0, -1.0, 1.0, 30.0]))
        assert new_cov[0, 0] < pred_cov[0, 0]
        assert new_cov[1, 1] < pred_cov[1, 1]

    def test_moving_target_locks_on(self, kf):
        # noiseless constant-velocity target: error vanishes as the filter
        # accumulates evidence
        measurements = [[5.0 * t, 50.0, 1.2, 40.0] for t in range(51)]
        mean, _ = run_track(kf, measurements)
        assert abs(mean[0] - 250.0) < 0.01
        assert mean[4] == pytest.approx(5.0, abs=0.01)

    def test_error_shrinks_over_time(self, kf):
        mean, cov = kf.initiate(np.array([0.0, 50.0, 1.2, 40.0]))
        errors = []
        for t in range(1, 51):
            mean, cov = kf.predict(mean, cov)
            mean, cov = kf.update(mean, cov, np.array([5.0 * t, 50.0, 1.2, 40.0]))
            errors.append(abs(mean[0] - 5.0 * t))
        # after the initial transient the error decays monotonically
        assert all(b <= a + 1e-12 for a, b in zip(errors[1:], errors[2:]))
        assert errors[-1] < errors[1] / 100

    def test_stationary_relock_after_jump(self, kf):
        mean, cov = kf.initiate(np.array([100.0, 100.0, 1.0, 30.0]))
        target = np.array([80.0, 100.0, 1.0, 30.0])
        first = None
        for _ in range(50):
            mean, cov = kf.predict(mean, cov)
            mean, cov = kf.update(mean, cov, target)
            if first is None:
                first = abs(mean[0] - 80.0)
        assert abs(mean[0] - 80.0) < 5e-3
        assert abs(mean[0] - 80.0) < first / 100


class TestGating:
    def test_zero_distance_for_exact_measurement(self, kf):
        mean, cov = kf.initiate(np.array([10.0, 20.0, 1.0, 30.0]))
        mean, cov = kf.predict(mean, cov)
        d2 = kf.gating_distance(mean, cov, mean[None, :4])
        assert d2.shape == (1,)
        assert d2[0] == pytest.approx(0.0, abs=1e-12)

    def test_translation_invariance(self, kf):
        mean, cov = kf.initiate(np.array([0.0, 0.0, 1.0, 30.0]))
        mean, cov = kf.predict(mean, cov)
        offset = np.array([3.0, -2.0, 0.0, 0.0])
        d_here = kf.gating_distance(mean, cov, (mean[:4] + offset)[None])
        shifted = mean.copy()
        shifted[0] += 500.0
        d_there = kf.gating_distance(shifted, cov, (shifted[:4] + offset)[None])
        assert d_here[0] == pytest.approx(d_there[0], abs=1e-9)

    def test_unit_offsets_with_zero_covariance(self, kf):
        # with P = 0 the innovation covariance reduces to the measurement
        # noise diag((h/20)^2, (h/20)^2, 0.1^2, (h/20)^2); at h = 20 a one
        # pixel offset in each centre coordinate contributes exactly 1
        mean = np.array([0.0, 0.0, 1.0, 20.0, 0.0, 0.0, 0.0, 0.0])
        cov = np.zeros((8, 8))
        z = np.array([[1.0, 1.0, 1.0, 20.0]])
        d2 = kf.gating_distance(mean, cov, z)
        assert d2[0] == 2.0

    def test_batch_of_candidates(self, kf):
        mean, cov = kf.initiate(np.array([50.0, 50.0, 1.0, 40.0]))
        mean, cov = kf.predict(mean, cov)
        zs = np.array(
            [
                [50.0, 50.0, 1.0, 40.0],
                [55.0, 50.0, 1.0, 40.0],
                [300.0, 300.0, 1.0, 40.0],
            ]
        )
        d2 = kf.gating_distance(mean, cov, zs)
        assert d2.shape == (3,)
        assert d2[0] < d2[1] < d2[2]
        assert d2[0] < CHI2_GATE_95_4DOF < d2[2]

    def test_gate_constant_value(self):
        assert CHI2_GATE_95_4DOF == 9.4877
