import numpy as np
import pytest

from jumpest import model as mdl
from jumpest.estimator import detect_jumps, estimation_error, threshold
from jumpest.simulate import simulate_replicate


def brute_force_detect(increments, u_n):
    return [i for i, inc in enumerate(increments) if abs(inc) >= u_n]


class TestThreshold:
    def test_n_one(self):
        assert threshold(1, 0.3, 1.0) == 1.0

    def test_examples(self):
        assert threshold(10_000, 0.3, 1.0) == pytest.approx(0.063095734448019331, rel=1e-12)
        assert threshold(100, 0.25, 2.0) == pytest.approx(0.63245553203367588, rel=1e-12)

    @pytest.mark.parametrize("varpi", [0.0, 0.5, 0.7, -0.1])
    def test_varpi_outside_open_interval_rejected(self, varpi):
        with pytest.raises(ValueError, match="0, 1/2"):
            threshold(100, varpi, 1.0)

    def test_bad_n_and_alpha(self):
        with pytest.raises(ValueError):
            threshold(0, 0.3, 1.0)
        with pytest.raises(ValueError):
            threshold(100, 0.3, 0.0)


class TestDetect:
    def test_single_detection(self):
        obs = np.cumsum([0.0, 0.01, 0.5, -0.02])
        det = detect_jumps(obs, 0.1)
        assert det.detected_indices.tolist() == [1]
        assert det.k_hat == 1
        assert det.j_hat.tolist() == [0.5]

    def test_no_detection(self):
        obs = np.cumsum([0.0, 0.01, 0.02, -0.02])
        det = detect_jumps(obs, 0.1)
        assert det.k_hat == 0 and det.j_hat.size == 0

    def test_multiple_detections(self):
        obs = np.cumsum([0.0, 0.3, 0.05, -0.4, 0.05, 0.35])
        det = detect_jumps(obs, 0.2)
        assert det.detected_indices.tolist() == [0, 2, 4]
        assert det.k_hat == 3
        assert np.allclose(det.j_hat, [0.3, -0.4, 0.35], atol=1e-12)

    def test_brute_force_equivalence(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            n = int(rng.integers(1, 51))
            inc = rng.normal(scale=rng.uniform(0.05, 1.0), size=n)
            u_n = rng.uniform(0.01, 1.0)
            obs = np.concatenate([[0.0], np.cumsum(inc)])
            det = detect_jumps(obs, u_n)
            assert det.detected_indices.tolist() == brute_force_detect(np.diff(obs), u_n)
            assert np.array_equal(det.j_hat, np.diff(obs)[det.detected_indices])

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(18)
        obs = np.concatenate([[0.0], np.cumsum(rng.normal(size=200))])
        ks = [detect_jumps(obs, u).k_hat for u in np.linspace(0.01, 3.0, 50)]
        assert all(a >= b for a, b in zip(ks, ks[1:]))

    def test_scale_equivariance_power_of_two(self):
        rng = np.random.default_rng(19)
        obs = np.concatenate([[0.0], np.cumsum(rng.normal(size=100))])
        base = detect_jumps(obs, 0.7)
        scaled = detect_jumps(4.0 * obs, 4.0 * 0.7)
        assert np.array_equal(base.detected_indices, scaled.detected_indices)
        assert np.array_equal(scaled.j_hat, 4.0 * base.j_hat)

    def test_scale_equivariance_generic_constant(self):
        rng = np.random.default_rng(20)
        obs = np.concatenate([[0.0], np.cumsum(rng.normal(size=100))])
        c = 3.7
        scaled = detect_jumps(c * obs, c * 0.7)
        assert scaled.detected_indices.tolist() == brute_force_detect(np.diff(c * obs), c * 0.7)

    def test_nonpositive_threshold_rejected(self):
        with pytest.raises(ValueError):
            detect_jumps(np.zeros(3), 0.0)


def _truth(n, jumps, cells):
    """Minimal PathRecord stand-in with the fields estimation_error reads."""
    class T:
        pass

    t = T()
    t.jumps = np.asarray(jumps, dtype=float)
    t.grid_index = np.asarray(cells, dtype=np.int64)
    return t


class TestEstimationError:
    def test_empty_is_aligned(self):
        det = detect_jumps(np.zeros(11), 0.5)
        err = estimation_error(det, _truth(10, [], []))
        assert err.aligned and err.scaled_errors.size == 0

    def test_perfect_detection_scaled_error(self):
        n = 100
        obs = np.zeros(n + 1)
        obs[31:] = 0.51  # true jump 0.5 estimated as the cell increment 0.51
        det = detect_jumps(obs, 0.2)
        truth = _truth(n, [0.5], [30])
        err = estimation_error(det, truth)
        assert err.aligned
        assert err.scaled_errors[0] == pytest.approx(0.1, abs=1e-12)

    def test_overdetection_zero_padding(self):
        n = 100
        obs = np.zeros(n + 1)
        obs[31:] = 0.5
        obs[61:] = 0.9
        det = detect_jumps(obs, 0.2)
        truth = _truth(n, [0.5], [30])
        err = estimation_error(det, truth)
        assert not err.aligned
        assert err.k_hat == 2 and err.k_true == 1
        assert err.scaled_errors.size == 2
        assert err.scaled_errors[1] == pytest.approx(np.sqrt(n) * 0.4, abs=1e-12)

    def test_right_cells_wrong_index_not_aligned(self):
        n = 50
        obs = np.zeros(n + 1)
        obs[11:] = 0.5
        det = detect_jumps(obs, 0.2)
        err = estimation_error(det, _truth(n, [0.5], [12]))
        assert not err.aligned

    def test_end_to_end_on_simulated_path(self):
        m = mdl.compound_poisson_model()
        p = simulate_replicate(m, 2000, 1, 23, 5)
        det = detect_jumps(p.obs, threshold(2000, 0.3, 1.0))
        err = estimation_error(det, p)
        if err.aligned:
            assert err.scaled_errors.size == p.k
