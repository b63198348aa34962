"""
Unit tests for NMSE metrics and curve smoothing
"""

import numpy as np
import pytest

from src.channel.beamspace import from_beamspace
from src.common.errors import InvalidDimensionError
from src.estimation.metrics import (
    NMSE_DB_FLOOR,
    aggregate_nmse_db,
    batch_nmse,
    hanning_smooth,
    nmse,
    smoothing_window,
    to_db,
)


class TestNMSE:

    def test_perfect_estimate_hits_floor(self):
        h = np.array([[1 + 1j, 2.0]])
        assert nmse(h, h).linear == 0.0
        assert nmse(h, h).db == NMSE_DB_FLOOR

    def test_zero_estimate_is_zero_db(self, rng):
        h = rng.standard_normal((4, 16)) + 1j * rng.standard_normal((4, 16))
        assert nmse(h, np.zeros_like(h)).db == pytest.approx(0.0)

    def test_scaled_estimate(self):
        h = np.ones((2, 2), dtype=complex)
        assert nmse(h, 1.1 * h).db == pytest.approx(-20.0)

    def test_invariant_under_beamspace_transform(self, rng):
        hv = rng.standard_normal((4, 16)) + 1j * rng.standard_normal((4, 16))
        est = hv + 0.3 * rng.standard_normal((4, 16))
        assert nmse(hv, est).linear == pytest.approx(
            nmse(from_beamspace(hv), from_beamspace(est)).linear
        )

    def test_zero_truth_raises(self):
        with pytest.raises(ValueError):
            nmse(np.zeros((2, 2)), np.ones((2, 2)))

    def test_shape_mismatch_raises(self):
        with pytest.raises(InvalidDimensionError):
            nmse(np.ones((2, 2)), np.ones((2, 3)))

    def test_batch_matches_single(self, rng):
        hv = rng.standard_normal((5, 4, 16)) + 0j
        est = hv + 0.1 * rng.standard_normal((5, 4, 16))
        per = batch_nmse(hv, est)
        assert np.allclose(per, [nmse(hv[i], est[i]).linear for i in range(5)])


class TestAggregation:

    def test_to_db(self):
        assert to_db(0.1) == pytest.approx(-10.0)
        assert to_db(0.0) == NMSE_DB_FLOOR
        assert np.allclose(to_db(np.array([1.0, 0.01])), [0.0, -20.0])

    def test_linear_vs_db_mean(self):
        assert aggregate_nmse_db([0.1, 0.001]) == pytest.approx(10 * np.log10(0.0505))
        assert aggregate_nmse_db([0.1, 0.001], mode="db") == pytest.approx(-20.0)

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            aggregate_nmse_db([])

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            aggregate_nmse_db([0.1], mode="median")


class TestSmoothing:

    def test_window_normalized(self):
        w = smoothing_window()
        assert len(w) == 6
        assert w.sum() == pytest.approx(1.0)
        assert np.all(w > 0)

    def test_constant_curve_unchanged(self):
        assert np.allclose(hanning_smooth(np.full(20, -7.0)), -7.0)

    def test_length_preserved(self):
        assert hanning_smooth(np.arange(11.0)).shape == (11,)
        assert hanning_smooth([]).size == 0

    def test_reduces_noise(self, rng):
        noisy = rng.standard_normal(500)
        assert hanning_smooth(noisy).std() < noisy.std()
