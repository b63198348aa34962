"""
Unit tests for pilot measurements, sensing matrices and stacked LS

Tests verify:
1. SNR conversion and quantized pilot triplets
2. Sensing-matrix Kronecker identity in both domains
3. Rank / coherence helpers and the full-rank conditions
4. Noiseless LS recovers the channel exactly; noise follows Sigma^(1/2)
5. LS dataset building and archive round trip
"""

import math

import numpy as np
import pytest

from src.channel.beamspace import from_beamspace, to_beamspace, vec
from src.common.errors import ConfigurationError, InvalidDimensionError, RankDeficiencyError
from src.measurement.dataset import (
    build_ls_dataset,
    load_ls_dataset,
    save_ls_dataset,
)
from src.measurement.least_squares import (
    LSOperator,
    draw_triplets,
    ls_estimate,
    measure_block,
    sample_ls_noise,
    stack_measurements,
)
from src.measurement.pilots import pilot_measure, quantized_phases, sample_triplet, snr_to_noise_std
from src.measurement.schemas import PilotConfig
from src.measurement.sensing import (
    beamspace_sensing_matrix,
    coherence_rank_study,
    matrix_rank,
    mutual_coherence,
    sensing_matrix,
    stack_sensing,
    to_beamspace_sensing,
)


class TestPilots:

    def test_snr_to_noise_std(self):
        assert snr_to_noise_std(0.0) == pytest.approx(1.0)
        assert snr_to_noise_std(20.0) == pytest.approx(0.1)
        assert snr_to_noise_std(float("inf")) == 0.0

    def test_quantized_phase_set(self):
        assert np.allclose(quantized_phases(2), [0, np.pi / 2, np.pi, 3 * np.pi / 2])

    def test_triplet_is_constant_modulus(self, small_arrays, rng):
        cfg = PilotConfig(n_s=2, n_p=3)
        t = sample_triplet(cfg, small_arrays, rng)
        assert t.f.shape == (16, 2) and t.s.shape == (2, 3) and t.w.shape == (4, 2)
        assert np.allclose(np.abs(t.f), 1 / 4)
        assert np.allclose(np.abs(t.w), 1 / 2)
        assert np.allclose(np.abs(t.s), 1.0)

    def test_streams_limited_by_antennas(self, small_arrays):
        with pytest.raises(ConfigurationError):
            PilotConfig(n_s=5, n_p=5).check_for(small_arrays)

    def test_full_rank_conditions(self, small_arrays):
        with pytest.raises(ConfigurationError, match="n_p == n_s"):
            PilotConfig(n_s=4, n_p=8, k=4).check_for(small_arrays, full_rank=True)
        with pytest.raises(ConfigurationError, match="k >="):
            PilotConfig(n_s=4, n_p=4, k=2).check_for(small_arrays, full_rank=True)
        PilotConfig(n_s=4, n_p=4, k=4).check_for(small_arrays, full_rank=True)

    def test_measure_shape_mismatch(self, small_arrays, rng):
        t = sample_triplet(PilotConfig(n_s=2, n_p=2), small_arrays, rng)
        with pytest.raises(InvalidDimensionError):
            pilot_measure(np.zeros((16, 4)), t, 0.0, rng)


class TestSensing:

    def test_spatial_kronecker_identity(self, small_arrays, rng):
        t = sample_triplet(PilotConfig(n_s=3, n_p=5), small_arrays, rng)
        h = rng.standard_normal((4, 16)) + 1j * rng.standard_normal((4, 16))
        y = pilot_measure(h, t, 0.0, rng)
        assert np.allclose(vec(y), sensing_matrix(t) @ vec(h))

    def test_beamspace_kronecker_identity(self, small_arrays, rng):
        t = sample_triplet(PilotConfig(n_s=3, n_p=5), small_arrays, rng)
        hv = rng.standard_normal((4, 16)) + 1j * rng.standard_normal((4, 16))
        y = pilot_measure(from_beamspace(hv), t, 0.0, rng)
        a_sp = beamspace_sensing_matrix(t, small_arrays)
        assert np.allclose(vec(y), a_sp @ vec(hv))
        assert np.allclose(to_beamspace_sensing(sensing_matrix(t), small_arrays).a, a_sp.a)

    def test_matrix_rank(self):
        assert matrix_rank(np.eye(3)) == 3
        assert matrix_rank(np.zeros((2, 2))) == 0
        assert matrix_rank(np.outer([1, 2], [3, 4])) == 1

    def test_mutual_coherence(self):
        assert mutual_coherence(np.eye(4)) == 0.0
        assert mutual_coherence(np.array([[1.0, 1.0], [0.0, 0.0]])) == 1.0
        with pytest.raises(InvalidDimensionError):
            mutual_coherence(np.ones((3, 1)))

    def test_single_transmission_rank_bound(self, small_arrays, rng):
        cfg = PilotConfig(n_s=2, n_p=4)
        a = sensing_matrix(sample_triplet(cfg, small_arrays, rng))
        assert a.rank <= cfg.n_s ** 2

    def test_rank_cached(self, small_arrays, rng):
        a = sensing_matrix(sample_triplet(PilotConfig(n_s=2, n_p=2), small_arrays, rng))
        assert a.cached_rank is None
        _ = a.rank
        assert a.cached_rank == a.rank

    def test_mixed_domains_cannot_stack(self, small_arrays, rng):
        t = sample_triplet(PilotConfig(n_s=2, n_p=2), small_arrays, rng)
        with pytest.raises(ValueError):
            stack_sensing([sensing_matrix(t), beamspace_sensing_matrix(t, small_arrays)])

    def test_coherence_study_columns(self, small_arrays):
        study = coherence_rank_study([1, 2], [4], draws=3, arrays=small_arrays, seed=0)
        assert len(study) == 6
        assert set(study.columns) >= {"n_s", "n_p", "coherence", "rank", "rank_bound"}
        assert (study["rank"] <= study["rank_bound"]).all()
        assert study["coherence"].between(0.0, 1.0).all()


class TestStackedLS:

    def test_full_rank_draw(self, small_arrays, full_rank_pilot, rng):
        triplets, sensing = draw_triplets(full_rank_pilot, small_arrays, rng)
        assert len(triplets) == 4
        assert sensing.rank == small_arrays.n_elements

    def test_impossible_full_rank_rejected(self, small_arrays, rng):
        with pytest.raises(ConfigurationError):
            draw_triplets(PilotConfig(n_s=2, n_p=2, k=8), small_arrays, rng)

    def test_noiseless_ls_is_exact(self, small_arrays, rng):
        cfg = PilotConfig(n_s=4, n_p=4, k=4, snr_db=float("inf"))
        h = rng.standard_normal((4, 16)) + 1j * rng.standard_normal((4, 16))
        meas = stack_measurements(h, cfg, rng)
        est = ls_estimate(meas.y, meas.sensing, meas.triplets, small_arrays)
        assert np.allclose(est.hv_ls, to_beamspace(h))

    def test_rank_deficient_ls_raises(self, small_arrays, rng):
        cfg = PilotConfig(n_s=2, n_p=2, k=1)
        triplets, sensing = draw_triplets(cfg, small_arrays, rng, require_full_rank=False)
        with pytest.raises(RankDeficiencyError):
            LSOperator(sensing=sensing, triplets=list(triplets), arrays=small_arrays)

    def test_error_equals_shaped_noise(self, small_arrays, full_rank_pilot):
        """hv_ls - hv = sigma * Sigma^(1/2) g for the g that produced the noise."""
        rng = np.random.default_rng(11)
        triplets, sensing = draw_triplets(full_rank_pilot, small_arrays, rng)
        op = LSOperator(sensing=sensing, triplets=list(triplets), arrays=small_arrays)
        hv = np.zeros((4, 16), dtype=complex)
        sigma = 0.1
        noise_rng = np.random.default_rng(5)
        y = measure_block(from_beamspace(hv), triplets, sensing, sigma, noise_rng)
        g_rng = np.random.default_rng(5)
        g = (g_rng.standard_normal(op.sigma_half.shape[1])
             + 1j * g_rng.standard_normal(op.sigma_half.shape[1])) / np.sqrt(2)
        assert np.allclose(vec(op.apply(y)), sigma * op.sigma_half @ g)

    def test_ls_noise_zero_sigma(self):
        sh = np.ones((6, 3), dtype=complex)
        z = sample_ls_noise(sh, 0.0, np.random.default_rng(0), size=4)
        assert z.shape == (4, 6)
        assert not z.any()

    def test_ls_noise_covariance(self):
        rng = np.random.default_rng(0)
        sh = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
        z = sample_ls_noise(sh, 0.5, rng, size=200_000)
        cov = z.T @ z.conj() / len(z)
        expected = 0.25 * sh @ sh.conj().T
        assert np.allclose(cov, expected, atol=0.05 * np.abs(expected).max())


class TestLSDataset:

    def test_build_shapes(self, small_ls, small_hv):
        assert small_ls.hv_ls.shape == small_hv.shape
        assert small_ls.sigma_half.shape == (64, 4 * 4 * 4)
        assert small_ls.noise_std == pytest.approx(0.1)
        assert small_ls.full_rank

    def test_ls_error_level(self, small_ls, small_hv):
        err = np.mean(np.abs(small_ls.hv_ls - small_hv) ** 2)
        expected = small_ls.noise_std ** 2 * np.mean(np.sum(np.abs(small_ls.sigma_half) ** 2, 1))
        assert err == pytest.approx(expected, rel=0.3)

    def test_per_sample_triplets(self, small_hv, small_arrays, full_rank_pilot):
        ds = build_ls_dataset(
            small_hv[:3], np.zeros(3), full_rank_pilot, small_arrays, seed=1, redraw_per_sample=True
        )
        assert ds.per_sample_sigma
        assert ds.sigma_half.shape[0] == 3
        assert len(set(ds.triplet_seed.tolist())) == 3
        assert len(ds.subset(np.array([0, 2]))) == 2

    def test_archive_round_trip(self, small_ls, tmp_path):
        small_ls.metadata = {"profile_names": ["TOY"], "profile_index": [0] * len(small_ls)}
        back = load_ls_dataset(save_ls_dataset(small_ls, tmp_path / "ls.nc"))
        assert back.pilot == small_ls.pilot
        assert back.arrays == small_ls.arrays
        assert np.allclose(back.hv_ls, small_ls.hv_ls, atol=1e-5)
        assert np.allclose(back.sigma_half, small_ls.sigma_half, atol=1e-5)
        assert back.metadata["profile_names"] == ["TOY"]

    def test_infinite_snr_survives_archive(self, noiseless_ls, tmp_path):
        back = load_ls_dataset(save_ls_dataset(noiseless_ls, tmp_path / "clean.nc"))
        assert math.isinf(back.snr_db)
        assert back.noise_std == 0.0
