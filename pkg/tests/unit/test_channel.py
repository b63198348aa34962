"""
Unit tests for the channel package

Tests verify:
1. DFT codebooks are unitary and the beamspace transform is invertible
2. Normalization SN / SN^-1 round trip and sigma flooring
3. Profile loading and LOS validation
4. Dataset generation, subsetting and archive round trip
5. Seeded subsets are spread over every profile
"""

import numpy as np
import pytest

from src.channel.beamspace import dft_codebook, from_beamspace, to_beamspace, unvec, vec
from src.channel.dataset import (
    generate_channel_dataset,
    load_channel_dataset,
    save_channel_dataset,
    stratified_indices,
)
from src.channel.normalization import compute_norm_stats, stack_normalize, unstack_unnormalize
from src.channel.schemas import ArrayConfig, ChannelProfile, NormStats
from src.channel.simulator import (
    energy_concentration,
    get_profile,
    load_channel_profiles,
    profile_statistics,
    sample_channel,
    sample_spatial_channels,
)
from src.common.errors import DatasetError, InvalidDimensionError
from src.measurement.dataset import save_ls_dataset


class TestBeamspace:
    """DFT codebooks and the spatial <-> beamspace change of basis."""

    @pytest.mark.parametrize("n", [1, 2, 4, 16, 64])
    def test_codebook_is_unitary(self, n):
        u = dft_codebook(n)
        assert np.allclose(u.conj().T @ u, np.eye(n))
        assert np.allclose(np.abs(u), 1.0 / np.sqrt(n))

    def test_codebook_is_read_only(self):
        with pytest.raises(ValueError):
            dft_codebook(4)[0, 0] = 0.0

    @pytest.mark.parametrize("n", [0, -3])
    def test_codebook_rejects_bad_size(self, n):
        with pytest.raises(InvalidDimensionError):
            dft_codebook(n)

    def test_round_trip(self, small_arrays, rng):
        h = rng.standard_normal((5, 4, 16)) + 1j * rng.standard_normal((5, 4, 16))
        assert np.allclose(from_beamspace(to_beamspace(h, small_arrays), small_arrays), h)

    def test_energy_preserved(self, rng):
        h = rng.standard_normal((4, 16)) + 1j * rng.standard_normal((4, 16))
        assert np.isclose(np.linalg.norm(to_beamspace(h)), np.linalg.norm(h))

    def test_shape_mismatch_raises(self, small_arrays):
        with pytest.raises(InvalidDimensionError):
            to_beamspace(np.zeros((16, 4)), small_arrays)

    def test_vec_is_column_major(self):
        m = np.array([[1, 2, 3], [4, 5, 6]])
        assert vec(m).tolist() == [1, 4, 2, 5, 3, 6]
        assert np.array_equal(unvec(vec(m), 2, 3), m)


class TestNormalization:
    """Element-wise SN / SN^-1."""

    def test_round_trip(self, small_hv):
        stats = compute_norm_stats(small_hv)
        x = stack_normalize(small_hv, stats)
        assert x.shape == (len(small_hv), 2, 16, 4)
        assert np.allclose(unstack_unnormalize(x, stats), small_hv)

    def test_normalized_data_is_standardized(self, small_hv):
        x = stack_normalize(small_hv, compute_norm_stats(small_hv))
        assert np.allclose(x.mean(axis=0), 0.0, atol=1e-10)
        assert np.allclose(x.std(axis=0), 1.0, atol=1e-8)

    def test_constant_entry_is_floored(self):
        data = np.zeros((10, 2, 4), dtype=complex)
        data[:, 0, 0] = np.arange(10)
        stats = compute_norm_stats(data)
        assert stats.sigma_re.min() == pytest.approx(1e-6)
        assert stats.sigma_im.min() == pytest.approx(1e-6)

    def test_empty_dataset_raises(self):
        with pytest.raises(ValueError):
            compute_norm_stats(np.zeros((0, 4, 16), dtype=complex))

    def test_identity_stats_stack_only(self, rng):
        hv = rng.standard_normal((4, 16)) + 1j * rng.standard_normal((4, 16))
        x = stack_normalize(hv, NormStats.identity(16, 4))
        assert np.allclose(x[0], hv.real.T)
        assert np.allclose(x[1], hv.imag.T)

    def test_shape_mismatch_raises(self, small_hv):
        stats = compute_norm_stats(small_hv)
        with pytest.raises(InvalidDimensionError):
            stack_normalize(np.zeros((16, 4), dtype=complex), stats)

    def test_stats_dict_round_trip(self, small_hv):
        stats = compute_norm_stats(small_hv)
        back = NormStats.from_dict(stats.to_dict())
        assert np.allclose(back.mu, stats.mu)
        assert np.allclose(back.sigma_re, stats.sigma_re)


class TestProfiles:
    """Config-driven cluster profiles."""

    def test_shipped_profiles(self):
        profiles = load_channel_profiles()
        for name in ("A", "B", "C", "D", "E", "LOS1", "NLOS8"):
            assert name in profiles
        assert [profiles[n].los for n in "ABCDE"] == [False, False, False, True, True]

    def test_los_k_factors_match_fallback(self, tmp_path, monkeypatch):
        shipped = load_channel_profiles()
        monkeypatch.setattr("src.channel.simulator.DEFAULT_PROFILES_PATH", tmp_path / "missing.yaml")
        fallback = load_channel_profiles()
        for name in ("D", "E"):
            assert shipped[name].rician_k_db == fallback[name].rician_k_db
        assert (shipped["D"].rician_k_db, shipped["E"].rician_k_db) == (22.0, 13.0)

    def test_unknown_profile_lists_available(self):
        with pytest.raises(ValueError, match="Available"):
            get_profile("Z")

    def test_analog_los_flag_enforced(self):
        with pytest.raises(ValueError):
            ChannelProfile(name="D", n_clusters=1, rays_per_cluster=1, los=False,
                           angle_spread_deg=0.0)

    def test_spacing_must_be_half_wavelength(self):
        with pytest.raises(ValueError):
            ArrayConfig(n_t=8, n_r=4, spacing_wavelengths=1.0)

    def test_missing_profile_file_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_channel_profiles(tmp_path / "nope.yaml")


class TestSimulator:
    """Channel draws."""

    def test_unit_average_power(self, toy_profile, small_arrays):
        h = sample_spatial_channels(toy_profile, small_arrays, 2000, np.random.default_rng(0))
        assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, rel=0.1)

    def test_same_seed_same_channels(self, toy_profile, small_arrays):
        a = sample_spatial_channels(toy_profile, small_arrays, 8, np.random.default_rng(3))
        b = sample_spatial_channels(toy_profile, small_arrays, 8, np.random.default_rng(3))
        assert np.array_equal(a, b)

    def test_realization_label(self, toy_los_profile, small_arrays):
        real = sample_channel(toy_los_profile, small_arrays, np.random.default_rng(0))
        assert real.los_label == 1
        assert np.allclose(real.h_beamspace, to_beamspace(real.h_spatial))

    def test_los_profile_more_concentrated_than_nlos_rich(self, small_arrays):
        stats = profile_statistics(
            [get_profile("B"), get_profile("D")], small_arrays, n_draws=200, seed=0
        )
        assert stats["D"]["energy_concentration"] > stats["B"]["energy_concentration"]

    def test_energy_concentration_single_entry(self):
        hv = np.zeros((4, 16), dtype=complex)
        hv[1, 3] = 2.0
        assert energy_concentration(hv) == pytest.approx(1.0)


class TestChannelDataset:
    """Balanced datasets and archives."""

    def test_generate_balanced(self, small_arrays):
        profiles = [get_profile("LOS1"), get_profile("NLOS8")]
        ds = generate_channel_dataset(profiles, small_arrays, 10, seed=1)
        assert len(ds) == 20
        assert ds.h_beamspace.shape == (20, 4, 16)
        assert ds.los_label.tolist() == [1] * 10 + [0] * 10
        assert len(ds.for_profile("NLOS8")) == 10

    def test_adding_profile_keeps_existing_draws(self, small_arrays):
        one = generate_channel_dataset([get_profile("LOS1")], small_arrays, 5, seed=2)
        two = generate_channel_dataset(
            [get_profile("LOS1"), get_profile("NLOS8")], small_arrays, 5, seed=2
        )
        assert np.array_equal(one.h_spatial, two.for_profile("LOS1").h_spatial)

    def test_empty_profile_list_raises(self, small_arrays):
        with pytest.raises(ValueError):
            generate_channel_dataset([], small_arrays, 5, seed=0)

    def test_archive_round_trip(self, small_arrays, tmp_path):
        ds = generate_channel_dataset([get_profile("NLOS8")], small_arrays, 6, seed=4)
        path = save_channel_dataset(ds, tmp_path / "train.nc")
        back = load_channel_dataset(path)
        assert back.profile_names == ["NLOS8"]
        assert back.arrays == small_arrays
        assert back.seed == 4
        assert np.allclose(back.h_beamspace, ds.h_beamspace, atol=1e-5)
        assert np.array_equal(back.los_label, ds.los_label)

    def test_missing_archive_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_channel_dataset(tmp_path / "missing.nc")

    def test_wrong_kind_raises(self, small_ls, tmp_path):
        path = save_ls_dataset(small_ls, tmp_path / "ls.nc")
        with pytest.raises(DatasetError):
            load_channel_dataset(path)


class TestStratifiedSubset:
    """Profile-balanced subsets of profile-ordered datasets."""

    @pytest.fixture
    def ordered_index(self):
        # Five profiles, 50 samples each, stacked in order as generate_channel_dataset does
        return np.repeat(np.arange(5), 50)

    def test_every_profile_gets_its_share(self, ordered_index):
        idx = stratified_indices(ordered_index, 50, seed=0)
        assert len(idx) == 50
        assert len(np.unique(idx)) == 50
        assert np.all(np.diff(idx) > 0)
        assert np.bincount(ordered_index[idx], minlength=5).tolist() == [10] * 5

    def test_uneven_split_differs_by_one(self, ordered_index):
        counts = np.bincount(ordered_index[stratified_indices(ordered_index, 7, seed=3)],
                             minlength=5)
        assert counts.sum() == 7
        assert set(counts.tolist()) <= {1, 2}

    def test_request_beyond_size_keeps_all(self):
        index = np.array([0, 0, 1])
        assert stratified_indices(index, 10, seed=0).tolist() == [0, 1, 2]

    def test_seeded(self, ordered_index):
        a = stratified_indices(ordered_index, 20, seed=5)
        assert np.array_equal(a, stratified_indices(ordered_index, 20, seed=5))
        assert not np.array_equal(a, stratified_indices(ordered_index, 20, seed=6))

    def test_invalid_size(self, ordered_index):
        with pytest.raises(ValueError):
            stratified_indices(ordered_index, 0, seed=0)

    def test_balanced_dataset_subset(self, small_arrays):
        ds = generate_channel_dataset(
            [get_profile("LOS1"), get_profile("NLOS8")], small_arrays, 10, seed=1
        )
        sub = ds.balanced_subset(6, seed=2)
        assert len(sub) == 6
        assert sub.los_label.sum() == 3
        assert sub.profile_names == ds.profile_names
