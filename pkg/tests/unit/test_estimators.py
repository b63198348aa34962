"""
Unit tests for the channel estimators

Tests verify:
1. OMP recovers planted sparse vectors and honours its stopping rules
2. EM-GM-AMP handles the all-zero measurement and stays bounded
3. GCE lowers its objective and keeps the best restart
4. Conditional GCE picks the lower-objective condition
5. LOS condition thresholding, including the 0.5 tie
6. The evaluation loop produces per-sample records and aggregate tables
"""

import numpy as np
import pytest
import torch

from src.channel.beamspace import vec
from src.channel.normalization import compute_norm_stats
from src.common.errors import IncompatibleModelError, InvalidDimensionError
from src.common.seeding import make_torch_generator, seed_everything
from src.estimation.amp import AMPConfig, em_gm_amp
from src.estimation.evaluate import (
    RECORD_COLUMNS,
    CompressiveProbe,
    aggregate_report,
    evaluate_estimators,
    nmse_table,
)
from src.estimation.gce import gce, gce_batch, gce_conditional, gce_objective
from src.estimation.los import condition_from_probability, los_condition
from src.estimation.omp import omp
from src.estimation.schemas import GCEConfig
from src.measurement.schemas import PilotConfig
from src.neuralnet.networks import build_network
from src.neuralnet.specs import GeneratorSpec


def _planted(m=32, n=64, k=3, seed=0):
    rng = np.random.default_rng(seed)
    a = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2 * m)
    x = np.zeros(n, dtype=complex)
    support = rng.choice(n, size=k, replace=False)
    x[support] = 1.0 + rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return a, x, sorted(support.tolist())


@pytest.fixture
def fitted_generator(generator_spec, small_hv):
    seed_everything(0)
    g = build_network(generator_spec)
    g.normalizer.set_stats(compute_norm_stats(small_hv))
    return g.eval()


@pytest.fixture
def probe(small_arrays):
    return CompressiveProbe.draw(PilotConfig(n_s=4, n_p=8, k=1), small_arrays, seed=0)


class TestOMP:

    def test_planted_recovery(self):
        a, x, support = _planted()
        res = omp(a @ x, a, sigma=1e-6)
        assert sorted(res.extra["support"]) == support
        assert res.iterations_used == 3
        assert np.allclose(res.hv_est, x, atol=1e-8)

    def test_reshapes_to_truth(self):
        a, x, _ = _planted(n=64)
        hv_true = x.reshape(16, 4).T
        res = omp(a @ vec(hv_true), a, sigma=1e-6, hv_true=hv_true)
        assert res.hv_est.shape == (4, 16)
        assert res.nmse_db < -60

    def test_zero_measurement(self):
        a, _, _ = _planted()
        res = omp(np.zeros(32, dtype=complex), a, sigma=0.0)
        assert res.iterations_used == 0
        assert not res.hv_est.any()

    def test_iteration_cap(self):
        a, x, _ = _planted(k=10)
        res = omp(a @ x, a, sigma=0.0, max_iters=4)
        assert res.iterations_used == 4
        assert len(res.extra["support"]) == 4

    def test_residual_non_increasing(self):
        a, x, _ = _planted(k=6, seed=3)
        hist = omp(a @ x, a, sigma=1e-8).extra["residual_history"]
        assert all(b <= a_ + 1e-12 for a_, b in zip(hist, hist[1:]))

    def test_shape_mismatch(self):
        a, _, _ = _planted()
        with pytest.raises(InvalidDimensionError):
            omp(np.zeros(31), a, sigma=0.1)


class TestEMGMAMP:

    def test_zero_measurement_returns_zero(self):
        a, _, _ = _planted()
        res = em_gm_amp(np.zeros(32, dtype=complex), a)
        assert res.iterations_used == 0
        assert not res.hv_est.any()
        assert not res.diverged

    def test_sparse_recovery_beats_zero_estimate(self):
        a, x, _ = _planted(m=48, n=64, k=3, seed=1)
        rng = np.random.default_rng(2)
        y = a @ x + 1e-3 * (rng.standard_normal(48) + 1j * rng.standard_normal(48))
        res = em_gm_amp(y, a, AMPConfig(max_sweeps=100))
        assert np.all(np.isfinite(res.hv_est))
        assert 1 <= res.iterations_used <= 100
        err = np.sum(np.abs(res.hv_est - x) ** 2) / np.sum(np.abs(x) ** 2)
        assert err < 1.0
        assert 0.0 < res.extra["lambda"] < 1.0

    def test_shape_mismatch(self):
        a, _, _ = _planted()
        with pytest.raises(InvalidDimensionError):
            em_gm_amp(np.ones(10), a)


class TestGCE:

    def test_objective_decreases(self, fitted_generator, probe, small_hv):
        cfg = GCEConfig(iterations=30, restarts=2, seed=4)
        y = probe.measure(small_hv[:2], 20.0, np.random.default_rng(0))
        results = gce_batch(y, probe.a_sp, fitted_generator, cfg, hv_true=small_hv[:2])

        z0 = torch.randn((2 * 2, 8), generator=make_torch_generator(4))
        y_t = torch.as_tensor(y, dtype=torch.complex64).repeat_interleave(2, dim=0)
        a_t = torch.as_tensor(probe.a_sp.a, dtype=torch.complex64)
        with torch.no_grad():
            initial = gce_objective(z0, y_t, a_t, fitted_generator, cfg.lambda_reg).numpy()
        for i, res in enumerate(results):
            assert res.objective < initial[2 * i:2 * i + 2].min()
            assert res.objective == pytest.approx(min(res.extra["restart_objectives"]))
            assert res.z_star.shape == (8,)
            assert np.isfinite(res.nmse_db)

    def test_single_matches_batch_row(self, fitted_generator, probe, small_hv):
        cfg = GCEConfig(iterations=5, restarts=1)
        y = probe.measure(small_hv[:1], 20.0, np.random.default_rng(0))
        single = gce(y[0], probe.a_sp, fitted_generator, cfg)
        batch = gce_batch(y, probe.a_sp, fitted_generator, cfg)[0]
        assert np.allclose(single.hv_est, batch.hv_est)
        assert single.method == "GCE"

    def test_rejects_wrong_sensing_width(self, fitted_generator):
        with pytest.raises(InvalidDimensionError):
            gce(np.ones(4, dtype=complex), np.ones((4, 10), dtype=complex), fitted_generator)

    def test_unconditional_generator_rejects_chi(self, fitted_generator, probe):
        y = np.ones(probe.a_sp.shape[0], dtype=complex)
        with pytest.raises(IncompatibleModelError):
            gce(y, probe.a_sp, fitted_generator, GCEConfig(iterations=1, restarts=1), chi=1)

    def test_conditional_picks_lower_objective(self, small_hv, probe):
        seed_everything(1)
        g = build_network(GeneratorSpec(n_t=16, n_r=4, latent_dim=8, conditional=True))
        g.normalizer.set_stats(compute_norm_stats(small_hv))
        y = probe.measure(small_hv[:1], 10.0, np.random.default_rng(1))[0]
        res = gce_conditional(y, probe.a_sp, g.eval(), GCEConfig(iterations=5, restarts=1))
        obj0, obj1 = res.extra["branch_objectives"]
        assert res.chi_star == (1 if obj1 < obj0 else 0)
        assert res.objective == pytest.approx(min(obj0, obj1))
        assert res.method == "GCE-conditional"

    def test_conditional_needs_conditional_generator(self, fitted_generator, probe):
        y = np.ones(probe.a_sp.shape[0], dtype=complex)
        with pytest.raises(IncompatibleModelError):
            gce_conditional(y, probe.a_sp, fitted_generator)


class TestLOSCondition:

    def test_threshold(self):
        assert condition_from_probability(0.9) == 1
        assert condition_from_probability(0.1) == 0
        assert condition_from_probability(np.array([0.2, 0.7])).tolist() == [0, 1]

    def test_tie_maps_to_los(self):
        assert condition_from_probability(0.5) == 1
        assert condition_from_probability(torch.tensor([0.5])).tolist() == [1]

    def test_predictor_at_exact_half(self, los_spec, small_hv):
        p = build_network(los_spec)
        with torch.no_grad():
            p.head[0].weight.zero_()
            p.head[0].bias.zero_()
        assert los_condition(small_hv[0], p) == 1
        assert los_condition(small_hv[:3], p).tolist() == [1, 1, 1]

    def test_torch_input_gives_tensor(self, los_spec, small_hv):
        p = build_network(los_spec)
        out = los_condition(torch.as_tensor(small_hv[:2], dtype=torch.complex64), p)
        assert isinstance(out, torch.Tensor)
        assert set(out.tolist()) <= {0, 1}


class TestEvaluation:

    def test_records_and_tables(self, small_arrays, small_hv):
        probe = CompressiveProbe.draw(PilotConfig(n_s=4, n_p=4, k=4), small_arrays, seed=0,
                                      require_full_rank=True)
        hv = small_hv[:4]
        records = evaluate_estimators(
            hv, ["TOY"] * 2 + ["OTHER"] * 2, ["OMP", "LS"], [10.0, 30.0], probe, seed=1
        )
        assert list(records.columns) == RECORD_COLUMNS
        assert len(records) == 2 * 2 * 4
        agg = aggregate_report(records)
        assert set(agg["profile"]) == {"TOY", "OTHER", "all"}
        ls_high = agg[(agg["method"] == "LS") & (agg["snr_db"] == 30.0) & (agg["profile"] == "all")]
        ls_low = agg[(agg["method"] == "LS") & (agg["snr_db"] == 10.0) & (agg["profile"] == "all")]
        assert ls_high["nmse_db"].iloc[0] < ls_low["nmse_db"].iloc[0]
        table = nmse_table(agg)
        assert "all" in table.columns

    def test_gce_requires_generator(self, probe, small_hv):
        with pytest.raises(IncompatibleModelError):
            evaluate_estimators(small_hv[:1], ["TOY"], ["GCE"], [10.0], probe)

    def test_ls_requires_full_rank(self, probe, small_hv):
        with pytest.raises(IncompatibleModelError):
            evaluate_estimators(small_hv[:1], ["TOY"], ["LS"], [10.0], probe)

    def test_unknown_method(self, probe, small_hv):
        with pytest.raises(ValueError):
            evaluate_estimators(small_hv[:1], ["TOY"], ["MMSE"], [10.0], probe)

    def test_profile_count_checked(self, probe, small_hv):
        with pytest.raises(ValueError):
            evaluate_estimators(small_hv[:2], ["TOY"], ["OMP"], [10.0], probe)
