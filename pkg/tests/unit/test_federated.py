"""
Unit tests for federated Pilot GAN

Tests verify:
1. Link budget noise floor and per-UE SNR
2. Critic weight averaging
3. FedConfig layout validation
4. A single UE reproduces centralized Pilot GAN bit for bit
5. Communication accounting and per-round records
"""

import json

import numpy as np
import pytest
import torch

from src.common.errors import ConfigurationError, InvalidDimensionError
from src.federated.averaging import average_critic_weights, critic_parameters, load_parameters
from src.federated.fed_pilot_gan import FedConfig, UEDataSource, run_federated_training
from src.federated.link_budget import LinkBudget, link_snr
from src.measurement.schemas import PilotConfig
from src.neuralnet.networks import build_network, count_parameters
from src.training.trainer import train_pilot_gan


class TestLinkBudget:

    def test_noise_floor(self):
        assert LinkBudget().noise_floor_dbm == pytest.approx(-91.99, abs=0.01)

    def test_reference_snrs(self):
        link = LinkBudget()
        assert link_snr(link, 10.0) == pytest.approx(33.25, abs=0.01)
        assert link_snr(link, 50.0) == pytest.approx(21.16, abs=0.01)

    def test_snr_falls_with_distance(self):
        snrs = LinkBudget().ue_snrs()
        assert len(snrs) == 4
        assert all(a > b for a, b in zip(snrs, snrs[1:]))

    def test_distance_must_be_positive(self):
        with pytest.raises(ValueError):
            link_snr(LinkBudget(), 0.0)
        with pytest.raises(ValueError):
            LinkBudget(ue_distances_m=[10.0, -1.0])


class TestAveraging:

    def test_identical_updates(self):
        theta = {"w": torch.randn(3, 2), "b": torch.randn(2)}
        avg = average_critic_weights([theta, theta, theta])
        assert all(torch.allclose(avg[k], theta[k]) for k in theta)

    def test_opposite_updates_cancel(self):
        theta = {"w": torch.randn(4)}
        avg = average_critic_weights([theta, {"w": -theta["w"]}])
        assert torch.allclose(avg["w"], torch.zeros(4))

    def test_matches_sum_over_u(self):
        updates = [{"w": torch.randn(5)} for _ in range(4)]
        avg = average_critic_weights(updates)
        assert torch.allclose(avg["w"], sum(u["w"] for u in updates) / 4)

    def test_single_update_is_exact(self):
        theta = {"w": torch.randn(7)}
        assert torch.equal(average_critic_weights([theta])["w"], theta["w"])

    def test_empty_raises(self):
        with pytest.raises(ValueError):
            average_critic_weights([])

    def test_mismatch_raises(self):
        with pytest.raises(InvalidDimensionError):
            average_critic_weights([{"w": torch.zeros(2)}, {"w": torch.zeros(3)}])
        with pytest.raises(InvalidDimensionError):
            average_critic_weights([{"w": torch.zeros(2)}, {"v": torch.zeros(2)}])

    def test_load_parameters(self, critic_spec):
        a, b = build_network(critic_spec), build_network(critic_spec)
        load_parameters(b, critic_parameters(a))
        assert all(torch.equal(p, q) for p, q in zip(a.parameters(), b.parameters()))


class TestFedConfig:

    def test_defaults_are_consistent(self):
        cfg = FedConfig()
        assert cfg.u == 4 and cfg.m % cfg.u == 0
        assert cfg.profile_for(3) == "A"

    def test_batch_must_split(self):
        with pytest.raises(ValueError):
            FedConfig(u=3, m=200, link=LinkBudget(ue_distances_m=[10.0, 20.0, 30.0]))

    def test_distance_count(self):
        with pytest.raises(ValueError):
            FedConfig(u=2, m=8, link=LinkBudget(ue_distances_m=[10.0]))

    def test_profile_count(self):
        link = LinkBudget(ue_distances_m=[10.0, 20.0])
        with pytest.raises(ValueError):
            FedConfig(u=2, m=8, link=link, ue_profiles=["A", "B", "C"])
        assert FedConfig(u=2, m=8, link=link, ue_profiles=["A", "B"]).profile_for(1) == "B"

    def test_effective_train_config(self, tiny_train_config):
        fed = FedConfig(u=1, m=16, n_d=3, rounds=4, l=5, link=LinkBudget(ue_distances_m=[10.0]))
        cfg = fed.effective_train_config(tiny_train_config)
        assert (cfg.n_d, cfg.m, cfg.total_iterations) == (3, 16, 20)
        assert cfg.seed == tiny_train_config.seed


@pytest.fixture
def single_ue():
    return FedConfig(u=1, m=8, n_d=2, rounds=3, l=1, link=LinkBudget(ue_distances_m=[10.0]))


class TestFederatedTraining:

    def test_single_ue_matches_pilot_gan(self, single_ue, small_ls, tiny_specs,
                                         tiny_train_config):
        fed = run_federated_training(single_ue, tiny_train_config, tiny_specs,
                                     ue_datasets=[small_ls])
        central = train_pilot_gan(small_ls, tiny_train_config, tiny_specs)
        fed_state, central_state = fed.generator.state_dict(), central.generator.state_dict()
        assert fed_state.keys() == central_state.keys()
        assert all(torch.equal(fed_state[k], central_state[k]) for k in fed_state)
        assert all(
            torch.equal(p, q) for p, q in zip(fed.critic.parameters(), central.critic.parameters())
        )

    def test_communication_counts(self, small_ls, tiny_specs, tiny_train_config):
        fed_cfg = FedConfig(u=2, m=8, n_d=1, rounds=2, l=3,
                            link=LinkBudget(ue_distances_m=[10.0, 50.0]))
        result = run_federated_training(fed_cfg, tiny_train_config, tiny_specs,
                                        ue_datasets=[small_ls, small_ls])
        n_critic = count_parameters(result.critic)
        n_gen = count_parameters(result.generator)
        iterations = 2 * 3
        assert result.iterations_completed == iterations
        assert result.uplink_params == iterations * 2 * n_critic
        assert result.downlink_params == iterations * 2 * (n_critic + n_gen)
        assert result.uplink_bytes == 4 * result.uplink_params
        assert [r["iter"] for r in result.rounds] == [3, 6]
        assert [rec.iteration for rec in result.trail] == [0, 3, 6]

    def test_fixed_datasets_set_ue_snr(self, single_ue, small_ls, tiny_specs, tiny_train_config):
        result = run_federated_training(single_ue, tiny_train_config, tiny_specs,
                                        ue_datasets=[small_ls])
        assert result.ue_snr_db == [20.0]

    def test_round_log(self, single_ue, small_ls, tiny_specs, tiny_train_config, tmp_path):
        run_federated_training(single_ue, tiny_train_config, tiny_specs,
                               ue_datasets=[small_ls], out_dir=tmp_path)
        rows = [json.loads(x) for x in (tmp_path / "fed_rounds.jsonl").read_text().splitlines()]
        assert [r["round"] for r in rows] == [1, 2, 3]
        assert (tmp_path / "checkpoints" / "iter_000003.pt").exists()

    def test_rejects_conditional_specs(self, single_ue, small_ls, tiny_conditional_specs,
                                       tiny_train_config):
        with pytest.raises(ConfigurationError):
            run_federated_training(single_ue, tiny_train_config, tiny_conditional_specs,
                                   ue_datasets=[small_ls])

    def test_rejects_rank_deficient_ue_data(self, single_ue, small_ls, tiny_specs,
                                            tiny_train_config):
        small_ls.full_rank = False
        with pytest.raises(ConfigurationError):
            run_federated_training(single_ue, tiny_train_config, tiny_specs,
                                   ue_datasets=[small_ls])

    def test_dataset_count_checked(self, single_ue, small_ls, tiny_specs, tiny_train_config):
        with pytest.raises(ConfigurationError):
            run_federated_training(single_ue, tiny_train_config, tiny_specs,
                                   ue_datasets=[small_ls, small_ls])


class TestUEDataSource:

    @pytest.fixture
    def two_ues(self):
        return FedConfig(
            u=2, m=8, d_local=6, link=LinkBudget(ue_distances_m=[10.0, 50.0]),
            pilot=PilotConfig(n_s=4, n_p=4, k=4),
        )

    def test_link_snr_per_ue(self, two_ues, tiny_specs):
        datasets = UEDataSource(two_ues, tiny_specs, seed=0).datasets(1)
        assert len(datasets) == 2
        assert datasets[0].snr_db == pytest.approx(33.25, abs=0.01)
        assert datasets[1].snr_db == pytest.approx(21.16, abs=0.01)
        assert all(ds.full_rank and len(ds) == 6 for ds in datasets)

    def test_fresh_data_each_round(self, two_ues, tiny_specs):
        source = UEDataSource(two_ues, tiny_specs, seed=0)
        first, second = source.datasets(1)[0], source.datasets(2)[0]
        assert not np.allclose(first.hv_ls, second.hv_ls)

    def test_fixed_data_reused(self, two_ues, tiny_specs):
        cfg = two_ues.model_copy(update={"fixed_datasets": True})
        source = UEDataSource(cfg, tiny_specs, seed=0)
        assert source.datasets(1) is source.datasets(5)

    def test_clean_channels(self, two_ues, tiny_specs):
        cfg = two_ues.model_copy(update={"use_clean_channels": True})
        ds = UEDataSource(cfg, tiny_specs, seed=0).datasets(1)[0]
        assert ds.noise_std == 0.0
        assert ds.metadata["clean"]

    def test_clean_federated_run(self, two_ues, tiny_specs, tiny_train_config):
        cfg = two_ues.model_copy(update={"use_clean_channels": True, "rounds": 2, "l": 1,
                                         "n_d": 1})
        result = run_federated_training(cfg, tiny_train_config, tiny_specs)
        assert len(result.rounds) == 2
        assert all(np.isfinite(r["loss_g"]) for r in result.rounds)
