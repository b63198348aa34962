"""
Shared fixtures: small arrays, tiny networks and seeded data.

Everything here runs at 16 x 4 antennas so that unit tests stay in the
sub-second range; the reference 64 x 16 geometry is only used where a test
checks exact layer sizes.
"""

import numpy as np
import pytest
import torch

from src.channel.beamspace import to_beamspace
from src.channel.schemas import ArrayConfig, ChannelProfile
from src.channel.simulator import sample_spatial_channels
from src.measurement.dataset import LSDataset, build_ls_dataset
from src.measurement.schemas import PilotConfig
from src.neuralnet.specs import CriticSpec, GeneratorSpec, LOSPredictorSpec
from src.training.config import TrainConfig
from src.training.trainer import NetworkSpecs


@pytest.fixture
def small_arrays():
    """16 transmit x 4 receive antennas."""
    return ArrayConfig(n_t=16, n_r=4)


@pytest.fixture
def paper_arrays():
    """Reference 64 x 16 geometry."""
    return ArrayConfig(n_t=64, n_r=16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def toy_profile():
    """Few-cluster NLOS profile for quick draws."""
    return ChannelProfile(
        name="TOY",
        n_clusters=3,
        rays_per_cluster=4,
        los=False,
        angle_spread_deg=2.0,
        per_cluster_power_decay_db=1.0,
    )


@pytest.fixture
def toy_los_profile():
    return ChannelProfile(
        name="TOYLOS",
        n_clusters=2,
        rays_per_cluster=2,
        los=True,
        rician_k_db=15.0,
        angle_spread_deg=1.0,
        per_cluster_power_decay_db=1.0,
    )


@pytest.fixture
def small_hv(small_arrays, toy_profile):
    """64 beamspace channels (64, 4, 16)."""
    h = sample_spatial_channels(toy_profile, small_arrays, 64, np.random.default_rng(7))
    return to_beamspace(h)


@pytest.fixture
def full_rank_pilot():
    """n_s = n_p = 4, k = 4: k * n_s^2 = 64 = n_t * n_r at 16 x 4."""
    return PilotConfig(n_s=4, n_p=4, k=4, snr_db=20.0)


@pytest.fixture
def small_ls(small_hv, small_arrays, full_rank_pilot):
    """Full-rank LS dataset at 20 dB over `small_hv`."""
    labels = np.zeros(len(small_hv), dtype=np.int8)
    return build_ls_dataset(small_hv, labels, full_rank_pilot, small_arrays, seed=3)


@pytest.fixture
def noiseless_ls(small_hv, small_arrays, full_rank_pilot):
    """LS dataset with infinite SNR: hv_ls is the clean channel, Sigma^(1/2) = 0."""
    n_el = small_arrays.n_elements
    return LSDataset(
        hv_ls=small_hv.copy(),
        sigma_half=np.zeros((n_el, n_el), dtype=complex),
        los_label=np.zeros(len(small_hv), dtype=np.int8),
        triplet_seed=np.zeros(len(small_hv), dtype=np.int64),
        pilot=full_rank_pilot.model_copy(update={"snr_db": float("inf")}),
        arrays=small_arrays,
    )


@pytest.fixture
def tiny_specs(small_arrays):
    return NetworkSpecs.for_arrays(small_arrays, latent_dim=8)


@pytest.fixture
def tiny_conditional_specs(small_arrays):
    return NetworkSpecs.for_arrays(small_arrays, latent_dim=8, conditional=True)


@pytest.fixture
def generator_spec():
    return GeneratorSpec(n_t=16, n_r=4, latent_dim=8)


@pytest.fixture
def critic_spec():
    return CriticSpec(n_t=16, n_r=4)


@pytest.fixture
def los_spec():
    return LOSPredictorSpec(n_t=16, n_r=4)


@pytest.fixture
def tiny_train_config():
    """A handful of iterations, no validation."""
    return TrainConfig(
        n_d=2,
        m=8,
        total_iterations=3,
        checkpoint_every=2,
        validation=None,
        seed=5,
    )


@pytest.fixture
def torch_rng():
    gen = torch.Generator()
    gen.manual_seed(99)
    return gen
