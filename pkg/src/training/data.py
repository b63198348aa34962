"""
Training Data and Noise Models

Normalized real-sample tensors, optional LOS conditions, and the correlated
LS-noise model Pilot GAN adds to generator outputs.

Design Principles:
- Every random draw goes through one explicit torch.Generator, in a fixed order:
  minibatch indices, latent z, conditions, noise, interpolation eps
- A noiseless model (sigma = 0) draws nothing, so Pilot GAN at infinite SNR
  consumes the same stream as plain WGAN
- Noise is produced in the normalized domain: SN(Hv + zeta) = SN(Hv) + noise
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
import torch

from src.channel.normalization import compute_norm_stats
from src.channel.schemas import NormStats
from src.common.errors import InvalidDimensionError
from src.neuralnet.networks import Generator
from src.neuralnet.transforms import BeamspaceNormalizer

logger = logging.getLogger(__name__)


class LSNoiseModel:
    """
    zeta = sigma * Sigma^(1/2) g, g ~ CN(0, I), mapped into the normalized domain.

    With a per-sample Sigma^(1/2) stack, each draw picks one of the stored
    matrices uniformly at random.
    """

    def __init__(
        self,
        sigma: float,
        sigma_half: np.ndarray,
        normalizer: BeamspaceNormalizer,
        device: str = "cpu",
    ):
        self.sigma = float(sigma)
        self.normalizer = normalizer
        real = normalizer.mu_re.dtype
        cdtype = torch.complex128 if real == torch.float64 else torch.complex64
        self.real_dtype = real
        self.sigma_half = torch.as_tensor(np.asarray(sigma_half), dtype=cdtype, device=device)
        n_el = normalizer.n_t * normalizer.n_r
        if self.sigma_half.shape[-2] != n_el:
            raise InvalidDimensionError(
                f"Sigma^(1/2) has {self.sigma_half.shape[-2]} rows, expected n_t * n_r = {n_el}"
            )
        self.device = device

    @property
    def noiseless(self) -> bool:
        return self.sigma == 0.0

    @property
    def per_sample(self) -> bool:
        return self.sigma_half.dim() == 3

    def sample(self, batch: int, rng: torch.Generator) -> Optional[torch.Tensor]:
        """Normalized-domain noise (batch, 2, n_t, n_r), or None when noiseless."""
        if self.noiseless:
            return None
        n_in = self.sigma_half.shape[-1]
        parts = torch.randn((batch, n_in, 2), generator=rng, dtype=self.real_dtype)
        g = torch.complex(parts[..., 0], parts[..., 1]).to(self.device) / np.sqrt(2.0)
        if self.per_sample:
            idx = torch.randint(self.sigma_half.shape[0], (batch,), generator=rng)
            zeta = torch.einsum("bij,bj->bi", self.sigma_half[idx.to(self.device)], g)
        else:
            zeta = g @ self.sigma_half.T
        zeta = self.sigma * zeta
        zeta_t = zeta.reshape(batch, self.normalizer.n_t, self.normalizer.n_r)
        return self.normalizer.scale_noise(zeta_t)


class BlockNoiseModel:
    """
    Concatenates equal row blocks drawn from several noise models.

    Row block u of a batch of size B gets B / U rows from model u. Used for
    the server-side generator step when UEs see different link SNRs.
    """

    def __init__(self, models: Sequence[LSNoiseModel]):
        if not models:
            raise ValueError("At least one noise model is required")
        self.models = list(models)

    @property
    def noiseless(self) -> bool:
        return all(m.noiseless for m in self.models)

    def sample(self, batch: int, rng: torch.Generator) -> Optional[torch.Tensor]:
        if self.noiseless:
            return None
        u = len(self.models)
        if batch % u:
            raise ValueError(f"Batch of {batch} does not split evenly over {u} noise models")
        blocks = []
        for model in self.models:
            block = model.sample(batch // u, rng)
            if block is None:
                n_t, n_r = model.normalizer.n_t, model.normalizer.n_r
                block = torch.zeros(
                    (batch // u, 2, n_t, n_r), dtype=model.real_dtype, device=model.device
                )
            blocks.append(block)
        return torch.cat(blocks, dim=0)


@dataclass
class TrainingData:
    """
    Real samples as seen by the critic.

    Attributes:
        x: Normalized real tensor (N, 2, n_t, n_r)
        chi: Optional LOS conditions (N,) long
        noise: Optional LS-noise model for generator outputs
    """

    x: torch.Tensor
    chi: Optional[torch.Tensor] = None
    noise: Optional[Union[LSNoiseModel, BlockNoiseModel]] = None

    def __len__(self) -> int:
        return int(self.x.shape[0])

    @property
    def conditional(self) -> bool:
        return self.chi is not None

    def sample_indices(self, batch: int, rng: torch.Generator) -> torch.Tensor:
        return torch.randint(len(self), (batch,), generator=rng)


def prepare_training_data(
    hv: np.ndarray,
    normalizer: BeamspaceNormalizer,
    chi: Optional[np.ndarray] = None,
    device: str = "cpu",
) -> TrainingData:
    """
    Normalize complex beamspace samples with the normalizer's current stats.

    Args:
        hv: Complex (N, n_r, n_t)
        normalizer: Normalizer holding the dataset statistics
        chi: Optional labels (N,)
        device: Target device
    """
    hv = np.asarray(hv)
    if hv.ndim != 3 or len(hv) == 0:
        raise InvalidDimensionError(f"Expected a non-empty (N, n_r, n_t) dataset, got {hv.shape}")
    real = normalizer.mu_re.dtype
    cdtype = torch.complex128 if real == torch.float64 else torch.complex64
    with torch.no_grad():
        x = normalizer.normalize(torch.as_tensor(hv, dtype=cdtype)).to(device)
    labels = None
    if chi is not None:
        chi = np.asarray(chi)
        if chi.shape != (len(hv),):
            raise InvalidDimensionError(f"Got {chi.shape} labels for {len(hv)} samples")
        if not np.all((chi == 0) | (chi == 1)):
            raise ValueError("Labels must be 0 or 1")
        labels = torch.as_tensor(chi, dtype=torch.long, device=device)
    return TrainingData(x=x.contiguous(), chi=labels)


def install_norm_stats(stats: NormStats, *networks: torch.nn.Module) -> None:
    """Copy one set of norm stats into every network's normalizer."""
    for net in networks:
        net.normalizer.set_stats(stats)


def pooled_norm_stats(datasets: List[np.ndarray]) -> NormStats:
    """Element-wise stats over the concatenation of several (N_i, n_r, n_t) datasets."""
    return compute_norm_stats(np.concatenate([np.asarray(d) for d in datasets], axis=0))


def draw_latent(generator: Generator, batch: int, rng: torch.Generator) -> torch.Tensor:
    """z ~ N(0, I) of the generator's latent dimension and dtype."""
    dtype = next(generator.parameters()).dtype
    device = next(generator.parameters()).device
    return torch.randn((batch, generator.latent_dim), generator=rng, dtype=dtype).to(device)


def draw_conditions(batch: int, rng: torch.Generator) -> torch.Tensor:
    """chi ~ Ber(0.5) as a long tensor."""
    return torch.bernoulli(torch.full((batch,), 0.5), generator=rng).long()
