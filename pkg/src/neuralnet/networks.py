"""
Generator, Critic and LOS Predictor Networks

Torch modules for the three network families. Every network owns a
`BeamspaceNormalizer`, so complex beamspace channels go in and come out while
the layers themselves see the normalized (2, n_t, n_r) tensors.

Design Principles:
- Layer shapes derive from (n_t, n_r) alone; at (64, 16) the counts match
  `PAPER_PARAMETER_COUNTS` exactly
- Critic convolutions carry biases and padding 1, with a one-sided zero pad
  after the second conv so the flatten width is 3456 at (64, 16)
- The critic never contains BatchNorm or a terminal squashing function
- BatchNorm momentum is given in the running-average convention (0.8 keeps
  80% of the old estimate); torch uses the complement
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

import torch
from torch import nn

from src.common.errors import InvalidDimensionError

from .specs import CriticSpec, GeneratorSpec, LOSPredictorSpec
from .transforms import BeamspaceNormalizer

logger = logging.getLogger(__name__)

NetworkSpec = Union[GeneratorSpec, CriticSpec, LOSPredictorSpec]

INIT_STD = 0.02


def _torch_momentum(bn_momentum: float) -> float:
    return 1.0 - bn_momentum


def check_condition(chi: torch.Tensor) -> torch.Tensor:
    """
    Validate a batch of binary conditions and return it as int64.

    Raises:
        ValueError: If any entry is outside {0, 1}
    """
    chi = torch.as_tensor(chi)
    if not torch.all((chi == 0) | (chi == 1)):
        raise ValueError(f"Condition chi must be 0 or 1, got values {chi.unique().tolist()}")
    return chi.long().reshape(-1)


class ConditionEmbedding(nn.Module):
    """
    Embedding(2, e) -> Linear(e, h * w) -> (B, 1, h, w) feature map.

    Used with (h, w) = (n_t/4, n_r/4) on the generator side and (n_t, n_r) on
    the critic side.
    """

    def __init__(self, target_shape: Tuple[int, int], embedding_dim: int = 10):
        super().__init__()
        self.target_shape = tuple(target_shape)
        self.embedding = nn.Embedding(2, embedding_dim)
        self.project = nn.Linear(embedding_dim, self.target_shape[0] * self.target_shape[1])

    def forward(self, chi: torch.Tensor) -> torch.Tensor:
        chi = check_condition(chi).to(self.embedding.weight.device)
        out = self.project(self.embedding(chi))
        return out.view(-1, 1, *self.target_shape)


class Generator(nn.Module):
    """
    Maps latent z (B, d) [and chi (B,)] to normalized beamspace tensors (B, 2, n_t, n_r).

    `generate` applies SN^-1 and returns complex (B, n_r, n_t) channels.
    """

    def __init__(self, spec: GeneratorSpec):
        super().__init__()
        self.spec = spec
        c, k = spec.channels, spec.kernel_size
        self.h0, self.w0 = spec.n_t // 4, spec.n_r // 4
        momentum = _torch_momentum(spec.bn_momentum)

        latent_channels = c - 1 if spec.conditional else c
        self.latent_channels = latent_channels
        self.project = nn.Sequential(
            nn.Linear(spec.latent_dim, latent_channels * self.h0 * self.w0),
            nn.ReLU(),
        )

        if spec.conditional:
            self.condition = ConditionEmbedding((self.h0, self.w0), spec.embedding_dim)
            self.fuse = nn.Sequential(
                nn.Conv2d(c, c, k, padding="same", bias=False),
                nn.BatchNorm2d(c, momentum=momentum),
                nn.ReLU(),
            )
        else:
            self.condition = None
            self.fuse = None

        blocks = []
        for _ in range(2):
            blocks += [
                nn.Upsample(scale_factor=2, mode="nearest"),
                nn.Conv2d(c, c, k, padding="same", bias=False),
                nn.BatchNorm2d(c, momentum=momentum),
                nn.ReLU(),
            ]
        blocks.append(nn.Conv2d(c, 2, k, padding="same", bias=False))
        self.body = nn.Sequential(*blocks)
        self.normalizer = BeamspaceNormalizer(spec.n_t, spec.n_r)

    @property
    def latent_dim(self) -> int:
        return self.spec.latent_dim

    @property
    def conditional(self) -> bool:
        return self.spec.conditional

    def forward(self, z: torch.Tensor, chi: Optional[torch.Tensor] = None) -> torch.Tensor:
        if z.shape[-1] != self.spec.latent_dim:
            raise InvalidDimensionError(
                f"Latent input has dimension {z.shape[-1]}, generator expects {self.spec.latent_dim}"
            )
        if self.conditional and chi is None:
            raise ValueError("Conditional generator requires a condition chi")
        if not self.conditional and chi is not None:
            raise ValueError("Unconditional generator does not accept a condition chi")

        x = self.project(z).view(-1, self.latent_channels, self.h0, self.w0)
        if self.conditional:
            x = torch.cat([x, self.condition(chi).to(x.dtype)], dim=1)
            x = self.fuse(x)
        return self.body(x)

    def generate(self, z: torch.Tensor, chi: Optional[torch.Tensor] = None) -> torch.Tensor:
        """SN^-1(G(z[, chi])) as complex (B, n_r, n_t)."""
        return self.normalizer.unnormalize(self(z, chi))


def _critic_trunk(
    in_channels: int,
    dropout: float,
    slope: float,
    batch_norm_momentum: Optional[float] = None,
) -> nn.Sequential:
    def bn(n: int):
        if batch_norm_momentum is None:
            return []
        return [nn.BatchNorm2d(n, momentum=_torch_momentum(batch_norm_momentum))]

    return nn.Sequential(
        nn.Conv2d(in_channels, 16, 3, stride=2, padding=1),
        nn.LeakyReLU(slope),
        nn.Dropout(dropout),
        nn.Conv2d(16, 32, 3, stride=2, padding=1),
        nn.ZeroPad2d((0, 1, 0, 1)),
        *bn(32),
        nn.LeakyReLU(slope),
        nn.Dropout(dropout),
        nn.Conv2d(32, 64, 3, stride=2, padding=1),
        *bn(64),
        nn.LeakyReLU(slope),
        nn.Dropout(dropout),
        nn.Conv2d(64, 128, 3, stride=1, padding=1),
        *bn(128),
        nn.LeakyReLU(slope),
        nn.Dropout(dropout),
        nn.Flatten(),
    )


def _flatten_width(n_t: int, n_r: int) -> int:
    def conv(n: int, stride: int) -> int:
        return (n + 2 - 3) // stride + 1

    h, w = conv(conv(n_t, 2), 2) + 1, conv(conv(n_r, 2), 2) + 1
    h, w = conv(conv(h, 2), 1), conv(conv(w, 2), 1)
    return 128 * h * w


class Critic(nn.Module):
    """Wasserstein critic: (B, 2, n_t, n_r) [and chi] -> unbounded scores (B,)."""

    def __init__(self, spec: CriticSpec):
        super().__init__()
        self.spec = spec
        in_channels = 3 if spec.conditional else 2
        self.condition = (
            ConditionEmbedding((spec.n_t, spec.n_r), spec.embedding_dim)
            if spec.conditional
            else None
        )
        self.trunk = _critic_trunk(in_channels, spec.dropout, spec.leaky_slope)
        self.flatten_width = _flatten_width(spec.n_t, spec.n_r)
        self.head = nn.Linear(self.flatten_width, 1)
        self.normalizer = BeamspaceNormalizer(spec.n_t, spec.n_r)

    @property
    def conditional(self) -> bool:
        return self.spec.conditional

    def forward(self, x: torch.Tensor, chi: Optional[torch.Tensor] = None) -> torch.Tensor:
        if x.is_complex():
            x = self.normalizer.normalize(x)
        expected = (2, self.spec.n_t, self.spec.n_r)
        if tuple(x.shape[-3:]) != expected:
            raise InvalidDimensionError(
                f"Critic expects (B, {expected[0]}, {expected[1]}, {expected[2]}) input, "
                f"got {tuple(x.shape)}"
            )
        if x.dim() == 3:
            x = x.unsqueeze(0)
        if self.conditional:
            if chi is None:
                raise ValueError("Conditional critic requires a condition chi")
            x = torch.cat([x, self.condition(chi).to(x.dtype)], dim=1)
        elif chi is not None:
            raise ValueError("Unconditional critic does not accept a condition chi")
        return self.head(self.trunk(x)).squeeze(-1)


class LOSPredictor(nn.Module):
    """P(LOS | Hv_LS): complex (B, n_r, n_t) or normalized (B, 2, n_t, n_r) -> (B,) in (0, 1)."""

    def __init__(self, spec: LOSPredictorSpec):
        super().__init__()
        self.spec = spec
        self.trunk = _critic_trunk(2, spec.dropout, spec.leaky_slope, spec.bn_momentum)
        self.flatten_width = _flatten_width(spec.n_t, spec.n_r)
        self.head = nn.Sequential(nn.Linear(self.flatten_width, 1), nn.Sigmoid())
        self.normalizer = BeamspaceNormalizer(spec.n_t, spec.n_r)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.is_complex():
            x = self.normalizer.normalize(x)
        expected = (2, self.spec.n_t, self.spec.n_r)
        if tuple(x.shape[-3:]) != expected:
            raise InvalidDimensionError(
                f"LOS predictor expects (B, 2, {expected[1]}, {expected[2]}) input, "
                f"got {tuple(x.shape)}"
            )
        if x.dim() == 3:
            x = x.unsqueeze(0)
        return self.head(self.trunk(x)).squeeze(-1)


def init_weights(module: nn.Module) -> None:
    """N(0, 0.02) conv/linear weights, BN weight N(1, 0.02), zero biases. Embeddings untouched."""
    if isinstance(module, (nn.Conv2d, nn.Linear)):
        nn.init.normal_(module.weight, 0.0, INIT_STD)
        if module.bias is not None:
            nn.init.zeros_(module.bias)
    elif isinstance(module, nn.BatchNorm2d):
        nn.init.normal_(module.weight, 1.0, INIT_STD)
        nn.init.zeros_(module.bias)


def build_network(spec: NetworkSpec) -> nn.Module:
    """
    Instantiate and initialize the network a spec describes.

    Uses the global torch RNG; call `seed_everything` first for reproducible init.

    Examples:
        >>> g = build_network(GeneratorSpec())
        >>> count_parameters(g)
        1069568
    """
    if isinstance(spec, GeneratorSpec):
        net = Generator(spec)
    elif isinstance(spec, CriticSpec):
        net = Critic(spec)
    elif isinstance(spec, LOSPredictorSpec):
        net = LOSPredictor(spec)
    else:
        raise ValueError(f"Unsupported network spec type {type(spec).__name__}")
    net.apply(init_weights)
    logger.debug(f"Built {spec.kind} ({count_parameters(net):,} parameters)")
    return net


def count_parameters(module: nn.Module) -> int:
    """Trainable parameter count (normalizer buffers excluded)."""
    return sum(p.numel() for p in module.parameters() if p.requires_grad)


@torch.no_grad()
def clip_parameters(module: nn.Module, tau: float) -> None:
    """Clamp every parameter into [-tau, tau] in place."""
    if tau <= 0:
        raise ValueError(f"Clip constant must be positive, got {tau}")
    for p in module.parameters():
        p.clamp_(-tau, tau)


@dataclass
class NetParams:
    """Flat named parameter collection of one network."""

    named: Dict[str, torch.Tensor]

    @property
    def parameter_count(self) -> int:
        return sum(t.numel() for t in self.named.values())

    @classmethod
    def of(cls, module: nn.Module) -> "NetParams":
        """Detached copies of a module's parameters."""
        return cls({name: p.detach().clone() for name, p in module.named_parameters()})

    def max_abs(self) -> float:
        return max((t.abs().max().item() for t in self.named.values()), default=0.0)

    def equals(self, other: "NetParams") -> bool:
        """Bit-exact equality of names and values."""
        if self.named.keys() != other.named.keys():
            return False
        return all(torch.equal(self.named[k], other.named[k]) for k in self.named)
