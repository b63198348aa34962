"""
Torch-side SN / SN^-1.

`BeamspaceNormalizer` holds the element-wise statistics as buffers, so they
travel inside every state_dict and generator outputs stay differentiable
through the unnormalization during GCE.
"""

from typing import Optional

import numpy as np
import torch
from torch import nn

from src.channel.schemas import NormStats
from src.common.errors import InvalidDimensionError


class BeamspaceNormalizer(nn.Module):
    """
    Real (B, 2, n_t, n_r) <-> complex (B, n_r, n_t) with element-wise stats.

    Defaults to mu = 0, sigma = 1 until `set_stats` is called.
    """

    def __init__(self, n_t: int, n_r: int):
        super().__init__()
        self.n_t, self.n_r = n_t, n_r
        self.register_buffer("mu_re", torch.zeros(n_t, n_r))
        self.register_buffer("mu_im", torch.zeros(n_t, n_r))
        self.register_buffer("sigma_re", torch.ones(n_t, n_r))
        self.register_buffer("sigma_im", torch.ones(n_t, n_r))

    def set_stats(self, stats: NormStats) -> "BeamspaceNormalizer":
        if stats.shape != (self.n_t, self.n_r):
            raise InvalidDimensionError(
                f"Stats shape {stats.shape} does not match (n_t={self.n_t}, n_r={self.n_r})"
            )
        dtype = self.mu_re.dtype
        self.mu_re.copy_(torch.as_tensor(stats.mu.real, dtype=dtype))
        self.mu_im.copy_(torch.as_tensor(stats.mu.imag, dtype=dtype))
        self.sigma_re.copy_(torch.as_tensor(stats.sigma_re, dtype=dtype))
        self.sigma_im.copy_(torch.as_tensor(stats.sigma_im, dtype=dtype))
        return self

    def get_stats(self) -> NormStats:
        return NormStats(
            mu=self.mu_re.double().cpu().numpy() + 1j * self.mu_im.double().cpu().numpy(),
            sigma_re=self.sigma_re.double().cpu().numpy(),
            sigma_im=self.sigma_im.double().cpu().numpy(),
        )

    def normalize(self, hv: torch.Tensor) -> torch.Tensor:
        """SN of complex (B, n_r, n_t) -> real (B, 2, n_t, n_r)."""
        if hv.shape[-2:] != (self.n_r, self.n_t):
            raise InvalidDimensionError(
                f"Expected (..., {self.n_r}, {self.n_t}) beamspace input, got {tuple(hv.shape)}"
            )
        hv_t = hv.transpose(-1, -2)
        re = (hv_t.real - self.mu_re) / self.sigma_re
        im = (hv_t.imag - self.mu_im) / self.sigma_im
        return torch.stack([re, im], dim=-3)

    def unnormalize(self, x: torch.Tensor) -> torch.Tensor:
        """SN^-1 of real (B, 2, n_t, n_r) -> complex (B, n_r, n_t)."""
        re = x[..., 0, :, :] * self.sigma_re + self.mu_re
        im = x[..., 1, :, :] * self.sigma_im + self.mu_im
        return torch.complex(re, im).transpose(-1, -2)

    def scale_noise(self, zeta_t: torch.Tensor) -> torch.Tensor:
        """
        Normalized-domain image of additive noise.

        Args:
            zeta_t: Complex (B, n_t, n_r) noise in the transposed Hv layout
                (a C-order reshape of column-major vec(Hv) noise)

        Returns:
            Real (B, 2, n_t, n_r) tensor with SN(hv + zeta) = SN(hv) + result
        """
        return torch.stack([zeta_t.real / self.sigma_re, zeta_t.imag / self.sigma_im], dim=-3)


def to_tensor(x: np.ndarray, dtype: Optional[torch.dtype] = None, device: str = "cpu") -> torch.Tensor:
    """numpy -> torch on a device, default float32 / complex64."""
    t = torch.as_tensor(np.asarray(x))
    if dtype is None:
        dtype = torch.complex64 if t.is_complex() else torch.float32
    return t.to(device=device, dtype=dtype)
