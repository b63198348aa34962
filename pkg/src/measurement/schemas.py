"""
Measurement Schemas

Pilot configuration, precoder/pilot/combiner triplets, Kronecker sensing
matrices and stacked least-squares estimates.

Design Principles:
- PilotConfig validates on its own; geometry-dependent rules live in `check_for`
- Rank and mutual coherence of a sensing matrix are computed lazily, once
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.channel.schemas import ArrayConfig
from src.common.errors import ConfigurationError

SensingDomain = Literal["spatial", "beamspace"]

# Singular values below this fraction of the largest count as zero
RANK_RTOL = 1e-9


class PilotConfig(BaseModel):
    """Hybrid-beamforming pilot transmission settings."""

    model_config = ConfigDict(frozen=True)

    n_s: int = Field(..., ge=1, description="Data streams (RF chains)")
    n_p: int = Field(..., ge=1, description="Pilot symbols per transmission")
    n_bit_t: int = Field(6, ge=1, description="Precoder phase quantization bits")
    n_bit_r: int = Field(2, ge=1, description="Combiner phase quantization bits")
    k: int = Field(1, ge=1, description="Number of stacked transmissions")
    snr_db: float = Field(15.0, description="Pilot SNR in dB (inf for noiseless)")
    seed: int = Field(0, description="Seed for triplet and noise draws")

    def check_for(self, arrays: ArrayConfig, full_rank: bool = False) -> None:
        """
        Validate against an array geometry.

        Args:
            arrays: Array geometry
            full_rank: Also require the full-rank stacked-LS conditions

        Raises:
            ConfigurationError: If the configuration cannot work for these arrays
        """
        if self.n_s > min(arrays.n_t, arrays.n_r):
            raise ConfigurationError(
                f"n_s={self.n_s} exceeds min(n_t, n_r)={min(arrays.n_t, arrays.n_r)}"
            )
        if not full_rank:
            return
        if self.n_p != self.n_s:
            raise ConfigurationError(
                f"Full-rank stacking requires n_p == n_s, got n_p={self.n_p}, n_s={self.n_s}"
            )
        k_min = math.ceil(arrays.n_t / self.n_p)
        if self.k < k_min:
            raise ConfigurationError(f"Full-rank stacking requires k >= {k_min}, got k={self.k}")
        if self.k * self.n_s ** 2 < arrays.n_elements:
            raise ConfigurationError(
                f"k * n_s^2 = {self.k * self.n_s ** 2} < n_t * n_r = {arrays.n_elements}; "
                f"full rank is impossible (each transmission adds rank <= n_s^2)"
            )

    @property
    def n_measurements(self) -> int:
        """Length of the stacked measurement vector k * n_s * n_p."""
        return self.k * self.n_s * self.n_p


@dataclass(frozen=True)
class PilotTriplet:
    """One (F, S, W) precoder / pilot / combiner set."""

    f: np.ndarray  # (n_t, n_s)
    s: np.ndarray  # (n_s, n_p)
    w: np.ndarray  # (n_r, n_s)


class SensingMatrix:
    """
    Kronecker-structured sensing matrix with lazily cached rank and coherence.

    Attributes:
        a: Complex (rows, n_t * n_r) matrix
        domain: "spatial" (acts on vec(H)) or "beamspace" (acts on vec(Hv))
    """

    def __init__(self, a: np.ndarray, domain: SensingDomain):
        self.a = np.asarray(a)
        self.domain = domain

    @property
    def shape(self) -> tuple:
        return self.a.shape

    @cached_property
    def rank(self) -> int:
        from .sensing import matrix_rank

        return matrix_rank(self.a)

    @cached_property
    def coherence(self) -> float:
        from .sensing import mutual_coherence

        return mutual_coherence(self.a)

    @property
    def cached_rank(self) -> Optional[int]:
        """Rank if already computed, else None."""
        return self.__dict__.get("rank")

    @property
    def cached_coherence(self) -> Optional[float]:
        """Mutual coherence if already computed, else None."""
        return self.__dict__.get("coherence")

    def is_full_rank(self) -> bool:
        return self.rank == self.a.shape[1]

    def __matmul__(self, x: np.ndarray) -> np.ndarray:
        return self.a @ x

    def __repr__(self) -> str:
        return f"SensingMatrix(shape={self.a.shape}, domain={self.domain!r})"


@dataclass(frozen=True)
class LSEstimate:
    """Beamspace LS estimate from full-rank stacked pilots."""

    hv_ls: np.ndarray  # (n_r, n_t)
    sigma_half: np.ndarray  # (n_t * n_r, k * n_r * n_p)
    snr_db: float
