"""
Channel Data Schemas

Typed records for the channel simulator: cluster profiles, array geometry,
single channel realizations and beamspace normalization statistics.

Design Principles:
- Configuration records are validated pydantic models (frozen, hashable)
- Numeric payloads are plain numpy arrays held in frozen dataclasses
- Beamspace matrices are always stored (n_r, n_t); normalized tensors (2, n_t, n_r)
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

# Analog profiles mirror the relative structure of the five CDL families
ANALOG_PROFILES = ("A", "B", "C", "D", "E")
LOS_ANALOGS = frozenset({"D", "E"})

# Floor applied to element-wise standard deviations
SIGMA_FLOOR = 1e-6

LosLabel = Literal[0, 1]


class ChannelProfile(BaseModel):
    """
    Geometric cluster model parameters for one channel family.

    Names "A".."E" are the five analog profiles; for those, `los` must be true
    exactly for D and E. Other names (e.g. desk-scale toy profiles "LOS1",
    "NLOS8") are free-form.
    """

    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1, description="Profile name (A-E analog or custom)")
    n_clusters: int = Field(..., ge=1, description="Number of scattering clusters")
    rays_per_cluster: int = Field(..., ge=1, description="Rays per cluster")
    los: bool = Field(..., description="Whether a dominant specular LOS ray is present")
    rician_k_db: float = Field(0.0, description="LOS power over diffuse power (dB)")
    angle_spread_deg: float = Field(
        ..., ge=0.0, description="Laplacian scale of per-ray angle jitter (degrees)"
    )
    per_cluster_power_decay_db: float = Field(
        0.0, ge=0.0, description="Power drop between consecutive clusters (dB)"
    )

    @model_validator(mode="after")
    def check_los_matches_analog(self) -> "ChannelProfile":
        if self.name in ANALOG_PROFILES and self.los != (self.name in LOS_ANALOGS):
            raise ValueError(
                f"Analog profile {self.name} must have los={self.name in LOS_ANALOGS}"
            )
        return self

    @property
    def los_label(self) -> int:
        return int(self.los)


class ArrayConfig(BaseModel):
    """Uniform linear arrays at transmitter (BS) and receiver (UE)."""

    model_config = ConfigDict(frozen=True)

    n_t: int = Field(..., ge=1, description="Transmit antenna count")
    n_r: int = Field(..., ge=1, description="Receive antenna count")
    spacing_wavelengths: float = Field(0.5, description="Element spacing in wavelengths")

    @field_validator("spacing_wavelengths")
    @classmethod
    def check_half_wavelength(cls, v: float) -> float:
        if v != 0.5:
            raise ValueError(f"Antenna spacing must be 0.5 wavelengths, got {v}")
        return v

    @property
    def n_elements(self) -> int:
        """Number of channel entries n_t * n_r."""
        return self.n_t * self.n_r


@dataclass(frozen=True)
class ChannelRealization:
    """One narrowband MIMO channel in the spatial and beamspace domains."""

    h_spatial: np.ndarray
    h_beamspace: np.ndarray
    los_label: int

    def __post_init__(self) -> None:
        if self.h_spatial.shape != self.h_beamspace.shape:
            raise ValueError(
                f"Spatial shape {self.h_spatial.shape} != beamspace shape {self.h_beamspace.shape}"
            )
        if self.los_label not in (0, 1):
            raise ValueError(f"los_label must be 0 or 1, got {self.los_label}")


@dataclass(frozen=True)
class NormStats:
    """
    Element-wise beamspace normalization statistics.

    All arrays are (n_t, n_r), i.e. transposed relative to Hv, matching the
    (2, n_t, n_r) layout of the normalized tensors.
    """

    mu: np.ndarray
    sigma_re: np.ndarray
    sigma_im: np.ndarray
    extra: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not (self.mu.shape == self.sigma_re.shape == self.sigma_im.shape):
            raise ValueError("mu, sigma_re and sigma_im must share one shape")
        if np.any(self.sigma_re <= 0) or np.any(self.sigma_im <= 0):
            raise ValueError("Standard deviations must be strictly positive")

    @property
    def shape(self) -> tuple:
        return self.mu.shape

    def to_dict(self) -> Dict[str, list]:
        """JSON-friendly representation (used in checkpoint metadata)."""
        return {
            "mu_re": self.mu.real.tolist(),
            "mu_im": self.mu.imag.tolist(),
            "sigma_re": self.sigma_re.tolist(),
            "sigma_im": self.sigma_im.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, list]) -> "NormStats":
        return cls(
            mu=np.asarray(data["mu_re"]) + 1j * np.asarray(data["mu_im"]),
            sigma_re=np.asarray(data["sigma_re"], dtype=float),
            sigma_im=np.asarray(data["sigma_im"], dtype=float),
        )

    @classmethod
    def identity(cls, n_t: int, n_r: int) -> "NormStats":
        """mu = 0, sigma = 1: normalization reduces to plain real/imag stacking."""
        return cls(
            mu=np.zeros((n_t, n_r), dtype=complex),
            sigma_re=np.ones((n_t, n_r)),
            sigma_im=np.ones((n_t, n_r)),
        )
