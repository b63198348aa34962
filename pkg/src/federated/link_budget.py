"""
Link Budget

Per-UE pilot SNR from a downlink budget with indoor-office LOS path loss:

    PL(d, f_c) = 32.4 + 17.3 log10(d / 1 m) + 20 log10(f_c / 1 GHz)    [dB]
    N          = PSD + 10 log10(B) + NF                                 [dBm]
    SNR        = P_tx - PL - N                                          [dB]

Large-scale loss is fixed for a simulation, so each UE has one SNR.
"""

import logging
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

logger = logging.getLogger(__name__)

# InH-Office LOS coefficients
PL_CONSTANT_DB = 32.4
PL_DISTANCE_SLOPE = 17.3
PL_FREQUENCY_SLOPE = 20.0


def _default_distances() -> List[float]:
    return [float(d) for d in np.linspace(10.0, 50.0, 4)]


class LinkBudget(BaseModel):
    """BS-to-UE link parameters."""

    model_config = ConfigDict(frozen=True)

    tx_power_dbm: float = Field(23.0, description="BS transmit power")
    noise_psd_dbm_hz: float = Field(-174.0, description="Thermal noise PSD")
    bandwidth_hz: float = Field(20e6, gt=0.0)
    noise_figure_db: float = Field(9.0, ge=0.0, description="UE noise figure")
    carrier_ghz: float = Field(40.0, gt=0.0, description="Carrier frequency")
    ue_distances_m: List[float] = Field(
        default_factory=_default_distances, description="BS-UE distance per UE"
    )

    @field_validator("ue_distances_m")
    @classmethod
    def check_distances(cls, v: List[float]) -> List[float]:
        if any(d <= 0 for d in v):
            raise ValueError(f"UE distances must be positive, got {v}")
        return v

    @property
    def noise_floor_dbm(self) -> float:
        """
        Examples:
            >>> round(LinkBudget().noise_floor_dbm, 2)
            -91.99
        """
        return self.noise_psd_dbm_hz + 10.0 * np.log10(self.bandwidth_hz) + self.noise_figure_db

    def pathloss_db(self, distance_m: float) -> float:
        if distance_m <= 0:
            raise ValueError(f"Distance must be positive, got {distance_m} m")
        return (
            PL_CONSTANT_DB
            + PL_DISTANCE_SLOPE * np.log10(distance_m)
            + PL_FREQUENCY_SLOPE * np.log10(self.carrier_ghz)
        )

    def ue_snrs(self) -> List[float]:
        """SNR of every configured UE, in order."""
        return [link_snr(self, d) for d in self.ue_distances_m]


def link_snr(link: LinkBudget, distance_m: float) -> float:
    """
    Pilot SNR in dB of a UE at `distance_m`.

    Raises:
        ValueError: If the distance is not positive
    """
    return float(link.tx_power_dbm - link.pathloss_db(distance_m) - link.noise_floor_dbm)
