"""
Estimation Schemas

GCE settings and the common result record returned by every estimator.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

EstimatorMethod = Literal["GCE", "GCE-conditional", "OMP", "EM-GM-AMP", "LS"]

ESTIMATOR_METHODS = ("GCE", "GCE-conditional", "OMP", "EM-GM-AMP", "LS")


class GCEConfig(BaseModel):
    """Latent-space optimization settings for generative channel estimation."""

    model_config = ConfigDict(frozen=True)

    step_size: float = Field(0.1, gt=0.0, description="Adam step size eta")
    lambda_reg: float = Field(1e-3, gt=0.0, description="Latent l2 regularization weight")
    iterations: int = Field(100, ge=1, description="Optimizer steps per restart")
    restarts: int = Field(3, ge=1, description="Independent z initializations; best objective kept")
    seed: int = Field(0, description="Seed for the z initializations")


@dataclass
class EstimationResult:
    """
    One channel estimate.

    Attributes:
        hv_est: Complex (n_r, n_t) beamspace estimate
        method: Estimator that produced it
        nmse_db: NMSE against the true channel when known, else NaN
        residual_norm: ||y - A_sp vec(hv_est)||
        iterations_used: Optimizer steps (per restart for GCE), greedy steps or sweeps
        z_star: Optimal latent (GCE only)
        chi_star: Selected condition (conditional GCE only)
        objective: Final GCE objective ||y - A vec(G(z*))||^2 + lambda ||z*||^2
        diverged: EM-GM-AMP divergence flag
        wall_ms: Wall-clock time of the call
    """

    hv_est: np.ndarray
    method: EstimatorMethod
    nmse_db: float = float("nan")
    residual_norm: float = float("nan")
    iterations_used: int = 0
    z_star: Optional[np.ndarray] = None
    chi_star: Optional[int] = None
    objective: Optional[float] = None
    diverged: bool = False
    wall_ms: float = 0.0
    extra: Dict[str, Any] = field(default_factory=dict)
