"""
Training Configuration

Hyperparameters of adversarial and LOS-predictor training. Defaults are the
reference values: n_d = 5, m = 200, gamma = 5e-5, tau = 0.01, beta = 10.
"""

from pathlib import Path
from typing import Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.estimation.schemas import GCEConfig


class ValidationConfig(BaseModel):
    """Held-out GCE NMSE tracking during training."""

    model_config = ConfigDict(frozen=True)

    n_samples: int = Field(50, ge=1, description="Fixed held-out channels")
    snr_db: float = Field(15.0, description="Measurement SNR for validation GCE")
    n_s: int = Field(4, ge=1, description="Compressive pilot streams")
    n_p: int = Field(8, ge=1, description="Compressive pilot length")
    k: int = Field(2, ge=1, description="Compressive pilot transmissions")
    gce: GCEConfig = Field(default_factory=GCEConfig)


class TrainConfig(BaseModel):
    """
    Adversarial training settings.

    Exactly one Lipschitz mechanism is active: weight clipping at tau when
    `use_gp` is false, the beta-weighted gradient penalty when true.
    """

    model_config = ConfigDict(frozen=True)

    n_d: int = Field(5, ge=1, description="Critic updates per generator iteration")
    m: int = Field(200, ge=1, description="Minibatch size")
    gamma: float = Field(5e-5, gt=0.0, description="RMSprop learning rate")
    tau: float = Field(0.01, gt=0.0, description="Weight clipping constant")
    beta: float = Field(10.0, ge=0.0, description="Gradient penalty weight")
    use_gp: bool = Field(True, description="Gradient penalty instead of clipping")
    reset_critic_optimizer: bool = Field(
        False, description="Reset critic RMSprop state every outer iteration"
    )
    generator_updates_per_iteration: int = Field(1, ge=1)
    total_iterations: int = Field(60000, ge=0)
    seed: int = Field(0)
    snr_db: Optional[float] = Field(
        None, description="Training-data pilot SNR (Pilot GAN / PCGAN only)"
    )
    rms_alpha: float = Field(0.99, gt=0.0, lt=1.0, description="RMSprop decay")
    rms_eps: float = Field(1e-8, gt=0.0)
    checkpoint_every: int = Field(500, ge=1)
    validation: Optional[ValidationConfig] = Field(default_factory=ValidationConfig)
    device: str = Field("cpu")

    @model_validator(mode="after")
    def check_gp_weight(self) -> "TrainConfig":
        if self.use_gp and self.beta == 0:
            raise ValueError("use_gp=true requires a positive beta")
        return self

    @classmethod
    def from_yaml(cls, config_path: Path, section: str = "train") -> "TrainConfig":
        """
        Load from a YAML document, reading the `section` mapping if present.

        Raises:
            FileNotFoundError: If the file does not exist
        """
        config_path = Path(config_path)
        if not config_path.exists():
            raise FileNotFoundError(f"Training config not found: {config_path}")
        with open(config_path, "r") as f:
            data = yaml.safe_load(f) or {}
        return cls(**data.get(section, data))


class LOSTrainConfig(BaseModel):
    """Supervised LOS-predictor training."""

    model_config = ConfigDict(frozen=True)

    iterations: int = Field(20000, ge=0)
    batch_size: int = Field(200, ge=1)
    lr: float = Field(3e-4, gt=0.0, description="Adam learning rate")
    validation_fraction: float = Field(0.1, gt=0.0, lt=1.0)
    eval_every: int = Field(200, ge=1)
    seed: int = 0
    device: str = "cpu"
