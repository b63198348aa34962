"""
Network Specifications

Declarative descriptions of the generator, critic and LOS predictor. Layer
sizes follow from (n_t, n_r); at (64, 16) they reproduce the reference
parameter counts:

    Generator                 1,069,568
    Conditional generator     1,328,468
    Critic (GP mode)            100,753
    Conditional critic          112,181
    LOS predictor               101,201
"""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

NetworkKind = Literal["generator", "critic", "los_predictor"]

PAPER_PARAMETER_COUNTS = {
    ("generator", False): 1_069_568,
    ("generator", True): 1_328_468,
    ("critic", False): 100_753,
    ("critic", True): 112_181,
    ("los_predictor", False): 101_201,
}


class _ArraySpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_t: int = Field(64, ge=4, description="Transmit antennas")
    n_r: int = Field(16, ge=1, description="Receive antennas")


class GeneratorSpec(_ArraySpec):
    """
    Generator: Linear -> Reshape(128, n_t/4, n_r/4) -> 2 x [Upsample, Conv, BN, ReLU] -> Conv.

    The conditional variant reshapes the latent path to 127 channels, concatenates
    the (1, n_t/4, n_r/4) condition map and fuses the result with one extra
    Conv-BN-ReLU block before upsampling.
    """

    kind: Literal["generator"] = "generator"
    latent_dim: int = Field(65, ge=1, description="Latent dimension d")
    conditional: bool = Field(False, description="Accept a binary LOS condition")
    embedding_dim: int = Field(10, ge=1, description="Condition embedding width")
    channels: int = Field(128, ge=2, description="Feature maps after reshape")
    kernel_size: int = Field(4, ge=1)
    bn_momentum: float = Field(0.8, gt=0.0, le=1.0)

    @model_validator(mode="after")
    def check_divisible(self) -> "GeneratorSpec":
        if self.n_t % 4 or self.n_r % 4:
            raise ValueError(
                f"Generator needs n_t and n_r divisible by 4, got ({self.n_t}, {self.n_r})"
            )
        return self


class CriticSpec(_ArraySpec):
    """Critic: four strided 3x3 convs with LeakyReLU/Dropout, then Linear(flat, 1). No BN."""

    kind: Literal["critic"] = "critic"
    conditional: bool = False
    embedding_dim: int = Field(10, ge=1)
    dropout: float = Field(0.25, ge=0.0, lt=1.0)
    leaky_slope: float = Field(0.2, ge=0.0)


class LOSPredictorSpec(_ArraySpec):
    """Critic trunk plus BatchNorm after convs 2-4 and a terminal sigmoid."""

    kind: Literal["los_predictor"] = "los_predictor"
    dropout: float = Field(0.25, ge=0.0, lt=1.0)
    leaky_slope: float = Field(0.2, ge=0.0)
    bn_momentum: float = Field(0.8, gt=0.0, le=1.0)


def spec_from_dict(data: dict):
    """Rebuild a spec from its `model_dump()`."""
    kinds = {
        "generator": GeneratorSpec,
        "critic": CriticSpec,
        "los_predictor": LOSPredictorSpec,
    }
    kind = data.get("kind")
    if kind not in kinds:
        raise ValueError(f"Unknown network kind '{kind}'")
    return kinds[kind](**data)
