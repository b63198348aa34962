"""
Experiment Configuration

One declarative YAML document per experiment. Shared keys sit at the top
level; `paper:` and `desk:` blocks hold scale-specific overrides that are
deep-merged over them when the preset is loaded at that scale.

Design Principles:
- Every nested section validates with its own module's model
- Round trip: from_yaml(p).to_yaml() re-parses to an equal model
- config_hash is the SHA-256 of the canonical (sorted-key) JSON dump
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.channel.schemas import ArrayConfig
from src.common.settings import CONFIG_DIR
from src.estimation.schemas import ESTIMATOR_METHODS, GCEConfig
from src.federated.fed_pilot_gan import FedConfig
from src.measurement.schemas import PilotConfig
from src.training.config import LOSTrainConfig, TrainConfig

logger = logging.getLogger(__name__)

Scale = Literal["paper", "desk"]
SCALES = ("paper", "desk")

PRESETS_DIR = CONFIG_DIR / "presets"

# Applied under a document's own scale block
SCALE_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "paper": {
        "train": {"validation": {"n_s": 16, "n_p": 25, "k": 1}},
    },
    "desk": {
        "arrays": {"n_t": 16, "n_r": 4},
        "latent_dim": 24,
        "n_train_per_profile": 400,
        "n_test_per_profile": 20,
        "ls_pilot": {"n_s": 4, "n_p": 4, "k": 4, "snr_db": 20.0},
        "probe": {"n_s": 4, "n_p": 8, "k": 1},
        "train": {
            "total_iterations": 5000,
            "checkpoint_every": 250,
            "validation": {"n_s": 4, "n_p": 8, "k": 1},
        },
        "los_train": {"iterations": 2000, "eval_every": 100},
    },
}


class ExperimentConfig(BaseModel):
    """Everything one generate/train/evaluate run needs."""

    model_config = ConfigDict(frozen=True)

    scenario: str = Field("wgan_gp", description="Experiment name")
    scale: Scale = "paper"
    profiles: List[str] = Field(default_factory=lambda: ["A", "B", "C", "D", "E"])
    arrays: ArrayConfig = Field(default_factory=lambda: ArrayConfig(n_t=64, n_r=16))
    n_train_per_profile: int = Field(6000, ge=1)
    n_test_per_profile: int = Field(50, ge=1)
    latent_dim: int = Field(65, ge=1)
    ls_pilot: PilotConfig = Field(
        default_factory=lambda: PilotConfig(n_s=16, n_p=16, k=4, snr_db=20.0),
        description="Full-rank stacked pilots for LS training data",
    )
    probe: PilotConfig = Field(
        default_factory=lambda: PilotConfig(n_s=16, n_p=25, k=1),
        description="Compressive pilots for estimation",
    )
    train: TrainConfig = Field(default_factory=TrainConfig)
    los_train: LOSTrainConfig = Field(default_factory=LOSTrainConfig)
    fed: Optional[FedConfig] = None
    gce: GCEConfig = Field(default_factory=GCEConfig)
    estimators: List[str] = Field(default_factory=lambda: ["GCE", "OMP", "EM-GM-AMP"])
    snr_list: List[float] = Field(default_factory=lambda: [-5.0, 0.0, 10.0])
    smoothing: bool = Field(True, description="Hanning-smooth iteration curves")
    seed: int = 0
    out_dir: Optional[str] = None

    @model_validator(mode="after")
    def check_sections(self) -> "ExperimentConfig":
        unknown = set(self.estimators) - set(ESTIMATOR_METHODS)
        if unknown:
            raise ValueError(
                f"Unknown estimator(s) {sorted(unknown)}. Valid: {', '.join(ESTIMATOR_METHODS)}"
            )
        self.ls_pilot.check_for(self.arrays, full_rank=True)
        self.probe.check_for(self.arrays)
        if self.arrays.n_t % 4 or self.arrays.n_r % 4:
            raise ValueError(
                f"n_t and n_r must be divisible by 4, got {self.arrays.n_t}x{self.arrays.n_r}"
            )
        return self

    @classmethod
    def from_dict(cls, data: Dict[str, Any], scale: Optional[Scale] = None) -> "ExperimentConfig":
        """
        Resolve scale blocks, then validate.

        A document that already names its scale (a resolved dump) is taken
        as is at that scale; presets leave `scale` unset.
        """
        data = dict(data)
        blocks = {s: data.pop(s, None) or {} for s in SCALES}
        chosen = scale or data.get("scale", "paper")
        if chosen not in SCALES:
            raise ValueError(f"Unknown scale '{chosen}'. Valid: {', '.join(SCALES)}")
        resolved = data.get("scale") == chosen
        base = data if resolved else _deep_merge(data, SCALE_DEFAULTS[chosen])
        merged = _deep_merge(base, blocks[chosen])
        merged["scale"] = chosen
        return cls(**merged)

    @classmethod
    def from_yaml(cls, config_path: Path, scale: Optional[Scale] = None) -> "ExperimentConfig":
        """
        Load an experiment document.

        Raises:
            FileNotFoundError: If the file does not exist
        """
        config_path = Path(config_path)
        if not config_path.exists():
            raise FileNotFoundError(f"Experiment config not found: {config_path}")
        with open(config_path, "r") as f:
            data = yaml.safe_load(f) or {}
        return cls.from_dict(data, scale)

    def to_dict(self) -> Dict[str, Any]:
        return self.model_dump()

    def to_yaml(self, path: Optional[Path] = None) -> str:
        """Serialize the resolved config (no scale blocks); write it when `path` is given."""
        text = yaml.safe_dump(self.to_dict(), sort_keys=True)
        if path is not None:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            Path(path).write_text(text)
        return text

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Copy with the global seed propagated to every seeded section."""
        data = self.to_dict()
        data["seed"] = seed
        for section in ("train", "los_train", "gce"):
            data[section]["seed"] = seed
        data["ls_pilot"]["seed"] = seed
        data["probe"]["seed"] = seed
        return ExperimentConfig(**data)


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def preset_path(name: str) -> Path:
    """Path of a shipped preset by name (with or without .yaml)."""
    path = PRESETS_DIR / (name if name.endswith(".yaml") else f"{name}.yaml")
    if not path.exists():
        available = sorted(p.stem for p in PRESETS_DIR.glob("*.yaml"))
        raise FileNotFoundError(f"Unknown preset '{name}'. Available: {available}")
    return path


def load_experiment(
    config: Optional[str], scale: Optional[Scale] = None, seed: Optional[int] = None
) -> ExperimentConfig:
    """
    Load a config file or shipped preset name; None gives the built-in defaults.

    Args:
        config: Path to a YAML document, a preset name, or None
        scale: "paper" or "desk"
        seed: Global seed override
    """
    if config is None:
        cfg = ExperimentConfig.from_dict({}, scale)
    else:
        path = Path(config)
        cfg = ExperimentConfig.from_yaml(path if path.exists() else preset_path(config), scale)
    if seed is not None:
        cfg = cfg.with_seed(seed)
    logger.debug(f"Experiment '{cfg.scenario}' at {cfg.scale} scale, hash {cfg.config_hash()[:12]}")
    return cfg
