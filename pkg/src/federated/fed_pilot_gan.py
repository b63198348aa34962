"""
Federated Pilot GAN

In-process simulation of critic training at U UEs with a central generator:

    for each round:
        every UE accumulates D LS estimates at its link SNR
        for l iterations:
            BS broadcasts theta_g, theta_d
            each UE: theta_{d,u} = theta_d, n_d critic updates on m/U batches
            UE uplinks theta_{d,u}; BS averages theta_d = (1/U) sum theta_{d,u}
            BS runs the generator update(s) on a batch of m

Design Principles:
- UEs run sequentially against one trainer stream, so U = 1 reproduces the
  centralized Pilot GAN run bit for bit
- Each UE keeps its own critic optimizer state across iterations
- UEs only ever see LS estimates at their own SNR (clean channels only in the
  FedGAN variant)
- Communication is error free and counted in parameters and bytes
"""

import copy
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.channel.beamspace import to_beamspace
from src.channel.simulator import draw_profile_channels, get_profile
from src.common.errors import ConfigurationError, TrainingDivergedError
from src.common.logging_config import open_metrics_logger
from src.common.seeding import derive_seed, make_torch_generator
from src.measurement.dataset import LSDataset, build_ls_dataset
from src.measurement.schemas import PilotConfig
from src.neuralnet.networks import count_parameters
from src.training.config import TrainConfig
from src.training.data import (
    BlockNoiseModel,
    LSNoiseModel,
    TrainingData,
    pooled_norm_stats,
    prepare_training_data,
)
from src.training.trainer import (
    CheckpointTrail,
    GCEValidator,
    NetworkSpecs,
    TrainingResult,
    build_gan,
    check_ls_dataset,
    critic_step,
    generator_step,
)
from src.training.updates import make_rmsprop, reset_optimizer

from .averaging import average_critic_weights, critic_parameters, load_parameters
from .link_budget import LinkBudget

logger = logging.getLogger(__name__)


class FedConfig(BaseModel):
    """Federated Pilot GAN settings."""

    model_config = ConfigDict(frozen=True)

    u: int = Field(4, ge=1, description="Number of UEs")
    d_local: int = Field(500, ge=1, description="LS estimates per UE per round")
    rounds: int = Field(600, ge=0)
    l: int = Field(100, ge=1, description="Training iterations per round")
    n_d: int = Field(5, ge=1, description="UE critic updates per iteration")
    m: int = Field(200, ge=1, description="Global batch, m / u per UE")
    generator_updates_per_iteration: int = Field(1, ge=1)
    link: LinkBudget = Field(default_factory=LinkBudget)
    ue_profiles: List[str] = Field(
        default_factory=lambda: ["A"], description="Channel profile per UE (one entry = shared)"
    )
    pilot: PilotConfig = Field(
        default_factory=lambda: PilotConfig(n_s=16, n_p=16, k=4),
        description="Full-rank stacked pilots; snr_db is replaced by each UE's link SNR",
    )
    use_clean_channels: bool = Field(False, description="FedGAN: train critics on clean Hv")
    fixed_datasets: bool = Field(False, description="Draw each UE dataset once, not every round")

    @model_validator(mode="after")
    def check_layout(self) -> "FedConfig":
        if self.m % self.u:
            raise ValueError(f"Batch size m={self.m} must be divisible by u={self.u}")
        if len(self.link.ue_distances_m) != self.u:
            raise ValueError(
                f"Link budget lists {len(self.link.ue_distances_m)} UE distances for u={self.u}"
            )
        if len(self.ue_profiles) not in (1, self.u):
            raise ValueError(f"ue_profiles needs 1 or {self.u} entries, got {len(self.ue_profiles)}")
        return self

    def profile_for(self, ue: int) -> str:
        return self.ue_profiles[0] if len(self.ue_profiles) == 1 else self.ue_profiles[ue]

    def effective_train_config(self, train_cfg: TrainConfig) -> TrainConfig:
        """train_cfg with the federated n_d, m and generator-update count."""
        return train_cfg.model_copy(
            update={
                "n_d": self.n_d,
                "m": self.m,
                "generator_updates_per_iteration": self.generator_updates_per_iteration,
                "total_iterations": self.rounds * self.l,
            }
        )


@dataclass
class FederatedResult(TrainingResult):
    """TrainingResult plus per-round metrics and communication totals."""

    rounds: List[Dict[str, Any]] = field(default_factory=list)
    ue_snr_db: List[float] = field(default_factory=list)
    uplink_params: int = 0
    downlink_params: int = 0
    uplink_bytes: int = 0
    downlink_bytes: int = 0


class UEDataSource:
    """Per-UE LS (or clean) datasets, fixed or regenerated per round."""

    def __init__(
        self,
        fed_cfg: FedConfig,
        specs: NetworkSpecs,
        seed: int,
        fixed: Optional[Sequence[LSDataset]] = None,
    ):
        self.cfg = fed_cfg
        self.arrays = specs.arrays
        self.seed = seed
        self.fixed = list(fixed) if fixed is not None else None
        if self.fixed is not None and len(self.fixed) != fed_cfg.u:
            raise ConfigurationError(f"Got {len(self.fixed)} UE datasets for u={fed_cfg.u}")
        if self.fixed is not None:
            self.snr_db = [float(ds.snr_db) for ds in self.fixed]
        else:
            self.snr_db = fed_cfg.link.ue_snrs()
        self._cache: Optional[List[LSDataset]] = None

    def datasets(self, round_index: int) -> List[LSDataset]:
        """UE datasets for a round (1-based)."""
        if self.fixed is not None:
            return self.fixed
        if self.cfg.fixed_datasets and self._cache is not None:
            return self._cache
        data_round = 1 if self.cfg.fixed_datasets else round_index
        out = [self._draw(ue, data_round) for ue in range(self.cfg.u)]
        self._cache = out
        return out

    def _draw(self, ue: int, round_index: int) -> LSDataset:
        profile = get_profile(self.cfg.profile_for(ue))
        seed = derive_seed(self.seed, 11, round_index, ue)
        h, labels, _ = draw_profile_channels([profile], self.arrays, self.cfg.d_local, seed)
        hv = to_beamspace(h)
        if self.cfg.use_clean_channels:
            n_el = self.arrays.n_elements
            return LSDataset(
                hv_ls=hv,
                sigma_half=np.zeros((n_el, n_el), dtype=complex),
                los_label=labels,
                triplet_seed=np.full(len(hv), seed, dtype=np.int64),
                pilot=self.cfg.pilot.model_copy(update={"snr_db": float("inf")}),
                arrays=self.arrays,
                metadata={"clean": True},
            )
        pilot = self.cfg.pilot.model_copy(update={"snr_db": self.snr_db[ue]})
        return build_ls_dataset(hv, labels, pilot, self.arrays, derive_seed(seed, 1))


def _training_data(
    datasets: Sequence[LSDataset], normalizer, use_clean: bool, device: str
) -> List[TrainingData]:
    out = []
    for ds in datasets:
        data = prepare_training_data(ds.hv_ls, normalizer, device=device)
        if not use_clean:
            data.noise = LSNoiseModel(ds.noise_std, ds.sigma_half, normalizer, device)
        out.append(data)
    return out


def run_federated_training(
    fed_cfg: FedConfig,
    train_cfg: TrainConfig,
    specs: NetworkSpecs,
    ue_datasets: Optional[Sequence[LSDataset]] = None,
    validation_hv: Optional[np.ndarray] = None,
    out_dir: Optional[Path] = None,
    config_hash: str = "",
) -> FederatedResult:
    """
    Federated Pilot GAN (or FedGAN with clean channels).

    Args:
        fed_cfg: UE count, round structure, link budget and data settings
        train_cfg: Optimizer and Lipschitz settings; n_d, m and generator update
            count are taken from fed_cfg
        specs: Unconditional generator / critic specs
        ue_datasets: Fixed LS datasets, one per UE (overrides link-budget sampling)
        validation_hv: Held-out clean channels for per-round validation NMSE
        out_dir: Directory for checkpoints and fed_rounds.jsonl
        config_hash: Recorded in every checkpoint

    Returns:
        FederatedResult

    Raises:
        ConfigurationError: If conditional specs are given or a UE dataset is
            rank deficient
    """
    if specs.conditional:
        raise ConfigurationError("Federated Pilot GAN trains unconditional networks")
    cfg = fed_cfg.effective_train_config(train_cfg)
    source = UEDataSource(fed_cfg, specs, cfg.seed, ue_datasets)

    first = source.datasets(1)
    if not fed_cfg.use_clean_channels:
        for ds in first:
            check_ls_dataset(ds, cfg.model_copy(update={"snr_db": None}))
    stats = pooled_norm_stats([ds.hv_ls for ds in first])
    generator, critic = build_gan(specs, stats, cfg)
    ue_critics = [copy.deepcopy(critic) for _ in range(fed_cfg.u)]
    ue_opts = [make_rmsprop(c.parameters(), cfg) for c in ue_critics]
    gen_opt = make_rmsprop(generator.parameters(), cfg)
    rng = make_torch_generator(derive_seed(cfg.seed, 1))

    validator = None
    if validation_hv is not None and cfg.validation is not None:
        validator = GCEValidator(validation_hv, specs.arrays, cfg.validation, cfg.seed)
    trail = CheckpointTrail(
        generator, critic, validator, out_dir, config_hash, optimizers={"generator": gen_opt}
    )

    n_critic = count_parameters(critic)
    n_gen = count_parameters(generator)
    elem = next(critic.parameters()).element_size()
    per_ue_batch = fed_cfg.m // fed_cfg.u
    uplink = downlink = 0

    logger.info(
        f"Federated {'GAN (clean)' if fed_cfg.use_clean_channels else 'Pilot GAN'}: "
        f"{fed_cfg.u} UEs at SNR {[round(s, 1) for s in source.snr_db]} dB, "
        f"{fed_cfg.rounds} rounds x {fed_cfg.l} iterations"
    )

    metrics = open_metrics_logger(out_dir, "fed_rounds.jsonl")
    rounds: List[Dict[str, Any]] = []
    iteration = 0
    generator.train()
    critic.train()
    try:
        trail.take(0)
        generator.train()
        for r in range(1, fed_cfg.rounds + 1):
            datasets = first if r == 1 else source.datasets(r)
            ue_data = _training_data(
                datasets, generator.normalizer, fed_cfg.use_clean_channels, cfg.device
            )
            noise = None
            if not fed_cfg.use_clean_channels:
                noise = BlockNoiseModel([d.noise for d in ue_data])
            ue_losses = [float("nan")] * fed_cfg.u
            g_loss = float("nan")

            for _ in range(fed_cfg.l):
                iteration += 1
                server = critic_parameters(critic)
                for ue in range(fed_cfg.u):
                    load_parameters(ue_critics[ue], server)
                    if cfg.reset_critic_optimizer:
                        reset_optimizer(ue_opts[ue])
                    for _ in range(cfg.n_d):
                        step = critic_step(
                            ue_critics[ue], ue_opts[ue], generator, ue_data[ue], per_ue_batch,
                            cfg, rng, iteration,
                        )
                    ue_losses[ue] = step.loss
                load_parameters(
                    critic, average_critic_weights([critic_parameters(c) for c in ue_critics])
                )
                for _ in range(cfg.generator_updates_per_iteration):
                    g_loss = generator_step(
                        generator, gen_opt, critic, noise, fed_cfg.m, cfg, rng, iteration
                    ).loss
                downlink += fed_cfg.u * (n_critic + n_gen)
                uplink += fed_cfg.u * n_critic

            val = trail.take(iteration)
            generator.train()
            record = {
                "round": r,
                "iter": iteration,
                "ue_snr_db": list(source.snr_db),
                "ue_critic_loss": list(ue_losses),
                "loss_g": g_loss,
                "val_nmse_db": val,
                "uplink_bytes": uplink * elem,
                "downlink_bytes": downlink * elem,
            }
            rounds.append(record)
            if metrics is not None:
                metrics.record(**record)
            logger.debug(f"Round {r}: critic losses {ue_losses}, generator loss {g_loss:.4f}")
    except TrainingDivergedError as e:
        logger.error(f"Federated training diverged: {e}")
        raise TrainingDivergedError(e.reason, e.iteration, trail.last_path) from e
    finally:
        if metrics is not None:
            metrics.close()

    return FederatedResult(
        generator=generator,
        critic=critic,
        trail=trail.records,
        best_iteration=trail.best_iteration,
        best_generator_state=trail.best_state,
        history=[],
        iterations_completed=iteration,
        rounds=rounds,
        ue_snr_db=list(source.snr_db),
        uplink_params=uplink,
        downlink_params=downlink,
        uplink_bytes=uplink * elem,
        downlink_bytes=downlink * elem,
    )
