"""
Adversarial Training

The shared WGAN / WGAN-GP loop and its four regimes:

    train_wgan       clean beamspace channels
    train_cwgan      clean channels with ground-truth LOS conditions
    train_pilot_gan  full-rank LS estimates; generator outputs get matching LS noise
    train_pcgan      Pilot GAN with conditions from a trained LOS predictor

Each outer iteration runs n_d critic updates followed by the generator
update(s). Checkpoints (and validation NMSE, when a validation set is given)
are taken every `checkpoint_every` iterations; the checkpoint with the lowest
validation NMSE is reported as best, since NMSE does not fall monotonically.

Design Principles:
- Network init and dropout use the global torch stream seeded by
  `seed_everything`; every other draw comes from the trainer's own generator
- Critic steps condition G on the real batch's labels; generator steps draw
  labels from Ber(0.5); the interpolated batch carries the real labels
- A diverging loss aborts with the path of the last good checkpoint
"""

import copy
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import torch
from torch import nn

from src.channel.dataset import stratified_indices
from src.channel.normalization import compute_norm_stats
from src.channel.schemas import ArrayConfig, NormStats
from src.common.errors import ConfigurationError, TrainingDivergedError
from src.common.logging_config import MetricsLogger, open_metrics_logger
from src.common.seeding import derive_seed, make_torch_generator, seed_everything
from src.common.settings import get_settings
from src.estimation.evaluate import CompressiveProbe
from src.estimation.gce import gce_batch, gce_conditional_batch
from src.estimation.los import los_condition
from src.estimation.metrics import aggregate_nmse_db, batch_nmse
from src.measurement.dataset import LSDataset
from src.measurement.schemas import PilotConfig
from src.neuralnet.checkpoint import save_checkpoint
from src.neuralnet.networks import Critic, Generator, LOSPredictor, build_network
from src.neuralnet.specs import CriticSpec, GeneratorSpec

from .config import TrainConfig, ValidationConfig
from .data import (
    LSNoiseModel,
    TrainingData,
    draw_conditions,
    draw_latent,
    install_norm_stats,
    prepare_training_data,
)
from .updates import StepResult, make_rmsprop, reset_optimizer, update_critic, update_generator

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NetworkSpecs:
    """Generator and critic specs of one GAN."""

    generator: GeneratorSpec
    critic: CriticSpec

    @classmethod
    def for_arrays(
        cls, arrays: ArrayConfig, latent_dim: int = 65, conditional: bool = False
    ) -> "NetworkSpecs":
        return cls(
            generator=GeneratorSpec(
                n_t=arrays.n_t, n_r=arrays.n_r, latent_dim=latent_dim, conditional=conditional
            ),
            critic=CriticSpec(n_t=arrays.n_t, n_r=arrays.n_r, conditional=conditional),
        )

    @property
    def conditional(self) -> bool:
        return self.generator.conditional

    @property
    def arrays(self) -> ArrayConfig:
        return ArrayConfig(n_t=self.generator.n_t, n_r=self.generator.n_r)


@dataclass
class CheckpointRecord:
    """One entry of the checkpoint trail."""

    iteration: int
    path: Optional[Path] = None
    val_nmse_db: Optional[float] = None


@dataclass
class TrainingResult:
    """Final networks, checkpoint trail and per-iteration history of a run."""

    generator: Generator
    critic: Critic
    trail: List[CheckpointRecord]
    best_iteration: int
    best_generator_state: Dict[str, torch.Tensor]
    history: List[Dict[str, Any]] = field(default_factory=list)
    iterations_completed: int = 0

    @property
    def best_val_nmse_db(self) -> Optional[float]:
        for rec in self.trail:
            if rec.iteration == self.best_iteration:
                return rec.val_nmse_db
        return None

    @property
    def best_checkpoint(self) -> Optional[Path]:
        for rec in self.trail:
            if rec.iteration == self.best_iteration:
                return rec.path
        return None

    def best_generator(self) -> Generator:
        """Copy of the generator with the best-validation parameters, in eval mode."""
        gen = copy.deepcopy(self.generator)
        gen.load_state_dict(self.best_generator_state)
        return gen.eval()


class GCEValidator:
    """
    Mean GCE NMSE of a generator on a fixed held-out set.

    Triplets, measurement noise and z initializations are fixed at construction,
    so successive calls differ only through the generator. When more than
    `n_samples` channels are given, a seeded subset is kept, spread over
    `profile_index` when it is known.
    """

    def __init__(
        self,
        hv_val: np.ndarray,
        arrays: ArrayConfig,
        cfg: ValidationConfig = ValidationConfig(),
        seed: int = 0,
        profile_index: Optional[np.ndarray] = None,
    ):
        hv_val = np.asarray(hv_val)
        if profile_index is None:
            profile_index = np.zeros(len(hv_val), dtype=int)
        self.indices = stratified_indices(profile_index, cfg.n_samples, derive_seed(seed, 6))
        hv_val = hv_val[self.indices]
        self.hv = hv_val
        self.cfg = cfg
        pilot = PilotConfig(n_s=cfg.n_s, n_p=cfg.n_p, k=cfg.k, snr_db=cfg.snr_db, seed=seed)
        self.probe = CompressiveProbe.draw(pilot, arrays, derive_seed(seed, 7))
        self.y = self.probe.measure(hv_val, cfg.snr_db, np.random.default_rng([seed, 8]))

    def __call__(self, generator: Generator) -> float:
        if generator.conditional:
            results = gce_conditional_batch(self.y, self.probe.a_sp, generator, self.cfg.gce)
        else:
            results = gce_batch(self.y, self.probe.a_sp, generator, self.cfg.gce)
        est = np.stack([r.hv_est for r in results])
        return aggregate_nmse_db(batch_nmse(self.hv, est))


def critic_step(
    critic: Critic,
    optimizer: torch.optim.Optimizer,
    generator: Generator,
    data: TrainingData,
    batch: int,
    cfg: TrainConfig,
    rng: torch.Generator,
    iteration: int = 0,
) -> StepResult:
    """Draw one minibatch (indices, z, noise, eps) and update the critic."""
    device = data.x.device
    idx = data.sample_indices(batch, rng).to(device)
    x_real = data.x[idx]
    chi_real = data.chi[idx] if data.conditional else None
    z = draw_latent(generator, batch, rng)
    with torch.no_grad():
        x_gen = generator(z, chi_real)
    noise = data.noise.sample(batch, rng) if data.noise is not None else None
    if noise is not None:
        x_gen = x_gen + noise
    x_mix = None
    if cfg.use_gp:
        eps = torch.rand((batch, 1, 1, 1), generator=rng, dtype=x_real.dtype).to(device)
        x_mix = eps * x_real + (1.0 - eps) * x_gen
    return update_critic(
        critic, optimizer, x_gen, x_real, x_mix, cfg, chi_real, chi_real, iteration
    )


def generator_step(
    generator: Generator,
    optimizer: torch.optim.Optimizer,
    critic: Critic,
    noise_model,
    batch: int,
    cfg: TrainConfig,
    rng: torch.Generator,
    iteration: int = 0,
) -> StepResult:
    """Draw z (and Ber(0.5) conditions, noise) and update the generator."""
    device = next(generator.parameters()).device
    z = draw_latent(generator, batch, rng)
    chi = draw_conditions(batch, rng).to(device) if generator.conditional else None
    noise = noise_model.sample(batch, rng) if noise_model is not None else None
    return update_generator(generator, critic, optimizer, z, cfg, chi, noise, iteration)


class CheckpointTrail:
    """Saves checkpoints, runs validation and tracks the best generator state."""

    def __init__(
        self,
        generator: Generator,
        critic: nn.Module,
        validator: Optional[GCEValidator],
        out_dir: Optional[Path],
        config_hash: str,
        optimizers: Optional[Dict[str, torch.optim.Optimizer]] = None,
    ):
        self.generator = generator
        self.critic = critic
        self.validator = validator
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.config_hash = config_hash
        self.optimizers = optimizers or {}
        self.records: List[CheckpointRecord] = []
        self.best_iteration = 0
        self.best_state = copy.deepcopy(generator.state_dict())
        self._best_val = float("inf")

    @property
    def last_path(self) -> Optional[Path]:
        for rec in reversed(self.records):
            if rec.path is not None:
                return rec.path
        return None

    def take(self, iteration: int) -> Optional[float]:
        val = self.validator(self.generator) if self.validator is not None else None
        path = None
        if self.out_dir is not None:
            path = save_checkpoint(
                self.out_dir / "checkpoints" / f"iter_{iteration:06d}.pt",
                {"generator": self.generator, "critic": self.critic},
                iteration,
                self.config_hash,
                optimizers=self.optimizers,
                metrics={"val_nmse_db": val},
            )
        self.records.append(CheckpointRecord(iteration, path, val))
        if val is None or val < self._best_val:
            self._best_val = val if val is not None else self._best_val
            self.best_iteration = iteration
            self.best_state = copy.deepcopy(self.generator.state_dict())
        if val is not None:
            logger.info(f"Iteration {iteration}: validation NMSE {val:.2f} dB")
        return val


class AdversarialTrainer:
    """
    Centralized WGAN / WGAN-GP loop over one TrainingData source.

    Args:
        generator: Generator with norm stats installed
        critic: Critic with the same norm stats
        data: Real samples, optional conditions and optional LS-noise model
        cfg: Training configuration
        validator: Optional held-out GCE NMSE evaluator
        out_dir: Directory for checkpoints and train_log.jsonl (None keeps everything in memory)
        config_hash: Recorded in every checkpoint
    """

    def __init__(
        self,
        generator: Generator,
        critic: Critic,
        data: TrainingData,
        cfg: TrainConfig,
        validator: Optional[GCEValidator] = None,
        out_dir: Optional[Path] = None,
        config_hash: str = "",
    ):
        if data.conditional != generator.conditional or critic.conditional != generator.conditional:
            raise ConfigurationError(
                "Generator, critic and data must agree on conditioning "
                f"(generator={generator.conditional}, critic={critic.conditional}, "
                f"data={data.conditional})"
            )
        self.generator = generator
        self.critic = critic
        self.data = data
        self.cfg = cfg
        self.gen_opt = make_rmsprop(generator.parameters(), cfg)
        self.critic_opt = make_rmsprop(critic.parameters(), cfg)
        self.rng = make_torch_generator(derive_seed(cfg.seed, 1))
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.trail = CheckpointTrail(
            generator,
            critic,
            validator,
            self.out_dir,
            config_hash,
            optimizers={"generator": self.gen_opt, "critic": self.critic_opt},
        )

    def train_iteration(self, iteration: int) -> Dict[str, Any]:
        """n_d critic steps, then the generator step(s)."""
        cfg = self.cfg
        if cfg.reset_critic_optimizer:
            reset_optimizer(self.critic_opt)
        d_step = None
        for _ in range(cfg.n_d):
            d_step = critic_step(
                self.critic, self.critic_opt, self.generator, self.data, cfg.m, cfg, self.rng,
                iteration,
            )
        g_step = None
        for _ in range(cfg.generator_updates_per_iteration):
            g_step = generator_step(
                self.generator, self.gen_opt, self.critic, self.data.noise, cfg.m, cfg, self.rng,
                iteration,
            )
        return {
            "iter": iteration,
            "loss_d": d_step.loss,
            "loss_g": g_step.loss,
            "gp": d_step.gp,
            "wasserstein": d_step.wasserstein,
        }

    def run(self) -> TrainingResult:
        cfg = self.cfg
        self.generator.train()
        self.critic.train()
        metrics: Optional[MetricsLogger] = open_metrics_logger(self.out_dir, "train_log.jsonl")
        history: List[Dict[str, Any]] = []
        iteration = 0
        try:
            self.trail.take(0)
            for iteration in range(1, cfg.total_iterations + 1):
                record = self.train_iteration(iteration)
                if iteration % cfg.checkpoint_every == 0 or iteration == cfg.total_iterations:
                    record["val_nmse_db"] = self.trail.take(iteration)
                    self.generator.train()
                history.append(record)
                if metrics is not None:
                    metrics.record(**record)
                if iteration % 100 == 0:
                    logger.debug(
                        f"iter {iteration}: L_d={record['loss_d']:.4f} L_g={record['loss_g']:.4f}"
                    )
        except TrainingDivergedError as e:
            logger.error(f"Training diverged: {e}")
            raise TrainingDivergedError(e.reason, e.iteration, self.trail.last_path) from e
        finally:
            if metrics is not None:
                metrics.close()

        logger.info(
            f"Finished {cfg.total_iterations} iterations; best checkpoint at "
            f"iteration {self.trail.best_iteration}"
        )
        return TrainingResult(
            generator=self.generator,
            critic=self.critic,
            trail=self.trail.records,
            best_iteration=self.trail.best_iteration,
            best_generator_state=self.trail.best_state,
            history=history,
            iterations_completed=cfg.total_iterations,
        )


def build_gan(specs: NetworkSpecs, stats: NormStats, cfg: TrainConfig):
    """Seed, build and initialize (generator, critic) with norm stats installed."""
    seed_everything(cfg.seed, deterministic=get_settings().deterministic)
    generator = build_network(specs.generator).to(cfg.device)
    critic = build_network(specs.critic).to(cfg.device)
    install_norm_stats(stats, generator, critic)
    return generator, critic


def _validator(
    validation_hv: Optional[np.ndarray], specs: NetworkSpecs, cfg: TrainConfig
) -> Optional[GCEValidator]:
    if validation_hv is None or cfg.validation is None:
        return None
    return GCEValidator(validation_hv, specs.arrays, cfg.validation, cfg.seed)


def _check_conditioning(specs: NetworkSpecs, conditional: bool, regime: str) -> None:
    if specs.generator.conditional != conditional or specs.critic.conditional != conditional:
        kind = "conditional" if conditional else "unconditional"
        raise ConfigurationError(f"{regime} needs {kind} generator and critic specs")


def train_wgan(
    hv: np.ndarray,
    cfg: TrainConfig,
    specs: NetworkSpecs,
    validation_hv: Optional[np.ndarray] = None,
    out_dir: Optional[Path] = None,
    config_hash: str = "",
) -> TrainingResult:
    """
    WGAN (cfg.use_gp = False) or WGAN-GP on clean beamspace channels.

    Args:
        hv: Training channels (N, n_r, n_t)
        cfg: Training configuration
        specs: Unconditional generator / critic specs
        validation_hv: Held-out clean channels for validation NMSE
        out_dir: Checkpoint and log directory
        config_hash: Experiment config hash recorded in checkpoints
    """
    _check_conditioning(specs, False, "train_wgan")
    stats = compute_norm_stats(hv)
    generator, critic = build_gan(specs, stats, cfg)
    data = prepare_training_data(hv, generator.normalizer, device=cfg.device)
    logger.info(
        f"Training {'WGAN-GP' if cfg.use_gp else 'WGAN'} on {len(data):,} channels "
        f"for {cfg.total_iterations} iterations"
    )
    trainer = AdversarialTrainer(
        generator, critic, data, cfg, _validator(validation_hv, specs, cfg), out_dir, config_hash
    )
    return trainer.run()


def train_cwgan(
    hv: np.ndarray,
    chi: np.ndarray,
    cfg: TrainConfig,
    specs: NetworkSpecs,
    validation_hv: Optional[np.ndarray] = None,
    out_dir: Optional[Path] = None,
    config_hash: str = "",
) -> TrainingResult:
    """
    Conditional WGAN on clean channels with ground-truth LOS labels.

    Args:
        hv: Training channels (N, n_r, n_t)
        chi: LOS labels (N,) in {0, 1}
    """
    _check_conditioning(specs, True, "train_cwgan")
    stats = compute_norm_stats(hv)
    generator, critic = build_gan(specs, stats, cfg)
    data = prepare_training_data(hv, generator.normalizer, chi=chi, device=cfg.device)
    logger.info(f"Training CWGAN on {len(data):,} channels ({int(np.sum(chi)):,} LOS)")
    trainer = AdversarialTrainer(
        generator, critic, data, cfg, _validator(validation_hv, specs, cfg), out_dir, config_hash
    )
    return trainer.run()


def check_ls_dataset(ls: LSDataset, cfg: TrainConfig) -> None:
    """
    Refuse datasets Pilot GAN cannot learn from.

    Raises:
        ConfigurationError: If the dataset is not full rank or its SNR
            disagrees with cfg.snr_db
    """
    if not ls.full_rank:
        raise ConfigurationError(
            "Pilot GAN needs LS estimates from full-rank stacked pilots; "
            "this dataset was built from compressive measurements"
        )
    if cfg.snr_db is not None and float(cfg.snr_db) != float(ls.snr_db):
        raise ConfigurationError(
            f"Training SNR {cfg.snr_db} dB does not match the LS dataset's {ls.snr_db} dB"
        )


def _ls_training_data(
    ls: LSDataset, generator: Generator, cfg: TrainConfig, chi: Optional[np.ndarray] = None
) -> TrainingData:
    data = prepare_training_data(ls.hv_ls, generator.normalizer, chi=chi, device=cfg.device)
    data.noise = LSNoiseModel(ls.noise_std, ls.sigma_half, generator.normalizer, cfg.device)
    return data


def train_pilot_gan(
    ls: LSDataset,
    cfg: TrainConfig,
    specs: NetworkSpecs,
    validation_hv: Optional[np.ndarray] = None,
    out_dir: Optional[Path] = None,
    config_hash: str = "",
) -> TrainingResult:
    """
    Pilot GAN: the critic compares LS estimates with G(z) + sigma Sigma^(1/2) g.

    Norm stats come from the LS estimates. At infinite SNR the noise path is
    empty and the run is identical to train_wgan on the same samples.

    Raises:
        ConfigurationError: If the dataset is rank deficient
    """
    _check_conditioning(specs, False, "train_pilot_gan")
    check_ls_dataset(ls, cfg)
    generator, critic = build_gan(specs, compute_norm_stats(ls.hv_ls), cfg)
    data = _ls_training_data(ls, generator, cfg)
    logger.info(f"Training Pilot GAN on {len(data):,} LS estimates at {ls.snr_db} dB")
    trainer = AdversarialTrainer(
        generator, critic, data, cfg, _validator(validation_hv, specs, cfg), out_dir, config_hash
    )
    return trainer.run()


def predict_conditions(
    hv_ls: np.ndarray, predictor: LOSPredictor, chunk: int = 1000
) -> np.ndarray:
    """los_condition over a large set of LS estimates, in chunks."""
    hv_ls = np.asarray(hv_ls)
    parts = [
        np.atleast_1d(los_condition(hv_ls[i:i + chunk], predictor))
        for i in range(0, len(hv_ls), chunk)
    ]
    return np.concatenate(parts).astype(np.int64)


def train_pcgan(
    ls: LSDataset,
    predictor: LOSPredictor,
    cfg: TrainConfig,
    specs: NetworkSpecs,
    validation_hv: Optional[np.ndarray] = None,
    out_dir: Optional[Path] = None,
    config_hash: str = "",
) -> TrainingResult:
    """
    Pilot conditional GAN: Pilot GAN with LOS conditions from a trained predictor.

    Conditions of the real LS estimates are computed once with the (frozen)
    predictor; generator-step conditions are Ber(0.5).

    Raises:
        ConfigurationError: If the dataset is rank deficient
    """
    _check_conditioning(specs, True, "train_pcgan")
    check_ls_dataset(ls, cfg)
    chi = predict_conditions(ls.hv_ls, predictor)
    agreement = float(np.mean(chi == ls.los_label))
    logger.info(
        f"LOS predictor labels {chi.mean():.1%} of {len(chi):,} estimates as LOS "
        f"({agreement:.1%} agreement with simulator labels)"
    )
    generator, critic = build_gan(specs, compute_norm_stats(ls.hv_ls), cfg)
    data = _ls_training_data(ls, generator, cfg, chi=chi)
    trainer = AdversarialTrainer(
        generator, critic, data, cfg, _validator(validation_hv, specs, cfg), out_dir, config_hash
    )
    return trainer.run()
