"""
CLI Commands

generate, train and evaluate as plain functions over an ExperimentConfig
and an output directory. The argparse front end in main.py only parses and
dispatches.

Output layout:
    <out>/config.yaml
    <out>/data/{train_channels,val_channels,test_channels,train_ls}.nc
    <out>/runs/<regime>/checkpoints/iter_XXXXXX.{pt,json}
    <out>/runs/<regime>/{train_log,fed_rounds,los_log}.jsonl, best.pt, summary.json
    <out>/eval/<name>/{records,aggregate,nmse_table}.csv, nmse_vs_snr.png, ...
"""

import json
import math
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.channel.dataset import (
    ChannelDataset,
    generate_channel_dataset,
    load_channel_dataset,
    save_channel_dataset,
)
from src.channel.simulator import get_profile
from src.common.errors import ConfigurationError, DatasetError
from src.common.seeding import derive_seed
from src.common.settings import get_settings
from src.estimation.amp import AMPConfig
from src.estimation.evaluate import (
    CompressiveProbe,
    aggregate_report,
    evaluate_estimators,
    nmse_table,
)
from src.federated.fed_pilot_gan import FedConfig, run_federated_training
from src.measurement.dataset import (
    LSDataset,
    build_ls_dataset_from_channels,
    load_ls_dataset,
    save_ls_dataset,
)
from src.measurement.sensing import coherence_rank_study
from src.neuralnet.checkpoint import load_network, read_checkpoint_info, save_checkpoint
from src.training.config import ValidationConfig
from src.training.los_predictor import train_los_predictor
from src.training.trainer import (
    NetworkSpecs,
    TrainingResult,
    train_cwgan,
    train_pcgan,
    train_pilot_gan,
    train_wgan,
)

from .config import ExperimentConfig
from .plots import (
    iteration_curve,
    nmse_table_markdown,
    plot_coherence_study,
    plot_nmse_vs_iteration,
    plot_nmse_vs_snr,
)

logger = logging.getLogger(__name__)

REGIMES = (
    "wgan",
    "wgan-gp",
    "cwgan",
    "pilot-gan",
    "pcgan",
    "fed-pilot-gan",
    "fed-gan",
    "los-predictor",
)

# Seed keys per artifact
_TRAIN_DATA_KEY, _TEST_DATA_KEY, _LS_DATA_KEY, _PROBE_KEY = 100, 200, 300, 400
_VAL_DATA_KEY, _VAL_SUBSET_KEY = 600, 700


def data_paths(out: Path) -> Dict[str, Path]:
    data = Path(out) / "data"
    return {
        "train_channels": data / "train_channels.nc",
        "val_channels": data / "val_channels.nc",
        "test_channels": data / "test_channels.nc",
        "train_ls": data / "train_ls.nc",
    }


def run_dir(out: Path, regime: str) -> Path:
    return Path(out) / "runs" / regime


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; {hint}")
    return path


def cmd_generate(cfg: ExperimentConfig, out: Path) -> Dict[str, Path]:
    """
    Generate train, validation and test channel datasets and the full-rank LS
    training set. The validation split has its own seed and is never scored by
    `cmd_evaluate`; it only selects checkpoints.

    Returns:
        Mapping of artifact name to written path
    """
    out = Path(out)
    profiles = [get_profile(name) for name in cfg.profiles]
    train = generate_channel_dataset(
        profiles, cfg.arrays, cfg.n_train_per_profile, derive_seed(cfg.seed, _TRAIN_DATA_KEY)
    )
    val = generate_channel_dataset(
        profiles, cfg.arrays, validation_per_profile(cfg), derive_seed(cfg.seed, _VAL_DATA_KEY)
    )
    test = generate_channel_dataset(
        profiles, cfg.arrays, cfg.n_test_per_profile, derive_seed(cfg.seed, _TEST_DATA_KEY)
    )
    ls = build_ls_dataset_from_channels(train, cfg.ls_pilot, derive_seed(cfg.seed, _LS_DATA_KEY))

    paths = data_paths(out)
    save_channel_dataset(train, paths["train_channels"])
    save_channel_dataset(val, paths["val_channels"])
    save_channel_dataset(test, paths["test_channels"])
    save_ls_dataset(ls, paths["train_ls"])
    cfg.to_yaml(out / "config.yaml")
    logger.info(
        f"Generated {len(train):,} train / {len(val):,} validation / {len(test):,} test "
        f"channels in {out / 'data'}"
    )
    return paths


def regime_train_config(cfg: ExperimentConfig, regime: str, reset_critic_optimizer: Optional[bool]):
    """The experiment's TrainConfig adjusted for a regime, the device and CLI overrides."""
    update: Dict[str, Any] = {"device": get_settings().device}
    if regime == "wgan":
        update["use_gp"] = False
    elif regime == "wgan-gp":
        update["use_gp"] = True
    if reset_critic_optimizer is not None:
        update["reset_critic_optimizer"] = reset_critic_optimizer
    return cfg.train.model_copy(update=update)


def _write_summary(result: TrainingResult, directory: Path, config_hash: str) -> Path:
    best_path = save_checkpoint(
        directory / "best.pt",
        {"generator": result.best_generator()},
        result.best_iteration,
        config_hash,
        metrics={"val_nmse_db": result.best_val_nmse_db},
    )
    summary = {
        "best_iteration": result.best_iteration,
        "best_val_nmse_db": result.best_val_nmse_db,
        "best_checkpoint": str(best_path),
        "iterations_completed": result.iterations_completed,
        "trail": [
            {"iteration": r.iteration, "path": str(r.path) if r.path else None,
             "val_nmse_db": r.val_nmse_db}
            for r in result.trail
        ],
    }
    path = directory / "summary.json"
    path.write_text(json.dumps(summary, indent=2))
    return path


_DATA_HINT = "run `beamgan generate` with the same --out first"


def validation_per_profile(cfg: ExperimentConfig) -> int:
    """Validation channels per profile so every profile fills its share of n_samples."""
    n_samples = (cfg.train.validation or ValidationConfig()).n_samples
    return max(1, math.ceil(n_samples / len(cfg.profiles)))


def validation_channels(cfg: ExperimentConfig, val: ChannelDataset) -> ChannelDataset:
    """The fixed, profile-balanced checkpoint-selection set drawn from the validation split."""
    n_samples = (cfg.train.validation or ValidationConfig()).n_samples
    return val.balanced_subset(n_samples, derive_seed(cfg.seed, _VAL_SUBSET_KEY))


def _load_channels(out: Path, split: str) -> ChannelDataset:
    return load_channel_dataset(_require(data_paths(out)[f"{split}_channels"], _DATA_HINT))


def cmd_train(
    cfg: ExperimentConfig,
    regime: str,
    out: Path,
    los_checkpoint: Optional[Path] = None,
    reset_critic_optimizer: Optional[bool] = None,
    name: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Train one regime on previously generated data.

    Args:
        cfg: Experiment configuration
        regime: One of REGIMES
        out: Experiment directory (holding data/)
        los_checkpoint: Trained LOS predictor, required for pcgan
        reset_critic_optimizer: Override the config's critic-optimizer reset
        name: Run directory name under runs/ (defaults to the regime)

    Returns:
        Dict with the run directory and, for GAN regimes, the TrainingResult

    Raises:
        ValueError: On an unknown regime
        ConfigurationError: If pcgan is requested without a LOS predictor, or
            a federated regime without a `fed` section
        FileNotFoundError: If generated data is missing
    """
    if regime not in REGIMES:
        raise ValueError(f"Unknown regime '{regime}'. Valid: {', '.join(REGIMES)}")
    if regime == "pcgan" and los_checkpoint is None:
        raise ConfigurationError(
            "pcgan needs a trained LOS predictor: pass --los-checkpoint "
            "(train one with `beamgan train --regime los-predictor`)"
        )
    out = Path(out)
    directory = run_dir(out, name or regime)
    train_cfg = regime_train_config(cfg, regime, reset_critic_optimizer)
    config_hash = cfg.config_hash()
    paths, hint = data_paths(out), _DATA_HINT
    validation_hv = validation_channels(cfg, _load_channels(out, "val")).h_beamspace

    conditional = regime in ("cwgan", "pcgan")
    specs = NetworkSpecs.for_arrays(cfg.arrays, cfg.latent_dim, conditional=conditional)
    logger.info(f"Training regime {regime} into {directory}")

    if regime == "los-predictor":
        ls = load_ls_dataset(_require(paths["train_ls"], hint))
        los_cfg = cfg.los_train.model_copy(update={"device": get_settings().device})
        result = train_los_predictor(ls.hv_ls, ls.los_label, los_cfg, out_dir=directory)
        return {"run_dir": directory, "result": result, "checkpoint": result.checkpoint}

    if regime in ("wgan", "wgan-gp", "cwgan"):
        train = load_channel_dataset(_require(paths["train_channels"], hint))
        if regime == "cwgan":
            result = train_cwgan(
                train.h_beamspace, train.los_label, train_cfg, specs, validation_hv, directory,
                config_hash,
            )
        else:
            result = train_wgan(
                train.h_beamspace, train_cfg, specs, validation_hv, directory, config_hash
            )
    elif regime in ("pilot-gan", "pcgan"):
        ls = load_ls_dataset(_require(paths["train_ls"], hint))
        if regime == "pcgan":
            predictor = load_network(_require(Path(los_checkpoint).with_suffix(".pt"), hint),
                                     name="los_predictor")
            result = train_pcgan(
                ls, predictor, train_cfg, specs, validation_hv, directory, config_hash
            )
        else:
            result = train_pilot_gan(ls, train_cfg, specs, validation_hv, directory, config_hash)
    else:
        if cfg.fed is None:
            raise ConfigurationError(f"Regime {regime} needs a `fed` section in the config")
        fed_cfg: FedConfig = cfg.fed.model_copy(
            update={"use_clean_channels": regime == "fed-gan"}
        )
        result = run_federated_training(
            fed_cfg, train_cfg, specs, validation_hv=validation_hv, out_dir=directory,
            config_hash=config_hash,
        )

    summary = _write_summary(result, directory, config_hash)
    return {"run_dir": directory, "result": result, "summary": summary}


def trail_table(directory: Path) -> pd.DataFrame:
    """(iteration, val_nmse_db) from the checkpoint sidecars of a run."""
    rows = []
    for side in sorted((Path(directory) / "checkpoints").glob("iter_*.json")):
        info = read_checkpoint_info(side)
        rows.append({"iteration": info.iteration, "val_nmse_db": info.metrics.get("val_nmse_db")})
    return pd.DataFrame(rows, columns=["iteration", "val_nmse_db"])


def _load_generator(checkpoint: Path):
    path = Path(checkpoint).with_suffix(".pt")
    _require(path, "train a generator first or pass --checkpoint")
    return load_network(path, name="generator")


def cmd_evaluate(
    cfg: ExperimentConfig,
    out: Path,
    checkpoint: Optional[Path] = None,
    conditional_checkpoint: Optional[Path] = None,
    estimators: Optional[Sequence[str]] = None,
    snr_list: Optional[Sequence[float]] = None,
    name: str = "default",
    coherence: bool = False,
) -> Dict[str, Path]:
    """
    Evaluate estimators on the test set and emit tables and plots.

    Args:
        cfg: Experiment configuration
        out: Experiment directory (holding data/)
        checkpoint: Generator checkpoint for GCE
        conditional_checkpoint: Conditional generator checkpoint for GCE-conditional
        estimators: Methods to run; defaults to cfg.estimators
        snr_list: Test SNRs; defaults to cfg.snr_list
        name: Evaluation subdirectory name
        coherence: Also emit the coherence/rank-vs-n_s study

    Returns:
        Mapping of artifact name to written path

    Raises:
        IncompatibleModelError: If an estimator cannot use the given checkpoint
    """
    out = Path(out)
    eval_dir = out / "eval" / name
    eval_dir.mkdir(parents=True, exist_ok=True)
    test = _load_channels(out, "test")
    methods = list(estimators or cfg.estimators)
    snrs = list(snr_list if snr_list is not None else cfg.snr_list)

    generator = _load_generator(checkpoint) if checkpoint is not None else None
    cond_generator = (
        _load_generator(conditional_checkpoint) if conditional_checkpoint is not None else None
    )
    probe = CompressiveProbe.draw(cfg.probe, cfg.arrays, derive_seed(cfg.seed, _PROBE_KEY))
    profiles = [test.profile_names[i] for i in test.profile_index]

    records = evaluate_estimators(
        test.h_beamspace, profiles, methods, snrs, probe, generator, cond_generator,
        cfg.gce, AMPConfig(), seed=cfg.seed,
    )
    aggregate = aggregate_report(records)
    table = nmse_table(aggregate)

    paths: Dict[str, Path] = {}
    paths["records"] = eval_dir / "records.csv"
    records.to_csv(paths["records"], index=False)
    paths["aggregate"] = eval_dir / "aggregate.csv"
    aggregate.to_csv(paths["aggregate"], index=False)
    paths["nmse_table"] = eval_dir / "nmse_table.csv"
    table.to_csv(paths["nmse_table"])
    paths["nmse_table_md"] = eval_dir / "nmse_table.md"
    nmse_table_markdown(table, paths["nmse_table_md"])
    paths["nmse_vs_snr"] = plot_nmse_vs_snr(aggregate, eval_dir / "nmse_vs_snr")["png"]

    for label, ckpt in (("generator", checkpoint), ("conditional", conditional_checkpoint)):
        if ckpt is None:
            continue
        trail = trail_table(Path(ckpt).parent)
        if trail["val_nmse_db"].notna().any():
            curve = iteration_curve(trail, smooth=cfg.smoothing)
            paths[f"nmse_vs_iteration_{label}"] = plot_nmse_vs_iteration(
                {label: curve}, eval_dir / f"nmse_vs_iteration_{label}"
            )["png"]

    if coherence:
        paths["coherence"] = coherence_figure(cfg, eval_dir / "coherence_rank")
    logger.info(f"Evaluation '{name}' written to {eval_dir}")
    return paths


def coherence_figure(
    cfg: ExperimentConfig,
    path: Path,
    n_s_values: Optional[List[int]] = None,
    n_p_values: Sequence[int] = (16, 25),
    draws: int = 20,
) -> Path:
    """Mutual coherence / rank of A_sp against n_s."""
    n_s_values = n_s_values or list(range(1, min(cfg.arrays.n_t, cfg.arrays.n_r) + 1))
    study = coherence_rank_study(
        n_s_values, n_p_values, draws, cfg.arrays, cfg.probe.n_bit_t, cfg.probe.n_bit_r, cfg.seed
    )
    return plot_coherence_study(study, path)["png"]


def load_training_data(out: Path) -> Dict[str, Any]:
    """All generated datasets of an experiment directory."""
    paths = data_paths(out)
    missing = [str(p) for p in paths.values() if not p.exists()]
    if missing:
        raise DatasetError(f"Missing generated data: {missing}")
    return {
        "train": load_channel_dataset(paths["train_channels"]),
        "val": load_channel_dataset(paths["val_channels"]),
        "test": load_channel_dataset(paths["test_channels"]),
        "ls": load_ls_dataset(paths["train_ls"]),
    }


def profile_subset(ds: ChannelDataset, names: Sequence[str]) -> ChannelDataset:
    """Channels of the named profiles only."""
    mask = np.isin(np.asarray(ds.profile_names)[ds.profile_index], list(names))
    return ds.subset(np.flatnonzero(mask))


def ls_profile_subset(ls: LSDataset, names: Sequence[str]) -> LSDataset:
    """LS estimates of the named profiles (needs profile metadata from generate)."""
    index = np.asarray(ls.metadata.get("profile_index", []))
    profile_names = ls.metadata.get("profile_names", [])
    if len(index) != len(ls):
        raise DatasetError("LS dataset carries no per-sample profile metadata")
    mask = np.isin(np.asarray(profile_names)[index], list(names))
    return ls.subset(np.flatnonzero(mask))
