"""
Figure Reproduction

`beamgan reproduce <figure-id>` generates data, trains and evaluates whatever
one figure or table needs, then writes a manifest listing every output with
the seed and config hash that produced it.

Figure ids:
    fig4             coherence and rank of A_sp against n_s
    table-nmse       NMSE table: GCE vs OMP vs EM-GM-AMP per profile and SNR
    wgan-vs-gp       clipping vs gradient penalty NMSE curves
    pilot-snr        Pilot GAN at several training SNRs
    fed              FedGAN vs FedPilotGAN, n_d = 5 vs n_d = 20
    los-accuracy     LOS predictor accuracy, all-profile vs 2-profile training
    pcgan            PCGAN with a trained LOS predictor, conditional GCE
    reset-optimizer  critic optimizer reset on vs off
    latent-dim       latent dimension sweep on the NLOS-rich profile
"""

import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from src.common.seeding import derive_seed
from src.measurement.dataset import build_ls_dataset_from_channels
from src.training.los_predictor import evaluate_los_accuracy, train_los_predictor
from src.training.trainer import NetworkSpecs, train_pilot_gan

from .commands import (
    cmd_evaluate,
    cmd_generate,
    cmd_train,
    coherence_figure,
    load_training_data,
    ls_profile_subset,
    regime_train_config,
    run_dir,
    trail_table,
    validation_channels,
)
from .config import ExperimentConfig, Scale, load_experiment, preset_path
from .plots import iteration_curve, plot_accuracy, plot_nmse_vs_iteration

logger = logging.getLogger(__name__)

FIGURE_PRESETS: Dict[str, str] = {
    "fig4": "coherence",
    "table-nmse": "wgan_gp",
    "wgan-vs-gp": "wgan_gp",
    "pilot-snr": "pilot_gan",
    "fed": "fed_pilot_gan",
    "los-accuracy": "pcgan",
    "pcgan": "pcgan",
    "reset-optimizer": "wgan_gp",
    "latent-dim": "wgan_gp",
}

PILOT_SNR_SWEEP = (float("inf"), 30.0, 10.0)
LATENT_SWEEP = {"paper": (55, 65, 75), "desk": (14, 24, 34)}
LOS_SUBSET_PROFILES = ("B", "D")


def _curve(directory: Path, smooth: bool) -> pd.DataFrame:
    return iteration_curve(trail_table(directory), smooth=smooth)


def _fig4(cfg: ExperimentConfig, out: Path) -> None:
    coherence_figure(cfg, out / "coherence_rank")


def _table_nmse(cfg: ExperimentConfig, out: Path) -> None:
    cmd_generate(cfg, out)
    cmd_train(cfg, "wgan-gp", out)
    cmd_evaluate(cfg, out, checkpoint=run_dir(out, "wgan-gp") / "best.pt", name="table-nmse")


def _wgan_vs_gp(cfg: ExperimentConfig, out: Path) -> None:
    cmd_generate(cfg, out)
    curves = {}
    for regime in ("wgan", "wgan-gp"):
        cmd_train(cfg, regime, out)
        curves[regime.upper()] = _curve(run_dir(out, regime), cfg.smoothing)
    plot_nmse_vs_iteration(curves, out / "nmse_vs_iteration")


def _pilot_snr(cfg: ExperimentConfig, out: Path) -> None:
    cmd_generate(cfg, out)
    data = load_training_data(out)
    specs = NetworkSpecs.for_arrays(cfg.arrays, cfg.latent_dim)
    validation_hv = validation_channels(cfg, data["val"]).h_beamspace
    curves = {}
    for k, snr in enumerate(PILOT_SNR_SWEEP):
        pilot = cfg.ls_pilot.model_copy(update={"snr_db": snr})
        ls = build_ls_dataset_from_channels(data["train"], pilot, derive_seed(cfg.seed, 300, k))
        label = "noiseless" if np.isinf(snr) else f"{snr:g} dB"
        name = f"pilot-gan-{'inf' if np.isinf(snr) else int(snr)}"
        train_cfg = regime_train_config(cfg, "pilot-gan", None)
        train_pilot_gan(
            ls, train_cfg, specs, validation_hv, run_dir(out, name), cfg.config_hash()
        )
        curves[label] = _curve(run_dir(out, name), cfg.smoothing)
    plot_nmse_vs_iteration(curves, out / "nmse_vs_iteration")


def _fed(cfg: ExperimentConfig, out: Path) -> None:
    cmd_generate(cfg, out)
    fed = cfg.fed
    variants = {
        "n_d=5": {"n_d": 5, "l": fed.l, "generator_updates_per_iteration": 1},
        "n_d=20": {"n_d": 20, "l": max(1, fed.l // 4), "generator_updates_per_iteration": 4},
    }
    curves = {}
    for label, update in variants.items():
        variant_cfg = cfg.model_copy(update={"fed": fed.model_copy(update=update)})
        for regime in ("fed-gan", "fed-pilot-gan"):
            name = f"{regime}-{label.replace('=', '')}"
            result = cmd_train(variant_cfg, regime, out, name=name)["result"]
            rounds = pd.DataFrame(result.rounds).rename(columns={"iter": "iteration"})
            tag = "FedGAN" if regime == "fed-gan" else "FedPilotGAN"
            curves[f"{tag} {label}"] = iteration_curve(rounds, cfg.smoothing)
    plot_nmse_vs_iteration(curves, out / "nmse_vs_round", x="round")


def _los_accuracy(cfg: ExperimentConfig, out: Path) -> None:
    cmd_generate(cfg, out)
    data = load_training_data(out)
    test_ls = build_ls_dataset_from_channels(
        data["test"], cfg.ls_pilot, derive_seed(cfg.seed, 500)
    )
    rows = []
    subsets = {"all profiles": None, "+".join(LOS_SUBSET_PROFILES): LOS_SUBSET_PROFILES}
    for variant, names in subsets.items():
        ls = data["ls"] if names is None else ls_profile_subset(data["ls"], names)
        name = "los-all" if names is None else "los-subset"
        result = train_los_predictor(ls.hv_ls, ls.los_label, cfg.los_train, out_dir=run_dir(out, name))
        acc = evaluate_los_accuracy(test_ls.hv_ls, test_ls.los_label, result.predictor)
        rows.append({"variant": variant, "accuracy": acc, "val_accuracy": result.best_accuracy})
    plot_accuracy(pd.DataFrame(rows), out / "los_accuracy")


def _pcgan(cfg: ExperimentConfig, out: Path) -> None:
    cmd_generate(cfg, out)
    los = cmd_train(cfg, "los-predictor", out)
    cmd_train(cfg, "pcgan", out, los_checkpoint=los["checkpoint"])
    cmd_train(cfg, "pilot-gan", out)
    cmd_evaluate(
        cfg,
        out,
        checkpoint=run_dir(out, "pilot-gan") / "best.pt",
        conditional_checkpoint=run_dir(out, "pcgan") / "best.pt",
        estimators=["GCE", "GCE-conditional", "OMP"],
        name="pcgan",
    )


def _reset_optimizer(cfg: ExperimentConfig, out: Path) -> None:
    cmd_generate(cfg, out)
    curves = {}
    for reset in (False, True):
        name = f"wgan-gp-reset-{'on' if reset else 'off'}"
        cmd_train(cfg, "wgan-gp", out, reset_critic_optimizer=reset, name=name)
        curves[f"reset {'on' if reset else 'off'}"] = _curve(run_dir(out, name), cfg.smoothing)
    plot_nmse_vs_iteration(curves, out / "nmse_vs_iteration")


def _latent_dim(cfg: ExperimentConfig, out: Path) -> None:
    cfg = cfg.model_copy(update={"profiles": ["B"]})
    cmd_generate(cfg, out)
    curves = {}
    for d in LATENT_SWEEP[cfg.scale]:
        variant = cfg.model_copy(update={"latent_dim": d})
        name = f"wgan-gp-d{d}"
        cmd_train(variant, "wgan-gp", out, name=name)
        curves[f"d = {d}"] = _curve(run_dir(out, name), cfg.smoothing)
    plot_nmse_vs_iteration(curves, out / "nmse_vs_iteration")


FIGURES: Dict[str, Callable[[ExperimentConfig, Path], None]] = {
    "fig4": _fig4,
    "table-nmse": _table_nmse,
    "wgan-vs-gp": _wgan_vs_gp,
    "pilot-snr": _pilot_snr,
    "fed": _fed,
    "los-accuracy": _los_accuracy,
    "pcgan": _pcgan,
    "reset-optimizer": _reset_optimizer,
    "latent-dim": _latent_dim,
}


def write_manifest(out: Path, figure_id: str, cfg: ExperimentConfig) -> Path:
    """List every file under `out` with the seed and config hash that produced it."""
    config_hash = cfg.config_hash()
    files: List[Dict[str, object]] = [
        {"path": str(p.relative_to(out)), "seed": cfg.seed, "config_hash": config_hash}
        for p in sorted(out.rglob("*"))
        if p.is_file() and p.name != "manifest.json"
    ]
    manifest = {
        "figure": figure_id,
        "scale": cfg.scale,
        "seed": cfg.seed,
        "config_hash": config_hash,
        "created": datetime.now(timezone.utc).isoformat(),
        "outputs": files,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2))
    return path


def cmd_reproduce(
    figure_id: str,
    out: Path,
    scale: Scale = "desk",
    seed: Optional[int] = None,
    config: Optional[str] = None,
) -> Path:
    """
    Run everything one figure needs and write its manifest.

    Args:
        figure_id: One of FIGURES
        out: Output root; artifacts go to <out>/<figure_id>
        scale: "paper" or "desk"
        seed: Global seed override
        config: Optional experiment document replacing the figure's preset

    Returns:
        Path of manifest.json

    Raises:
        ValueError: On an unknown figure id
    """
    if figure_id not in FIGURES:
        raise ValueError(f"Unknown figure id '{figure_id}'. Valid: {', '.join(FIGURES)}")
    cfg = load_experiment(config or str(preset_path(FIGURE_PRESETS[figure_id])), scale, seed)
    if figure_id == "fed" and cfg.fed is None:
        raise ValueError("The fed figure needs a config with a `fed` section")
    target = Path(out) / figure_id
    target.mkdir(parents=True, exist_ok=True)
    cfg.to_yaml(target / "config.yaml")
    logger.info(f"Reproducing {figure_id} at {cfg.scale} scale into {target}")
    FIGURES[figure_id](cfg, target)
    return write_manifest(target, figure_id, cfg)
