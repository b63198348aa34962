"""
LOS Predictor Training

Supervised binary cross-entropy training of the LOS predictor on beamspace
LS estimates with simulator ground-truth labels.

Design Principles:
- Random train/validation split from the config seed
- The parameters with the best held-out accuracy are returned, not the last ones
- A single-class dataset only warns; the predictor still trains
"""

import copy
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import torch
from torch import nn

from src.channel.normalization import compute_norm_stats
from src.common.errors import InvalidDimensionError
from src.common.logging_config import open_metrics_logger
from src.common.seeding import derive_seed, make_torch_generator, seed_everything
from src.common.settings import get_settings
from src.estimation.los import condition_from_probability
from src.neuralnet.checkpoint import save_checkpoint
from src.neuralnet.forward import los_forward
from src.neuralnet.networks import LOSPredictor, build_network
from src.neuralnet.specs import LOSPredictorSpec

from .config import LOSTrainConfig

logger = logging.getLogger(__name__)


@dataclass
class LOSTrainingResult:
    """Best-validation predictor and its training trace."""

    predictor: LOSPredictor
    best_accuracy: float
    best_iteration: int
    history: List[Dict[str, Any]] = field(default_factory=list)
    checkpoint: Optional[Path] = None


def evaluate_los_accuracy(hv_ls: np.ndarray, labels: np.ndarray, predictor: LOSPredictor) -> float:
    """Fraction of estimates whose thresholded prediction matches the label."""
    labels = np.asarray(labels)
    if len(labels) == 0:
        return float("nan")
    param = next(predictor.parameters())
    dtype = torch.complex128 if param.dtype == torch.float64 else torch.complex64
    with torch.no_grad():
        p = los_forward(torch.as_tensor(np.asarray(hv_ls), dtype=dtype).to(param.device), predictor)
    chi = condition_from_probability(p).cpu().numpy()
    return float(np.mean(chi == labels))


def train_los_predictor(
    hv_ls: np.ndarray,
    labels: np.ndarray,
    cfg: LOSTrainConfig = LOSTrainConfig(),
    spec: Optional[LOSPredictorSpec] = None,
    out_dir: Optional[Path] = None,
) -> LOSTrainingResult:
    """
    Train P(LOS | Hv_LS) with BCE and Adam.

    Args:
        hv_ls: Complex LS estimates (N, n_r, n_t)
        labels: Ground-truth LOS labels (N,) in {0, 1}
        cfg: Iterations, batch size, learning rate and validation split
        spec: Network spec; defaults to the array size of `hv_ls`
        out_dir: Optional directory for los_log.jsonl and the best checkpoint

    Returns:
        LOSTrainingResult with the best-validation-accuracy predictor in eval mode

    Raises:
        InvalidDimensionError: If the estimates and labels disagree in length
    """
    hv_ls = np.asarray(hv_ls)
    labels = np.asarray(labels).astype(np.int64)
    if hv_ls.ndim != 3 or labels.shape != (len(hv_ls),):
        raise InvalidDimensionError(
            f"Expected (N, n_r, n_t) estimates with N labels, got {hv_ls.shape} and {labels.shape}"
        )
    if not np.all((labels == 0) | (labels == 1)):
        raise ValueError("Labels must be 0 or 1")
    if len(np.unique(labels)) < 2:
        logger.warning(
            f"LOS training set holds a single class ({int(labels[0])}); "
            "the predictor cannot learn to separate conditions"
        )

    spec = spec or LOSPredictorSpec(n_t=hv_ls.shape[2], n_r=hv_ls.shape[1])
    seed_everything(cfg.seed, deterministic=get_settings().deterministic)
    predictor = build_network(spec).to(cfg.device)
    predictor.normalizer.set_stats(compute_norm_stats(hv_ls))

    split_rng = np.random.default_rng([cfg.seed, 3])
    order = split_rng.permutation(len(hv_ls))
    n_val = max(1, int(round(cfg.validation_fraction * len(hv_ls)))) if len(hv_ls) > 1 else 0
    val_idx, train_idx = order[:n_val], order[n_val:]
    if len(train_idx) == 0:
        train_idx = order

    x_train = torch.as_tensor(hv_ls[train_idx], dtype=torch.complex64)
    with torch.no_grad():
        x_train = predictor.normalizer.normalize(x_train).to(cfg.device)
    y_train = torch.as_tensor(labels[train_idx], dtype=torch.float32, device=cfg.device)

    optimizer = torch.optim.Adam(predictor.parameters(), lr=cfg.lr)
    criterion = nn.BCELoss()
    rng = make_torch_generator(derive_seed(cfg.seed, 4))

    def validate() -> float:
        if n_val == 0:
            return evaluate_los_accuracy(hv_ls[train_idx], labels[train_idx], predictor)
        return evaluate_los_accuracy(hv_ls[val_idx], labels[val_idx], predictor)

    best_acc = validate()
    best_iteration = 0
    best_state = copy.deepcopy(predictor.state_dict())
    history: List[Dict[str, Any]] = []
    metrics = open_metrics_logger(out_dir, "los_log.jsonl")

    try:
        for iteration in range(1, cfg.iterations + 1):
            predictor.train()
            idx = torch.randint(len(x_train), (cfg.batch_size,), generator=rng).to(cfg.device)
            optimizer.zero_grad()
            loss = criterion(predictor(x_train[idx]), y_train[idx])
            loss.backward()
            optimizer.step()

            if iteration % cfg.eval_every == 0 or iteration == cfg.iterations:
                acc = validate()
                record = {"iter": iteration, "loss": loss.item(), "val_accuracy": acc}
                history.append(record)
                if metrics is not None:
                    metrics.record(**record)
                if acc > best_acc:
                    best_acc, best_iteration = acc, iteration
                    best_state = copy.deepcopy(predictor.state_dict())
    finally:
        if metrics is not None:
            metrics.close()

    predictor.load_state_dict(best_state)
    predictor.eval()
    logger.info(
        f"LOS predictor: best validation accuracy {best_acc:.1%} at iteration {best_iteration}"
    )

    checkpoint = None
    if out_dir is not None:
        checkpoint = save_checkpoint(
            Path(out_dir) / "los_predictor.pt",
            {"los_predictor": predictor},
            best_iteration,
            metrics={"val_accuracy": best_acc},
        )
    return LOSTrainingResult(predictor, best_acc, best_iteration, history, checkpoint)
