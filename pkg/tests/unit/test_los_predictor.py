"""
Unit tests for LOS predictor training
"""

import logging

import numpy as np
import pytest

from src.channel.beamspace import to_beamspace
from src.channel.simulator import sample_spatial_channels
from src.measurement.dataset import build_ls_dataset
from src.neuralnet.checkpoint import load_network, read_checkpoint_info
from src.neuralnet.networks import build_network
from src.training.config import LOSTrainConfig
from src.training.los_predictor import evaluate_los_accuracy, train_los_predictor


@pytest.fixture
def mixed_ls(small_arrays, toy_profile, toy_los_profile, full_rank_pilot):
    """40 NLOS then 40 LOS LS estimates at 20 dB."""
    rng = np.random.default_rng(21)
    h = np.concatenate([
        sample_spatial_channels(toy_profile, small_arrays, 40, rng),
        sample_spatial_channels(toy_los_profile, small_arrays, 40, rng),
    ])
    labels = np.repeat([0, 1], 40).astype(np.int8)
    return build_ls_dataset(to_beamspace(h), labels, full_rank_pilot, small_arrays, seed=2)


@pytest.fixture
def quick_cfg():
    return LOSTrainConfig(iterations=20, batch_size=16, eval_every=5, validation_fraction=0.25)


def test_training_returns_best_predictor(mixed_ls, quick_cfg):
    result = train_los_predictor(mixed_ls.hv_ls, mixed_ls.los_label, quick_cfg)
    assert 0.0 <= result.best_accuracy <= 1.0
    assert [r["iter"] for r in result.history] == [5, 10, 15, 20]
    assert result.best_accuracy >= max(r["val_accuracy"] for r in result.history)
    assert not result.predictor.training
    assert result.checkpoint is None


def test_training_is_seeded(mixed_ls, quick_cfg):
    a = train_los_predictor(mixed_ls.hv_ls, mixed_ls.los_label, quick_cfg)
    b = train_los_predictor(mixed_ls.hv_ls, mixed_ls.los_label, quick_cfg)
    assert a.history == b.history


def test_checkpoint_and_log(mixed_ls, quick_cfg, tmp_path):
    result = train_los_predictor(mixed_ls.hv_ls, mixed_ls.los_label, quick_cfg, out_dir=tmp_path)
    assert result.checkpoint == tmp_path / "los_predictor.pt"
    assert read_checkpoint_info(result.checkpoint).metrics["val_accuracy"] == result.best_accuracy
    predictor = load_network(result.checkpoint, "los_predictor")
    acc = evaluate_los_accuracy(mixed_ls.hv_ls, mixed_ls.los_label, predictor)
    assert acc == evaluate_los_accuracy(mixed_ls.hv_ls, mixed_ls.los_label, result.predictor)
    assert len((tmp_path / "los_log.jsonl").read_text().splitlines()) == 4


def test_single_class_warns(mixed_ls, quick_cfg, caplog):
    with caplog.at_level(logging.WARNING):
        train_los_predictor(mixed_ls.hv_ls[:40], mixed_ls.los_label[:40],
                            quick_cfg.model_copy(update={"iterations": 2}))
    assert "single class" in caplog.text


def test_input_validation(mixed_ls):
    with pytest.raises(ValueError):
        train_los_predictor(mixed_ls.hv_ls[:4], np.array([0, 1, 2, 1]))
    with pytest.raises(ValueError):
        train_los_predictor(mixed_ls.hv_ls[:4], np.array([0, 1]))


def test_accuracy_of_empty_set(mixed_ls, los_spec):
    assert np.isnan(evaluate_los_accuracy(mixed_ls.hv_ls[:0], [], build_network(los_spec)))
