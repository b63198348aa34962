"""
Unit tests for shared helpers: seeds, settings, metric logs and errors
"""

import json
import logging
from pathlib import Path

import pytest
import torch

from src.common.errors import (
    BeamganError,
    ConfigurationError,
    InvalidDimensionError,
    RankDeficiencyError,
    TrainingDivergedError,
)
from src.common.logging_config import MetricsLogger, configure_logging, open_metrics_logger
from src.common.seeding import derive_seed, make_rng, make_torch_generator
from src.common.settings import BeamganSettings


class TestSeeding:

    def test_derive_seed_is_stable(self):
        assert derive_seed(7, 1, 2) == derive_seed(7, 1, 2)
        assert derive_seed(7, 1, 2) != derive_seed(7, 2, 1)
        assert 0 <= derive_seed(0) < 2 ** 32

    def test_generators_are_reproducible(self):
        assert make_rng(3).random() == make_rng(3).random()
        a = torch.randn(4, generator=make_torch_generator(3))
        b = torch.randn(4, generator=make_torch_generator(3))
        assert torch.equal(a, b)


class TestSettings:

    def test_env_prefix(self, monkeypatch):
        monkeypatch.setenv("BEAMGAN_OUTPUT_ROOT", "/tmp/beamgan-runs")
        monkeypatch.setenv("BEAMGAN_LOG_FORMAT", "json")
        settings = BeamganSettings()
        assert settings.output_root == Path("/tmp/beamgan-runs")
        assert settings.log_format == "json"

    def test_invalid_log_format(self, monkeypatch):
        monkeypatch.setenv("BEAMGAN_LOG_FORMAT", "xml")
        with pytest.raises(ValueError):
            BeamganSettings()


class TestMetricsLogger:

    def test_one_json_object_per_line(self, tmp_path):
        path = tmp_path / "logs" / "train_log.jsonl"
        with MetricsLogger(path) as log:
            log.record(iter=1, loss_d=torch.tensor(0.25), val_nmse_db=None)
            log.record(iter=2, loss_d=0.5, ue_snr_db=[33.2, 21.2])
        rows = [json.loads(line) for line in path.read_text().splitlines()]
        assert [r["iter"] for r in rows] == [1, 2]
        assert rows[0]["loss_d"] == 0.25
        assert rows[0]["val_nmse_db"] is None
        assert rows[1]["ue_snr_db"] == [33.2, 21.2]

    def test_does_not_reach_console(self, tmp_path, caplog):
        with caplog.at_level(logging.INFO):
            with MetricsLogger(tmp_path / "m.jsonl") as log:
                log.record(iter=1)
        assert "iter" not in caplog.text

    def test_open_without_directory(self, tmp_path):
        assert open_metrics_logger(None, "x.jsonl") is None
        log = open_metrics_logger(tmp_path, "fed_rounds.jsonl")
        log.close()
        assert (tmp_path / "fed_rounds.jsonl").exists()

    def test_configure_logging_level(self):
        configure_logging("warning", "text")
        assert logging.getLogger().level == logging.WARNING
        configure_logging("info", "json")
        assert logging.getLogger().level == logging.INFO


class TestErrors:

    def test_hierarchy(self):
        for err in (InvalidDimensionError, ConfigurationError):
            assert issubclass(err, BeamganError) and issubclass(err, ValueError)
        assert issubclass(RankDeficiencyError, BeamganError)

    def test_rank_message(self):
        err = RankDeficiencyError(48, 64)
        assert (err.rank, err.required) == (48, 64)
        assert "rank 48" in str(err) and "64" in str(err)

    def test_divergence_message(self, tmp_path):
        ckpt = tmp_path / "iter_000500.pt"
        err = TrainingDivergedError("Critic loss became nan", 512, ckpt)
        assert err.reason == "Critic loss became nan"
        assert "iteration 512" in str(err)
        assert str(ckpt) in str(err)
        assert "no checkpoint" in str(TrainingDivergedError("x", 1))
