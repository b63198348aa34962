"""
End-to-End Pipeline Tests

Runs the CLI commands back to back on a tiny desk-scale experiment:

1. generate channel and LS datasets
2. train WGAN-GP, Pilot GAN, the LOS predictor, PCGAN and federated Pilot GAN
3. evaluate GCE against OMP / EM-GM-AMP and write tables and plots
4. reproduce the coherence figure with its manifest

Marked slow; run with `pytest -m slow`.
"""

import json

import pandas as pd
import pytest

from src.cli.commands import cmd_evaluate, cmd_generate, cmd_train, run_dir
from src.cli.config import ExperimentConfig
from src.cli.main import EXIT_OK, main
from src.cli.reproduce import cmd_reproduce
from src.neuralnet.checkpoint import load_network

pytestmark = pytest.mark.slow


@pytest.fixture
def tiny_cfg():
    return ExperimentConfig.from_dict(
        {
            "scenario": "pipeline",
            "profiles": ["LOS1", "NLOS8"],
            "snr_list": [0.0, 20.0],
            "fed": {
                "u": 2,
                "m": 8,
                "d_local": 8,
                "rounds": 2,
                "l": 2,
                "n_d": 1,
                "ue_profiles": ["LOS1"],
                "link": {"ue_distances_m": [10.0, 50.0]},
                "pilot": {"n_s": 4, "n_p": 4, "k": 4},
            },
            "desk": {
                "n_train_per_profile": 16,
                "n_test_per_profile": 4,
                "train": {
                    "total_iterations": 4,
                    "checkpoint_every": 2,
                    "n_d": 2,
                    "m": 8,
                    "validation": {"n_samples": 3, "gce": {"iterations": 3, "restarts": 1}},
                },
                "gce": {"iterations": 5, "restarts": 1},
                "los_train": {"iterations": 10, "batch_size": 8, "eval_every": 5},
            },
        },
        scale="desk",
    )


@pytest.fixture
def generated(tiny_cfg, tmp_path):
    cmd_generate(tiny_cfg, tmp_path)
    return tmp_path


def test_wgan_gp_train_and_evaluate(tiny_cfg, generated):
    out = generated
    result = cmd_train(tiny_cfg, "wgan-gp", out)
    summary = json.loads(result["summary"].read_text())
    assert [t["iteration"] for t in summary["trail"]] == [0, 2, 4]
    assert summary["best_iteration"] in (0, 2, 4)

    best = run_dir(out, "wgan-gp") / "best.pt"
    assert load_network(best, "generator").latent_dim == tiny_cfg.latent_dim

    paths = cmd_evaluate(tiny_cfg, out, checkpoint=best, name="smoke")
    agg = pd.read_csv(paths["aggregate"])
    assert set(agg["method"]) == {"GCE", "OMP", "EM-GM-AMP"}
    assert set(agg["profile"]) == {"LOS1", "NLOS8", "all"}
    assert paths["nmse_vs_snr"].exists()
    assert paths["nmse_vs_iteration_generator"].exists()
    assert paths["nmse_table_md"].read_text().count("|") > 0


def test_pilot_gan_los_predictor_and_pcgan(tiny_cfg, generated):
    out = generated
    cmd_train(tiny_cfg, "pilot-gan", out)
    los = cmd_train(tiny_cfg, "los-predictor", out)
    assert los["checkpoint"].exists()
    pcgan = cmd_train(tiny_cfg, "pcgan", out, los_checkpoint=los["checkpoint"])
    assert pcgan["result"].generator.conditional

    paths = cmd_evaluate(
        tiny_cfg,
        out,
        checkpoint=run_dir(out, "pilot-gan") / "best.pt",
        conditional_checkpoint=run_dir(out, "pcgan") / "best.pt",
        estimators=["GCE", "GCE-conditional"],
        snr_list=[10.0],
        name="pcgan",
    )
    records = pd.read_csv(paths["records"])
    assert set(records["method"]) == {"GCE", "GCE-conditional"}
    assert records["nmse_db"].notna().all()


def test_federated_regimes(tiny_cfg, generated):
    for regime in ("fed-pilot-gan", "fed-gan"):
        result = cmd_train(tiny_cfg, regime, generated)["result"]
        assert len(result.rounds) == 2
        assert result.iterations_completed == 4
        assert (run_dir(generated, regime) / "fed_rounds.jsonl").exists()


def test_cli_generate_and_reset_flag(tmp_path, tiny_cfg):
    config = tmp_path / "tiny.yaml"
    tiny_cfg.to_yaml(config)
    out = tmp_path / "exp"
    assert main(["generate", "--config", str(config), "--out", str(out)]) == EXIT_OK
    code = main([
        "train", "--regime", "wgan", "--config", str(config), "--out", str(out),
        "--reset-critic-optimizer", "--name", "wgan-reset",
    ])
    assert code == EXIT_OK
    assert (out / "runs" / "wgan-reset" / "summary.json").exists()


def test_reproduce_coherence_figure(tmp_path):
    manifest_path = cmd_reproduce("fig4", tmp_path, scale="desk", seed=3)
    manifest = json.loads(manifest_path.read_text())
    assert manifest["figure"] == "fig4"
    assert manifest["seed"] == 3
    outputs = {o["path"] for o in manifest["outputs"]}
    assert {"coherence_rank.png", "coherence_rank.csv", "config.yaml"} <= outputs
