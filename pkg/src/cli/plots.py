"""
Static plots and their data tables.

Every plot is written as a PNG with the table behind it next to it as CSV
(same stem). Rendering uses the non-interactive Agg backend.
"""

import logging
from pathlib import Path
from typing import Dict, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from src.estimation.metrics import SMOOTHING_WINDOW, hanning_smooth  # noqa: E402

logger = logging.getLogger(__name__)


def save_figure(fig, table: pd.DataFrame, path: Path) -> Dict[str, Path]:
    """Write `path`.png and `path`.csv; returns both paths."""
    path = Path(path).with_suffix("")
    path.parent.mkdir(parents=True, exist_ok=True)
    png, csv = path.with_suffix(".png"), path.with_suffix(".csv")
    fig.tight_layout()
    fig.savefig(png, dpi=150, bbox_inches="tight")
    plt.close(fig)
    table.to_csv(csv, index=False)
    logger.info(f"Wrote {png.name} and {csv.name} to {path.parent}")
    return {"png": png, "csv": csv}


def plot_nmse_vs_snr(aggregate: pd.DataFrame, path: Path) -> Dict[str, Path]:
    """One panel per profile, one line per method."""
    profiles = sorted(aggregate["profile"].unique(), key=lambda p: (p == "all", p))
    fig, axes = plt.subplots(
        1, len(profiles), figsize=(4 * len(profiles), 3.5), squeeze=False, sharey=True
    )
    for ax, profile in zip(axes[0], profiles):
        sub = aggregate[aggregate["profile"] == profile]
        for method, group in sub.groupby("method"):
            group = group.sort_values("snr_db")
            ax.plot(group["snr_db"], group["nmse_db"], marker="o", label=method)
        ax.set_title(f"Profile {profile}")
        ax.set_xlabel("SNR (dB)")
        ax.grid(True, alpha=0.3)
    axes[0][0].set_ylabel("NMSE (dB)")
    axes[0][-1].legend()
    return save_figure(fig, aggregate, path)


def iteration_curve(trail: pd.DataFrame, smooth: bool = True) -> pd.DataFrame:
    """Add a `smoothed` column (Hanning window of 6) to an iteration/val_nmse_db table."""
    curve = trail.dropna(subset=["val_nmse_db"]).sort_values("iteration").reset_index(drop=True)
    values = curve["val_nmse_db"].to_numpy(dtype=float)
    curve["smoothed"] = hanning_smooth(values, SMOOTHING_WINDOW) if smooth and len(values) else values
    return curve


def plot_nmse_vs_iteration(
    curves: Dict[str, pd.DataFrame], path: Path, x: str = "iteration"
) -> Dict[str, Path]:
    """
    Validation NMSE against training progress for one or more runs.

    Args:
        curves: Label -> table with `x`, val_nmse_db and smoothed columns
        path: Output stem
        x: Column on the horizontal axis ("iteration" or "round")
    """
    fig, ax = plt.subplots(figsize=(6, 4))
    frames = []
    for label, curve in curves.items():
        ax.plot(curve[x], curve["smoothed"], label=label)
        frames.append(curve.assign(run=label))
    ax.set_xlabel(x.capitalize())
    ax.set_ylabel("NMSE (dB)")
    ax.grid(True, alpha=0.3)
    ax.legend()
    table = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
    return save_figure(fig, table, path)


def plot_coherence_study(study: pd.DataFrame, path: Path) -> Dict[str, Path]:
    """Mean mutual coherence and rank of A_sp against n_s, per pilot length."""
    summary = (
        study.groupby(["n_p", "n_s"])
        .agg(coherence=("coherence", "mean"), coherence_min=("coherence", "min"),
             rank=("rank", "mean"), rank_bound=("rank_bound", "first"))
        .reset_index()
    )
    fig, (ax_mu, ax_rank) = plt.subplots(1, 2, figsize=(10, 4))
    for n_p, group in summary.groupby("n_p"):
        ax_mu.plot(group["n_s"], group["coherence"], marker="o", label=f"n_p = {n_p}")
        ax_rank.plot(group["n_s"], group["rank"], marker="o", label=f"n_p = {n_p}")
    ax_mu.set_xlabel("n_s")
    ax_mu.set_ylabel("mutual coherence")
    ax_mu.set_ylim(0.0, 1.05)
    ax_rank.set_xlabel("n_s")
    ax_rank.set_ylabel("rank")
    for ax in (ax_mu, ax_rank):
        ax.grid(True, alpha=0.3)
        ax.legend()
    return save_figure(fig, summary, path)


def plot_accuracy(table: pd.DataFrame, path: Path, label_col: str = "variant") -> Dict[str, Path]:
    """Held-out LOS-predictor accuracy per training variant."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(table[label_col].astype(str), 100.0 * table["accuracy"])
    ax.set_ylabel("accuracy (%)")
    ax.set_ylim(0, 100)
    ax.grid(True, axis="y", alpha=0.3)
    return save_figure(fig, table, path)


def nmse_table_markdown(table: pd.DataFrame, path: Optional[Path] = None) -> str:
    """Text rendering of an (snr_db, method) x profile NMSE table."""
    lines = []
    cols = list(table.columns)
    lines.append("| SNR (dB) | method | " + " | ".join(str(c) for c in cols) + " |")
    lines.append("|---" * (len(cols) + 2) + "|")
    for (snr, method), row in table.iterrows():
        cells = " | ".join("" if np.isnan(v) else f"{v:.2f}" for v in row.to_numpy(dtype=float))
        lines.append(f"| {snr:g} | {method} | {cells} |")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
