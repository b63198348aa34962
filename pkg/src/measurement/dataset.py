"""
LS Training Datasets

Builds and persists datasets of beamspace LS estimates for Pilot GAN / PCGAN
training and LOS-predictor supervision.

By default one full-rank block of k triplets is drawn for the whole dataset, so
a single Sigma^(1/2) describes every sample's noise. With `redraw_per_sample`
each channel gets its own triplets and its own Sigma^(1/2) (desk scale only:
the matrix is n_t n_r x k n_r n_p per sample).

Archive layout (format_version 1, scipy netCDF3 engine):
    hv_ls_re, hv_ls_im             : float32 (sample, rx, tx)
    sigma_half_re, sigma_half_im   : float32 (vec, noise) or (sample, vec, noise)
    los_label                      : int8    (sample,)
    triplet_seed                   : int64   (sample,)
    attrs: kind="ls", metadata JSON {pilot, arrays, snr_db, full_rank, redraw_per_sample, ...}
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import xarray as xr

from src.channel.beamspace import from_beamspace
from src.channel.dataset import ChannelDataset
from src.channel.schemas import ArrayConfig
from src.common.errors import DatasetError
from src.common.seeding import derive_seed

from .least_squares import LSOperator, draw_triplets, measure_block
from .pilots import snr_to_noise_std
from .schemas import PilotConfig

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass
class LSDataset:
    """Beamspace LS estimates plus the noise model that produced them."""

    hv_ls: np.ndarray  # (N, n_r, n_t) complex
    sigma_half: np.ndarray  # (n_t n_r, k n_r n_p) or (N, n_t n_r, k n_r n_p)
    los_label: np.ndarray  # (N,) int8
    triplet_seed: np.ndarray  # (N,) int64
    pilot: PilotConfig
    arrays: ArrayConfig
    full_rank: bool = True
    redraw_per_sample: bool = False
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.hv_ls.shape[0])

    @property
    def snr_db(self) -> float:
        return self.pilot.snr_db

    @property
    def noise_std(self) -> float:
        """Pilot noise standard deviation sigma."""
        return snr_to_noise_std(self.pilot.snr_db)

    @property
    def per_sample_sigma(self) -> bool:
        return self.sigma_half.ndim == 3

    def subset(self, indices: np.ndarray) -> "LSDataset":
        return LSDataset(
            hv_ls=self.hv_ls[indices],
            sigma_half=self.sigma_half[indices] if self.per_sample_sigma else self.sigma_half,
            los_label=self.los_label[indices],
            triplet_seed=self.triplet_seed[indices],
            pilot=self.pilot,
            arrays=self.arrays,
            full_rank=self.full_rank,
            redraw_per_sample=self.redraw_per_sample,
            metadata=dict(self.metadata),
        )


def build_ls_dataset(
    hv: np.ndarray,
    los_label: np.ndarray,
    cfg: PilotConfig,
    arrays: ArrayConfig,
    seed: int,
    redraw_per_sample: bool = False,
) -> LSDataset:
    """
    Simulate full-rank stacked pilots for every channel and LS-invert them.

    Args:
        hv: Clean beamspace channels (N, n_r, n_t)
        los_label: Ground-truth LOS labels (N,)
        cfg: Full-rank pilot configuration (n_p = n_s, k >= n_t / n_p)
        arrays: Array geometry
        seed: Dataset seed (triplets and noise)
        redraw_per_sample: Draw fresh triplets for every channel

    Returns:
        LSDataset

    Raises:
        ConfigurationError: If the pilot configuration cannot reach full rank
    """
    hv = np.asarray(hv)
    h = from_beamspace(hv)
    sigma = snr_to_noise_std(cfg.snr_db)
    n = hv.shape[0]

    if not redraw_per_sample:
        triplet_rng = np.random.default_rng([seed, 0])
        noise_rng = np.random.default_rng([seed, 1])
        triplets, sensing = draw_triplets(cfg, arrays, triplet_rng, require_full_rank=True)
        op = LSOperator(sensing=sensing, triplets=triplets, arrays=arrays)
        y = measure_block(h, triplets, sensing, sigma, noise_rng)
        hv_ls = op.apply(y)
        sigma_half = op.sigma_half
        seeds = np.full(n, seed, dtype=np.int64)
    else:
        hv_ls = np.empty_like(hv, dtype=complex)
        sigma_halves = []
        seeds = np.empty(n, dtype=np.int64)
        for i in range(n):
            seeds[i] = derive_seed(seed, i)
            rng = np.random.default_rng(int(seeds[i]))
            triplets, sensing = draw_triplets(cfg, arrays, rng, require_full_rank=True)
            op = LSOperator(sensing=sensing, triplets=triplets, arrays=arrays)
            hv_ls[i] = op.apply(measure_block(h[i], triplets, sensing, sigma, rng))
            sigma_halves.append(op.sigma_half)
        sigma_half = np.stack(sigma_halves)

    logger.info(
        f"Built LS dataset: {n:,} samples at {cfg.snr_db} dB, k={cfg.k}, "
        f"n_s=n_p={cfg.n_s}, per-sample triplets={redraw_per_sample}"
    )

    return LSDataset(
        hv_ls=hv_ls,
        sigma_half=sigma_half,
        los_label=np.asarray(los_label, dtype=np.int8),
        triplet_seed=seeds,
        pilot=cfg,
        arrays=arrays,
        full_rank=True,
        redraw_per_sample=redraw_per_sample,
    )


def build_ls_dataset_from_channels(
    channels: ChannelDataset,
    cfg: PilotConfig,
    seed: int,
    redraw_per_sample: bool = False,
) -> LSDataset:
    """`build_ls_dataset` over a ChannelDataset, keeping its profile metadata."""
    ds = build_ls_dataset(
        channels.h_beamspace, channels.los_label, cfg, channels.arrays, seed, redraw_per_sample
    )
    ds.metadata = {
        "profile_names": channels.profile_names,
        "channel_seed": channels.seed,
        "profile_index": channels.profile_index.tolist(),
    }
    return ds


def save_ls_dataset(ds: LSDataset, path: Path) -> Path:
    """Write an LS dataset archive."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sh_dims = ("sample", "vec", "noise") if ds.per_sample_sigma else ("vec", "noise")
    dims = ("sample", "rx", "tx")
    meta = {
        "pilot": ds.pilot.model_dump(),
        "arrays": ds.arrays.model_dump(),
        "snr_db": ds.snr_db,
        "full_rank": ds.full_rank,
        "redraw_per_sample": ds.redraw_per_sample,
        "format_version": FORMAT_VERSION,
        **ds.metadata,
    }
    xds = xr.Dataset(
        {
            "hv_ls_re": (dims, ds.hv_ls.real.astype(np.float32)),
            "hv_ls_im": (dims, ds.hv_ls.imag.astype(np.float32)),
            "sigma_half_re": (sh_dims, ds.sigma_half.real.astype(np.float32)),
            "sigma_half_im": (sh_dims, ds.sigma_half.imag.astype(np.float32)),
            "los_label": (("sample",), ds.los_label.astype(np.int8)),
            # netCDF3 has no int64; seeds are < 2^32 so float64 is exact
            "triplet_seed": (("sample",), ds.triplet_seed.astype(np.float64)),
        },
        attrs={"kind": "ls", "metadata": json.dumps(meta, sort_keys=True)},
    )
    try:
        xds.to_netcdf(path, engine="scipy")
    except OSError as e:
        raise OSError(f"Failed to write LS dataset to {path}: {e}") from e
    logger.info(f"Wrote {len(ds):,} LS estimates to {path}")
    return path


def load_ls_dataset(path: Path) -> LSDataset:
    """
    Read an LS dataset archive.

    Raises:
        FileNotFoundError: If the file does not exist
        DatasetError: If the archive is not an LS dataset
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"LS dataset not found: {path}")

    with xr.open_dataset(path, engine="scipy") as xds:
        if xds.attrs.get("kind") != "ls":
            raise DatasetError(f"{path} is not an LS dataset (kind={xds.attrs.get('kind')})")
        meta = json.loads(xds.attrs["metadata"])
        hv_ls = xds["hv_ls_re"].values.astype(np.float64) + 1j * xds["hv_ls_im"].values
        sigma_half = (
            xds["sigma_half_re"].values.astype(np.float64) + 1j * xds["sigma_half_im"].values
        )
        labels = xds["los_label"].values.astype(np.int8)
        seeds = xds["triplet_seed"].values.astype(np.int64)

    reserved = ("pilot", "arrays", "snr_db", "full_rank", "redraw_per_sample", "format_version")
    return LSDataset(
        hv_ls=hv_ls,
        sigma_half=sigma_half,
        los_label=labels,
        triplet_seed=seeds,
        pilot=PilotConfig(**meta["pilot"]),
        arrays=ArrayConfig(**meta["arrays"]),
        full_rank=bool(meta["full_rank"]),
        redraw_per_sample=bool(meta["redraw_per_sample"]),
        metadata={k: v for k, v in meta.items() if k not in reserved},
    )
