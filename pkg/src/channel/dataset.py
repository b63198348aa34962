"""
Channel Dataset Archives

Balanced multi-profile channel datasets and their netCDF persistence.

Archive layout (format_version 1), one xarray.Dataset written with the scipy
netCDF3 engine (deterministic bytes for identical content):
    h_spatial_re, h_spatial_im, h_beamspace_re, h_beamspace_im : float32 (sample, rx, tx)
    los_label                                                  : int8    (sample,)
    profile_index                                              : int16   (sample,)
    attrs["kind"] = "channel", attrs["metadata"] = JSON record

Design Principles:
- Archive contents are a pure function of (profiles, arrays, n_per_profile, seed)
- Metadata travels with the arrays
- Fail fast on the wrong kind of archive
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence

import numpy as np
import xarray as xr

from src.common.errors import DatasetError

from .beamspace import to_beamspace
from .schemas import ArrayConfig, ChannelProfile, ChannelRealization
from .simulator import draw_profile_channels

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
GENERATOR_VERSION = "geometric-cluster-1"


@dataclass
class ChannelDataset:
    """In-memory channel dataset (spatial + beamspace + LOS labels)."""

    h_spatial: np.ndarray
    h_beamspace: np.ndarray
    los_label: np.ndarray
    profile_index: np.ndarray
    profile_names: List[str]
    arrays: ArrayConfig
    seed: int
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.h_beamspace.shape[0])

    def __getitem__(self, i: int) -> ChannelRealization:
        return ChannelRealization(
            h_spatial=self.h_spatial[i],
            h_beamspace=self.h_beamspace[i],
            los_label=int(self.los_label[i]),
        )

    def subset(self, indices: np.ndarray) -> "ChannelDataset":
        """Dataset restricted to the given sample indices."""
        return ChannelDataset(
            h_spatial=self.h_spatial[indices],
            h_beamspace=self.h_beamspace[indices],
            los_label=self.los_label[indices],
            profile_index=self.profile_index[indices],
            profile_names=list(self.profile_names),
            arrays=self.arrays,
            seed=self.seed,
            metadata=dict(self.metadata),
        )

    def for_profile(self, name: str) -> "ChannelDataset":
        """Samples drawn from one named profile."""
        if name not in self.profile_names:
            raise ValueError(f"Profile '{name}' not in dataset ({self.profile_names})")
        return self.subset(np.flatnonzero(self.profile_index == self.profile_names.index(name)))

    def balanced_subset(self, n: int, seed: int) -> "ChannelDataset":
        """Seeded subset of at most n samples, spread as evenly over profiles as the data allow."""
        return self.subset(stratified_indices(self.profile_index, n, seed))


def stratified_indices(profile_index: np.ndarray, n: int, seed: int) -> np.ndarray:
    """
    Pick min(n, len) sample indices spread evenly over the profiles.

    Each profile's samples are shuffled with the seed and taken round-robin, so
    no profile is left out while n >= the number of profiles.

    Returns:
        Sorted int index array
    """
    profile_index = np.asarray(profile_index)
    if n < 1:
        raise ValueError(f"Subset size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    pools = [rng.permutation(np.flatnonzero(profile_index == p)) for p in np.unique(profile_index)]
    depth = max((len(pool) for pool in pools), default=0)
    order = [pool[r] for r in range(depth) for pool in pools if r < len(pool)]
    return np.sort(np.asarray(order[:n], dtype=int))


def generate_channel_dataset(
    profiles: Sequence[ChannelProfile],
    arrays: ArrayConfig,
    n_per_profile: int,
    seed: int,
) -> ChannelDataset:
    """
    Generate a dataset with an equal number of realizations of every profile.

    Args:
        profiles: Profiles to draw from
        arrays: Array geometry
        n_per_profile: Realizations per profile
        seed: Dataset seed

    Returns:
        ChannelDataset with len(profiles) * n_per_profile samples
    """
    if not profiles:
        raise ValueError("At least one channel profile is required")

    h, labels, index = draw_profile_channels(profiles, arrays, n_per_profile, seed)
    hv = to_beamspace(h)

    logger.info(
        f"Generated {len(hv):,} channels ({n_per_profile} x {[p.name for p in profiles]}) "
        f"at n_t={arrays.n_t}, n_r={arrays.n_r}"
    )

    return ChannelDataset(
        h_spatial=h,
        h_beamspace=hv,
        los_label=labels,
        profile_index=index,
        profile_names=[p.name for p in profiles],
        arrays=arrays,
        seed=seed,
        metadata={
            "profiles": [p.model_dump() for p in profiles],
            "n_per_profile": n_per_profile,
        },
    )


def _metadata_record(ds: ChannelDataset) -> Dict[str, Any]:
    return {
        "profile_names": ds.profile_names,
        "arrays": ds.arrays.model_dump(),
        "seed": ds.seed,
        "generator_version": GENERATOR_VERSION,
        "format_version": FORMAT_VERSION,
        **ds.metadata,
    }


def save_channel_dataset(ds: ChannelDataset, path: Path) -> Path:
    """
    Write a channel dataset archive.

    Raises:
        OSError: If the file cannot be written (path included in the message)
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dims = ("sample", "rx", "tx")
    xds = xr.Dataset(
        {
            "h_spatial_re": (dims, ds.h_spatial.real.astype(np.float32)),
            "h_spatial_im": (dims, ds.h_spatial.imag.astype(np.float32)),
            "h_beamspace_re": (dims, ds.h_beamspace.real.astype(np.float32)),
            "h_beamspace_im": (dims, ds.h_beamspace.imag.astype(np.float32)),
            "los_label": (("sample",), ds.los_label.astype(np.int8)),
            "profile_index": (("sample",), ds.profile_index.astype(np.int16)),
        },
        attrs={"kind": "channel", "metadata": json.dumps(_metadata_record(ds), sort_keys=True)},
    )
    try:
        xds.to_netcdf(path, engine="scipy")
    except OSError as e:
        raise OSError(f"Failed to write channel dataset to {path}: {e}") from e
    logger.info(f"Wrote {len(ds):,} channels to {path}")
    return path


def load_channel_dataset(path: Path) -> ChannelDataset:
    """
    Read a channel dataset archive written by `save_channel_dataset`.

    Raises:
        FileNotFoundError: If the file does not exist
        DatasetError: If the archive is not a channel dataset
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Channel dataset not found: {path}")

    with xr.open_dataset(path, engine="scipy") as xds:
        if xds.attrs.get("kind") != "channel":
            raise DatasetError(f"{path} is not a channel dataset (kind={xds.attrs.get('kind')})")
        meta = json.loads(xds.attrs["metadata"])
        h = xds["h_spatial_re"].values.astype(np.float64) + 1j * xds["h_spatial_im"].values
        hv = xds["h_beamspace_re"].values.astype(np.float64) + 1j * xds["h_beamspace_im"].values
        labels = xds["los_label"].values.astype(np.int8)
        index = xds["profile_index"].values.astype(np.int16)

    extra = {
        k: v for k, v in meta.items()
        if k not in ("profile_names", "arrays", "seed", "generator_version", "format_version")
    }
    return ChannelDataset(
        h_spatial=h,
        h_beamspace=hv,
        los_label=labels,
        profile_index=index,
        profile_names=list(meta["profile_names"]),
        arrays=ArrayConfig(**meta["arrays"]),
        seed=int(meta["seed"]),
        metadata=extra,
    )
