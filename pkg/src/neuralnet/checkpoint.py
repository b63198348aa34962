"""
Network Checkpoints

A checkpoint is a `torch.save` archive holding one or more networks' state
dicts (normalizer buffers included) plus optional optimizer states, written
next to a JSON sidecar with everything a human or the CLI needs without
loading torch: specs, norm stats, config hash, iteration and metrics.

Layout:
    <stem>.pt    {"networks": {name: state_dict}, "optimizers": {name: state_dict}}
    <stem>.json  {"specs": {name: spec}, "norm_stats": {...}, "config_hash": str,
                  "iteration": int, "metrics": {...}, "format_version": 1}
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

import torch
from torch import nn

from src.channel.schemas import NormStats
from src.common.errors import IncompatibleModelError

from .networks import build_network
from .specs import spec_from_dict

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass
class CheckpointInfo:
    """Sidecar metadata of a checkpoint."""

    path: Path
    specs: Dict[str, Dict[str, Any]]
    iteration: int
    config_hash: str = ""
    norm_stats: Optional[NormStats] = None
    metrics: Dict[str, Any] = field(default_factory=dict)

    def spec(self, name: str):
        if name not in self.specs:
            raise IncompatibleModelError(
                f"Checkpoint {self.path} has no network '{name}' (available: {sorted(self.specs)})"
            )
        return spec_from_dict(self.specs[name])


def sidecar_path(path: Path) -> Path:
    return Path(path).with_suffix(".json")


def save_checkpoint(
    path: Path,
    networks: Dict[str, nn.Module],
    iteration: int,
    config_hash: str = "",
    optimizers: Optional[Dict[str, torch.optim.Optimizer]] = None,
    metrics: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Write networks (and optimizers) to `path` with a JSON sidecar.

    Networks must carry a `.spec`. Norm stats are read from the first network's
    normalizer; all networks in one checkpoint share them.

    Returns:
        Path of the .pt archive
    """
    path = Path(path).with_suffix(".pt")
    path.parent.mkdir(parents=True, exist_ok=True)

    first = next(iter(networks.values()))
    stats = first.normalizer.get_stats() if hasattr(first, "normalizer") else None

    payload = {
        "networks": {name: net.state_dict() for name, net in networks.items()},
        "optimizers": {name: opt.state_dict() for name, opt in (optimizers or {}).items()},
    }
    meta = {
        "specs": {name: net.spec.model_dump() for name, net in networks.items()},
        "norm_stats": stats.to_dict() if stats is not None else None,
        "config_hash": config_hash,
        "iteration": int(iteration),
        "metrics": metrics or {},
        "format_version": FORMAT_VERSION,
    }
    torch.save(payload, path)
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True))
    logger.debug(f"Saved checkpoint {path} at iteration {iteration}")
    return path


def read_checkpoint_info(path: Path) -> CheckpointInfo:
    """
    Read the JSON sidecar only.

    Raises:
        FileNotFoundError: If the sidecar does not exist
    """
    side = sidecar_path(path)
    if not side.exists():
        raise FileNotFoundError(f"Checkpoint metadata not found: {side}")
    meta = json.loads(side.read_text())
    stats = meta.get("norm_stats")
    return CheckpointInfo(
        path=Path(path).with_suffix(".pt"),
        specs=meta["specs"],
        iteration=int(meta["iteration"]),
        config_hash=meta.get("config_hash", ""),
        norm_stats=NormStats.from_dict(stats) if stats else None,
        metrics=meta.get("metrics", {}),
    )


def load_checkpoint(path: Path, map_location: str = "cpu") -> Dict[str, Any]:
    """
    Raw checkpoint payload {"networks": ..., "optimizers": ...}.

    Raises:
        FileNotFoundError: If the archive does not exist
    """
    path = Path(path).with_suffix(".pt")
    if not path.exists():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    return torch.load(path, map_location=map_location)


def load_network(path: Path, name: str = "generator", map_location: str = "cpu") -> nn.Module:
    """
    Rebuild one network from a checkpoint, in eval mode.

    Raises:
        FileNotFoundError: If the checkpoint is missing
        IncompatibleModelError: If the checkpoint has no network `name`
    """
    info = read_checkpoint_info(path)
    net = build_network(info.spec(name))
    payload = load_checkpoint(path, map_location)
    net.load_state_dict(payload["networks"][name])
    net.eval()
    logger.info(f"Loaded {name} from {info.path} (iteration {info.iteration})")
    return net
