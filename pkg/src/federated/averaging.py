"""
Server-side averaging of UE critic parameters.
"""

from collections import OrderedDict
from typing import Dict, Mapping, Sequence

import torch
from torch import nn

from src.common.errors import InvalidDimensionError

ParamDict = Mapping[str, torch.Tensor]


def average_critic_weights(updates: Sequence[ParamDict]) -> Dict[str, torch.Tensor]:
    """
    Element-wise mean (1/U) sum_u theta_{d,u} of U parameter sets.

    Args:
        updates: One name -> tensor mapping per UE

    Returns:
        OrderedDict of averaged tensors, in the first update's name order

    Raises:
        ValueError: If no updates are given
        InvalidDimensionError: If names or shapes differ between UEs
    """
    if not updates:
        raise ValueError("Cannot average an empty list of critic updates")
    names = list(updates[0].keys())
    avg = OrderedDict((name, torch.zeros_like(t)) for name, t in updates[0].items())
    for u, update in enumerate(updates):
        if list(update.keys()) != names:
            raise InvalidDimensionError(f"UE {u} critic has different parameter names")
        for name, t in update.items():
            if t.shape != avg[name].shape:
                raise InvalidDimensionError(
                    f"UE {u} parameter '{name}' has shape {tuple(t.shape)}, "
                    f"expected {tuple(avg[name].shape)}"
                )
            avg[name] += t.detach()
    for name in names:
        avg[name] /= len(updates)
    return avg


def critic_parameters(critic: nn.Module) -> Dict[str, torch.Tensor]:
    """Name -> parameter view of a critic (buffers excluded)."""
    return OrderedDict(critic.named_parameters())


@torch.no_grad()
def load_parameters(module: nn.Module, params: ParamDict) -> None:
    """Copy tensors into a module's parameters in place."""
    for name, p in module.named_parameters():
        p.copy_(params[name])
