"""
Forward Evaluations

Functional entry points over the network modules. Each call runs the network
in evaluation mode (running BatchNorm statistics, no dropout) and restores the
previous mode afterwards, so results are deterministic given inputs and
parameters.

Single inputs return single outputs; leading batch axes are preserved.
"""

from contextlib import contextmanager
from typing import Iterator, Optional, Tuple, Union

import numpy as np
import torch
from torch import nn

from src.common.errors import IncompatibleModelError, InvalidDimensionError

from .networks import Critic, Generator, LOSPredictor, check_condition

ConditionLike = Union[int, np.ndarray, torch.Tensor, None]


@contextmanager
def evaluation_mode(net: nn.Module) -> Iterator[nn.Module]:
    """Temporarily switch a module to eval mode."""
    was_training = net.training
    net.eval()
    try:
        yield net
    finally:
        net.train(was_training)


def _as_condition(chi: ConditionLike, batch: int) -> Optional[torch.Tensor]:
    if chi is None:
        return None
    chi = check_condition(torch.as_tensor(chi))
    if chi.numel() == 1 and batch > 1:
        chi = chi.expand(batch)
    if chi.numel() != batch:
        raise InvalidDimensionError(f"Got {chi.numel()} conditions for a batch of {batch}")
    return chi


def _check_condition_use(net: nn.Module, chi: ConditionLike) -> None:
    if net.conditional and chi is None:
        raise IncompatibleModelError(f"{type(net).__name__} is conditional; chi is required")
    if not net.conditional and chi is not None:
        raise IncompatibleModelError(f"{type(net).__name__} is unconditional; chi must be omitted")


def generator_forward(
    z: torch.Tensor,
    chi: ConditionLike,
    generator: Generator,
) -> torch.Tensor:
    """
    G(z[, chi]) with SN^-1 applied: the unnormalized complex channel.

    Args:
        z: Latent vector (d,) or batch (B, d)
        chi: Binary condition (scalar or (B,)); must be None for unconditional G
        generator: Generator module

    Returns:
        Complex (n_r, n_t) or (B, n_r, n_t)

    Raises:
        IncompatibleModelError: If chi presence does not match the generator
    """
    _check_condition_use(generator, chi)
    single = z.dim() == 1
    zb = z.unsqueeze(0) if single else z
    with evaluation_mode(generator):
        out = generator.generate(zb, _as_condition(chi, zb.shape[0]))
    return out[0] if single else out


def critic_forward(
    x: torch.Tensor,
    chi: ConditionLike,
    critic: Critic,
) -> torch.Tensor:
    """
    D(x[, chi]) in evaluation mode.

    Args:
        x: Normalized real (2, n_t, n_r) / (B, 2, n_t, n_r), or complex
            beamspace (n_r, n_t) / (B, n_r, n_t) which is normalized first
        chi: Binary condition for a conditional critic
        critic: Critic module

    Returns:
        Real scalar tensor, or (B,)

    Raises:
        InvalidDimensionError: On shape mismatch
        IncompatibleModelError: If chi presence does not match the critic
    """
    _check_condition_use(critic, chi)
    single = x.dim() == (2 if x.is_complex() else 3)
    xb = x.unsqueeze(0) if single else x
    with evaluation_mode(critic):
        out = critic(xb, _as_condition(chi, xb.shape[0]))
    return out[0] if single else out


def los_forward(hv_ls: torch.Tensor, predictor: LOSPredictor) -> torch.Tensor:
    """
    P(LOS) for beamspace LS estimate(s).

    Args:
        hv_ls: Complex (n_r, n_t) or (B, n_r, n_t)
        predictor: LOS predictor module

    Returns:
        Probabilities in (0, 1): scalar tensor or (B,)
    """
    single = hv_ls.dim() == 2
    xb = hv_ls.unsqueeze(0) if single else hv_ls
    with evaluation_mode(predictor):
        out = predictor(xb)
    return out[0] if single else out


def embed_condition(
    chi: ConditionLike,
    target_shape: Tuple[int, int],
    net: Union[Generator, Critic],
) -> torch.Tensor:
    """
    Condition feature map (B, 1, h, w) from a conditional network's embedding path.

    Raises:
        ValueError: If chi is outside {0, 1}
        IncompatibleModelError: If the network is unconditional or its
            embedding targets a different shape
    """
    if not getattr(net, "conditional", False):
        raise IncompatibleModelError(f"{type(net).__name__} has no condition embedding")
    if tuple(target_shape) != net.condition.target_shape:
        raise IncompatibleModelError(
            f"Embedding targets {net.condition.target_shape}, requested {tuple(target_shape)}"
        )
    chi = check_condition(torch.as_tensor(chi))
    return net.condition(chi)
