"""
Critic and Generator Updates

One optimizer step for each player of the Wasserstein game:

    critic:    L(theta_d) = mean D(x_G) - mean D(x_r) + beta 1_GP mean (||grad D(x_hat)||_2 - 1)^2
    generator: L(theta_g) = -mean D(x_G)

Design Principles:
- Exactly one Lipschitz mechanism: clipping to [-tau, tau] after the step,
  or the gradient penalty inside the loss
- A generator step never changes critic parameters, and vice versa
- A non-finite loss aborts with TrainingDivergedError before any parameter moves
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import torch
from torch import nn

from src.common.errors import TrainingDivergedError
from src.neuralnet.networks import clip_parameters

from .config import TrainConfig

logger = logging.getLogger(__name__)

CriticFn = Callable[..., torch.Tensor]


@dataclass
class StepResult:
    """Scalar diagnostics of one update."""

    loss: float
    wasserstein: float = 0.0
    gp: float = 0.0


def make_rmsprop(params: Iterable[nn.Parameter], cfg: TrainConfig) -> torch.optim.RMSprop:
    """RMSprop with the configured rate, decay 0.99 and epsilon 1e-8."""
    return torch.optim.RMSprop(params, lr=cfg.gamma, alpha=cfg.rms_alpha, eps=cfg.rms_eps)


def reset_optimizer(optimizer: torch.optim.Optimizer) -> None:
    """Drop all accumulated per-parameter state (squared-gradient averages)."""
    optimizer.state.clear()


def _check_finite(loss: torch.Tensor, what: str, iteration: int) -> None:
    if not torch.isfinite(loss):
        raise TrainingDivergedError(f"{what} loss became {loss.item()}", iteration)


def gradient_penalty(
    critic: CriticFn,
    x_hat: torch.Tensor,
    chi: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    mean over the batch of (||dD/dx_hat||_2 - 1)^2.

    The gradient is taken with respect to x_hat only, also for conditional
    critics. The graph is kept so the penalty can be backpropagated.

    Args:
        critic: Critic module or any differentiable callable (x[, chi]) -> (B,)
        x_hat: Interpolated inputs (B, ...)
        chi: Conditions for a conditional critic

    Returns:
        Scalar tensor
    """
    x_hat = x_hat.detach().requires_grad_(True)
    scores = critic(x_hat) if chi is None else critic(x_hat, chi)
    (grad,) = torch.autograd.grad(
        outputs=scores,
        inputs=x_hat,
        grad_outputs=torch.ones_like(scores),
        create_graph=True,
        retain_graph=True,
    )
    norms = grad.reshape(grad.shape[0], -1).norm(2, dim=1)
    return ((norms - 1.0) ** 2).mean()


def critic_loss(
    critic: nn.Module,
    x_gen: torch.Tensor,
    x_real: torch.Tensor,
    x_mix: Optional[torch.Tensor],
    cfg: TrainConfig,
    chi_gen: Optional[torch.Tensor] = None,
    chi_real: Optional[torch.Tensor] = None,
):
    """L(theta_d) and its parts (loss, wasserstein term, gp term)."""
    d_gen = critic(x_gen) if chi_gen is None else critic(x_gen, chi_gen)
    d_real = critic(x_real) if chi_real is None else critic(x_real, chi_real)
    wasserstein = d_gen.mean() - d_real.mean()
    if cfg.use_gp:
        if x_mix is None:
            raise ValueError("Gradient penalty mode needs the interpolated batch x_mix")
        gp = gradient_penalty(critic, x_mix, chi_real)
        return wasserstein + cfg.beta * gp, wasserstein, gp
    return wasserstein, wasserstein, torch.zeros((), device=wasserstein.device)


def update_critic(
    critic: nn.Module,
    optimizer: torch.optim.Optimizer,
    x_gen: torch.Tensor,
    x_real: torch.Tensor,
    x_mix: Optional[torch.Tensor],
    cfg: TrainConfig,
    chi_gen: Optional[torch.Tensor] = None,
    chi_real: Optional[torch.Tensor] = None,
    iteration: int = 0,
) -> StepResult:
    """
    One RMSprop step on L(theta_d); clips parameters into [-tau, tau] when not in GP mode.

    Args:
        critic: Critic to update (the generator is not touched)
        optimizer: Optimizer over the critic's parameters
        x_gen: Generated batch (already detached, noise included for Pilot GAN)
        x_real: Real batch
        x_mix: eps x_real + (1 - eps) x_gen (GP mode only)
        cfg: Training configuration
        chi_gen / chi_real: Conditions for a conditional critic; chi_real also
            accompanies x_mix
        iteration: Outer iteration, for diagnostics

    Raises:
        TrainingDivergedError: If the loss is NaN or infinite
    """
    optimizer.zero_grad()
    loss, wasserstein, gp = critic_loss(
        critic, x_gen.detach(), x_real, x_mix, cfg, chi_gen, chi_real
    )
    _check_finite(loss, "Critic", iteration)
    loss.backward()
    optimizer.step()
    if not cfg.use_gp:
        clip_parameters(critic, cfg.tau)
    return StepResult(loss=loss.item(), wasserstein=wasserstein.item(), gp=gp.item())


def update_generator(
    generator: nn.Module,
    critic: nn.Module,
    optimizer: torch.optim.Optimizer,
    z: torch.Tensor,
    cfg: TrainConfig,
    chi: Optional[torch.Tensor] = None,
    noise: Optional[torch.Tensor] = None,
    iteration: int = 0,
) -> StepResult:
    """
    One RMSprop step on L(theta_g) = -mean D(G(z[, chi]) + noise).

    Critic parameters are frozen for the step and restored afterwards. `cfg`
    is accepted for symmetry with update_critic; no field affects this step.

    Raises:
        TrainingDivergedError: If the loss is NaN or infinite
    """
    flags = [p.requires_grad for p in critic.parameters()]
    for p in critic.parameters():
        p.requires_grad_(False)
    try:
        optimizer.zero_grad()
        x_gen = generator(z, chi)
        if noise is not None:
            x_gen = x_gen + noise
        scores = critic(x_gen) if chi is None else critic(x_gen, chi)
        loss = -scores.mean()
        _check_finite(loss, "Generator", iteration)
        loss.backward()
        optimizer.step()
    finally:
        for p, flag in zip(critic.parameters(), flags):
            p.requires_grad_(flag)
    return StepResult(loss=loss.item())
