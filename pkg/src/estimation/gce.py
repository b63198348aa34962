"""
Generative Channel Estimation (GCE)

Recovers a beamspace channel from compressive pilots by searching the latent
space of a trained generator:

    z* = argmin_z ||y - A_sp vec(G(z))||^2 + lambda_reg ||z||^2,   Hv_est = G(z*)

Design Principles:
- Adam on z, a fixed number of steps per restart regardless of SNR
- Restarts and test samples run as one batch; Adam is element-wise, so every
  (sample, restart) trajectory is identical to a standalone run
- The generator runs in eval mode and its parameters are never updated
- The recorded objective is recomputed in float64 from the returned estimate
"""

import logging
import time
from typing import List, Optional, Union

import numpy as np
import torch

from src.channel.beamspace import vec
from src.common.errors import IncompatibleModelError, InvalidDimensionError
from src.common.seeding import make_torch_generator
from src.measurement.schemas import SensingMatrix
from src.neuralnet.forward import evaluation_mode
from src.neuralnet.networks import Generator

from .metrics import batch_nmse, to_db
from .schemas import EstimationResult, GCEConfig

logger = logging.getLogger(__name__)

SensingLike = Union[SensingMatrix, np.ndarray]


def _matrix(a_sp: SensingLike) -> np.ndarray:
    return np.asarray(getattr(a_sp, "a", a_sp))


def _complex_dtype(generator: Generator) -> torch.dtype:
    real = next(generator.parameters()).dtype
    return torch.complex128 if real == torch.float64 else torch.complex64


def _check_dims(y: np.ndarray, a: np.ndarray, generator: Generator) -> None:
    n_elements = generator.spec.n_t * generator.spec.n_r
    if a.ndim != 2 or a.shape[1] != n_elements:
        raise InvalidDimensionError(
            f"Sensing matrix shape {a.shape} does not act on n_t * n_r = {n_elements} entries"
        )
    if y.shape[-1] != a.shape[0]:
        raise InvalidDimensionError(
            f"Measurement length {y.shape[-1]} does not match sensing matrix rows {a.shape[0]}"
        )


def gce_objective(
    z: torch.Tensor,
    y: torch.Tensor,
    a_sp: torch.Tensor,
    generator: Generator,
    lambda_reg: float,
    chi: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """
    Per-row GCE objective ||y - A vec(SN^-1(G(z)))||^2 + lambda ||z||^2.

    Args:
        z: Latent batch (B, d)
        y: Measurements (B, M) or (M,), complex
        a_sp: Beamspace sensing matrix (M, n_t n_r), complex
        generator: Generator (mode left to the caller)
        lambda_reg: Regularization weight
        chi: Conditions (B,) for a conditional generator

    Returns:
        Real (B,) tensor, differentiable in z
    """
    hv = generator.generate(z, chi)
    v = hv.transpose(-1, -2).reshape(hv.shape[0], -1)
    residual = y - v @ a_sp.T
    return (residual.abs() ** 2).sum(-1) + lambda_reg * (z ** 2).sum(-1)


def gce_batch(
    y: np.ndarray,
    a_sp: SensingLike,
    generator: Generator,
    cfg: GCEConfig = GCEConfig(),
    chi: Optional[Union[int, np.ndarray]] = None,
    hv_true: Optional[np.ndarray] = None,
) -> List[EstimationResult]:
    """
    GCE for a batch of measurement vectors sharing one sensing matrix.

    Args:
        y: Complex measurements (N, M)
        a_sp: Beamspace sensing matrix (M, n_t n_r)
        generator: Trained generator with its norm stats loaded
        cfg: GCE settings
        chi: Condition (scalar or (N,)) for a conditional generator
        hv_true: Optional true channels (N, n_r, n_t) to fill nmse_db

    Returns:
        One EstimationResult per row of y

    Raises:
        InvalidDimensionError: If y and a_sp do not fit together or the generator
        IncompatibleModelError: If chi presence does not match the generator
    """
    start = time.perf_counter()
    y = np.atleast_2d(np.asarray(y))
    a = _matrix(a_sp)
    _check_dims(y, a, generator)
    if generator.conditional and chi is None:
        raise IncompatibleModelError("Conditional generator needs chi; use gce_conditional")
    if not generator.conditional and chi is not None:
        raise IncompatibleModelError("Unconditional generator does not take chi")

    n, r, d = y.shape[0], cfg.restarts, generator.latent_dim
    device = next(generator.parameters()).device
    real_dtype = next(generator.parameters()).dtype
    cdtype = _complex_dtype(generator)

    y_t = torch.as_tensor(y, dtype=cdtype, device=device).repeat_interleave(r, dim=0)
    a_t = torch.as_tensor(a, dtype=cdtype, device=device)
    chi_t = None
    if chi is not None:
        chi_t = torch.as_tensor(np.broadcast_to(np.asarray(chi), (n,)).copy(), device=device)
        chi_t = chi_t.long().repeat_interleave(r, dim=0)

    gen = make_torch_generator(cfg.seed)
    z0 = torch.randn((n * r, d), generator=gen, dtype=real_dtype).to(device)
    z = z0.clone().requires_grad_(True)
    opt = torch.optim.Adam([z], lr=cfg.step_size)

    with evaluation_mode(generator):
        for _ in range(cfg.iterations):
            opt.zero_grad()
            loss = gce_objective(z, y_t, a_t, generator, cfg.lambda_reg, chi_t).sum()
            (z.grad,) = torch.autograd.grad(loss, z)
            opt.step()
        with torch.no_grad():
            hv_all = generator.generate(z.detach(), chi_t)

    hv_np = hv_all.detach().cpu().numpy().astype(np.complex128).reshape(n, r, *hv_all.shape[1:])
    z_np = z.detach().cpu().numpy().astype(np.float64).reshape(n, r, d)
    residual = np.repeat(y, r, axis=0).reshape(n, r, -1) - vec(hv_np) @ a.T
    residual_sq = np.sum(np.abs(residual) ** 2, axis=-1)
    objectives = residual_sq + cfg.lambda_reg * np.sum(z_np ** 2, axis=-1)
    best = np.argmin(objectives, axis=1)

    idx = np.arange(n)
    hv_best = hv_np[idx, best]
    nmse_db = (
        to_db(batch_nmse(hv_true, hv_best)) if hv_true is not None else np.full(n, np.nan)
    )
    wall_ms = (time.perf_counter() - start) * 1e3 / n
    method = "GCE-conditional" if generator.conditional else "GCE"
    chis = None if chi is None else np.broadcast_to(np.asarray(chi), (n,))

    results = [
        EstimationResult(
            hv_est=hv_best[i],
            method=method,
            nmse_db=float(np.atleast_1d(nmse_db)[i]),
            residual_norm=float(np.sqrt(residual_sq[i, best[i]])),
            iterations_used=cfg.iterations,
            z_star=z_np[i, best[i]],
            chi_star=None if chis is None else int(chis[i]),
            objective=float(objectives[i, best[i]]),
            wall_ms=wall_ms,
            extra={"restart_objectives": objectives[i].tolist()},
        )
        for i in range(n)
    ]
    logger.debug(f"GCE on {n} samples x {r} restarts x {cfg.iterations} steps in {wall_ms * n:.0f} ms")
    return results


def gce(
    y: np.ndarray,
    a_sp: SensingLike,
    generator: Generator,
    cfg: GCEConfig = GCEConfig(),
    chi: Optional[int] = None,
    hv_true: Optional[np.ndarray] = None,
) -> EstimationResult:
    """
    Estimate one channel with GCE.

    Args:
        y: Complex measurement vector (M,)
        a_sp: Beamspace sensing matrix (M, n_t n_r), typically compressive
        generator: Trained generator
        cfg: GCE settings (step size 0.1, lambda 1e-3, 100 steps, 3 restarts)
        chi: Fixed condition for a conditional generator
        hv_true: Optional true channel (n_r, n_t) to fill nmse_db

    Returns:
        EstimationResult with hv_est = G(z*) and the lowest final objective

    Raises:
        InvalidDimensionError: If y does not match a_sp
    """
    y = np.asarray(y)
    if y.ndim != 1:
        raise InvalidDimensionError(f"Expected a measurement vector, got shape {y.shape}")
    truth = None if hv_true is None else np.asarray(hv_true)[None]
    return gce_batch(y[None], a_sp, generator, cfg, chi, truth)[0]


def _pick_condition(r0: EstimationResult, r1: EstimationResult) -> EstimationResult:
    chosen = r1 if r1.objective < r0.objective else r0
    chosen.method = "GCE-conditional"
    chosen.extra["branch_objectives"] = [r0.objective, r1.objective]
    if r0.objective == r1.objective:
        logger.debug("Conditional GCE objectives tied; chose chi=0")
    return chosen


def gce_conditional_batch(
    y: np.ndarray,
    a_sp: SensingLike,
    generator: Generator,
    cfg: GCEConfig = GCEConfig(),
    hv_true: Optional[np.ndarray] = None,
) -> List[EstimationResult]:
    """Batched `gce_conditional`: one GCE pass per chi, per-sample selection."""
    if not generator.conditional:
        raise IncompatibleModelError(
            "Conditional GCE requires a conditional generator checkpoint"
        )
    y = np.atleast_2d(np.asarray(y))
    n = y.shape[0]
    branch0 = gce_batch(y, a_sp, generator, cfg, np.zeros(n, dtype=int), hv_true)
    branch1 = gce_batch(y, a_sp, generator, cfg, np.ones(n, dtype=int), hv_true)
    return [_pick_condition(r0, r1) for r0, r1 in zip(branch0, branch1)]


def gce_conditional(
    y: np.ndarray,
    a_sp: SensingLike,
    generator: Generator,
    cfg: GCEConfig = GCEConfig(),
    hv_true: Optional[np.ndarray] = None,
) -> EstimationResult:
    """
    GCE over both conditions, keeping the lower objective.

    The LOS predictor is not used at inference. Equal objectives resolve to chi = 0.

    Raises:
        IncompatibleModelError: If the generator is unconditional
    """
    y = np.asarray(y)
    if y.ndim != 1:
        raise InvalidDimensionError(f"Expected a measurement vector, got shape {y.shape}")
    truth = None if hv_true is None else np.asarray(hv_true)[None]
    return gce_conditional_batch(y[None], a_sp, generator, cfg, truth)[0]
