"""
Beamspace Normalization (SN / SN^-1)

Element-wise normalization of beamspace channels into real (2, n_t, n_r) tensors:
channel 0 holds (Re(Hv^T) - Re(mu)) / sigma_re, channel 1 the imaginary analogue.

Design Principles:
- One mu / sigma per (i, j) entry, computed over the training dataset
- Standard deviations floored at 1e-6 for never-excited entries
- Exact inverse pair; batches (..., n_r, n_t) supported
"""

import logging
from typing import Sequence, Union

import numpy as np

from src.common.errors import InvalidDimensionError

from .schemas import SIGMA_FLOOR, NormStats

logger = logging.getLogger(__name__)


def compute_norm_stats(
    dataset: Union[np.ndarray, Sequence[np.ndarray]],
    floor: float = SIGMA_FLOOR,
) -> NormStats:
    """
    Compute element-wise normalization statistics over beamspace matrices.

    Args:
        dataset: Complex array (N, n_r, n_t) or sequence of (n_r, n_t) matrices
        floor: Lower bound applied to the standard deviations

    Returns:
        NormStats with (n_t, n_r) arrays

    Raises:
        ValueError: If the dataset is empty

    Examples:
        >>> m = np.array([[1 + 2j, -3j]])
        >>> stats = compute_norm_stats(np.stack([m, -m]))
        >>> stats.sigma_re.ravel().tolist()
        [1.0, 1e-06]
    """
    data = np.asarray(dataset)
    if data.size == 0 or data.ndim != 3 or data.shape[0] == 0:
        raise ValueError("Cannot compute normalization statistics of an empty dataset")

    mu = data.mean(axis=0)
    sigma_re = data.real.std(axis=0)
    sigma_im = data.imag.std(axis=0)

    n_floored = int((sigma_re < floor).sum() + (sigma_im < floor).sum())
    if n_floored:
        logger.debug(f"Flooring {n_floored} standard deviations at {floor}")

    return NormStats(
        mu=mu.T.copy(),
        sigma_re=np.maximum(sigma_re, floor).T.copy(),
        sigma_im=np.maximum(sigma_im, floor).T.copy(),
    )


def _check(shape: tuple, stats: NormStats) -> None:
    n_t, n_r = stats.shape
    if shape != (n_r, n_t):
        raise InvalidDimensionError(
            f"Beamspace shape {shape} does not match normalization stats for (n_r={n_r}, n_t={n_t})"
        )


def stack_normalize(hv: np.ndarray, stats: NormStats) -> np.ndarray:
    """
    SN: complex (..., n_r, n_t) -> real (..., 2, n_t, n_r).

    Raises:
        InvalidDimensionError: On shape mismatch with the statistics
    """
    hv = np.asarray(hv)
    _check(hv.shape[-2:], stats)
    hv_t = np.swapaxes(hv, -1, -2)
    re = (hv_t.real - stats.mu.real) / stats.sigma_re
    im = (hv_t.imag - stats.mu.imag) / stats.sigma_im
    return np.stack([re, im], axis=-3)


def unstack_unnormalize(x: np.ndarray, stats: NormStats) -> np.ndarray:
    """
    SN^-1: real (..., 2, n_t, n_r) -> complex (..., n_r, n_t).

    Raises:
        InvalidDimensionError: On shape mismatch with the statistics
    """
    x = np.asarray(x)
    if x.ndim < 3 or x.shape[-3] != 2 or x.shape[-2:] != stats.shape:
        raise InvalidDimensionError(
            f"Expected (..., 2, {stats.shape[0]}, {stats.shape[1]}) tensor, got {x.shape}"
        )
    re = x[..., 0, :, :] * stats.sigma_re + stats.mu.real
    im = x[..., 1, :, :] * stats.sigma_im + stats.mu.imag
    return np.swapaxes(re + 1j * im, -1, -2)
