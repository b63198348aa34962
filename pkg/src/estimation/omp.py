"""
Orthogonal Matching Pursuit baseline.

Greedy support selection by maximum normalized correlation with the residual,
pseudo-inverse refit on the whole support every step, stopping once the
residual energy falls below sigma^2 or after `max_iters` steps.
"""

import logging
import time
from typing import Optional

import numpy as np
from scipy.linalg import pinv

from src.channel.beamspace import unvec
from src.common.errors import InvalidDimensionError

from .metrics import nmse
from .schemas import EstimationResult

logger = logging.getLogger(__name__)

MAX_OMP_ITERATIONS = 200


def omp(
    y: np.ndarray,
    a_sp,
    sigma: float,
    max_iters: int = MAX_OMP_ITERATIONS,
    shape: Optional[tuple] = None,
    hv_true: Optional[np.ndarray] = None,
) -> EstimationResult:
    """
    Sparse beamspace estimate via OMP.

    Args:
        y: Complex measurements (M,)
        a_sp: Beamspace sensing matrix (M, n) or SensingMatrix
        sigma: Noise standard deviation; stop when ||r||^2 < sigma^2
        max_iters: Iteration cap
        shape: (n_r, n_t) to reshape the vec estimate into; defaults to
            hv_true's shape, else a flat (n,) vector
        hv_true: Optional true channel to fill nmse_db

    Returns:
        EstimationResult; extra["support"] lists the selected columns and
        extra["residual_history"] the residual norm after each step
    """
    start = time.perf_counter()
    y = np.asarray(y)
    a = np.asarray(getattr(a_sp, "a", a_sp))
    if y.ndim != 1 or a.shape[0] != y.shape[0]:
        raise InvalidDimensionError(f"Measurement shape {y.shape} does not fit sensing {a.shape}")
    n = a.shape[1]
    if shape is None and hv_true is not None:
        shape = np.asarray(hv_true).shape

    col_norms = np.linalg.norm(a, axis=0)
    col_norms = np.where(col_norms > 0, col_norms, np.inf)

    x = np.zeros(n, dtype=complex)
    residual = y.astype(complex)
    support: list = []
    history = [float(np.linalg.norm(residual))]
    threshold = sigma ** 2

    iterations = 0
    while iterations < max_iters and np.sum(np.abs(residual) ** 2) >= threshold:
        corr = np.abs(a.conj().T @ residual) / col_norms
        corr[support] = 0.0
        j = int(np.argmax(corr))
        if corr[j] == 0.0:
            break
        support.append(j)
        coeffs = pinv(a[:, support]) @ y
        residual = y - a[:, support] @ coeffs
        iterations += 1
        history.append(float(np.linalg.norm(residual)))

    if support:
        x[support] = coeffs

    if shape is not None:
        hv_est = unvec(x, shape[0], shape[1])
    else:
        hv_est = x

    return EstimationResult(
        hv_est=hv_est,
        method="OMP",
        nmse_db=nmse(hv_true, hv_est).db if hv_true is not None else float("nan"),
        residual_norm=history[-1],
        iterations_used=iterations,
        wall_ms=(time.perf_counter() - start) * 1e3,
        extra={"support": support, "residual_history": history},
    )
