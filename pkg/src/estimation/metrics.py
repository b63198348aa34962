"""
NMSE Metrics

Per-sample normalized mean square error, dB conversion with a finite floor,
test-set aggregation and iteration-curve smoothing.

Design Principles:
- Exact-zero errors report -100 dB instead of -inf
- Aggregation averages linear NMSE by default; mean-of-dB is a switch
- One convention per comparison
"""

import logging
from typing import Literal, NamedTuple, Sequence

import numpy as np
from scipy.ndimage import convolve1d
from scipy.signal.windows import hann

from src.common.errors import InvalidDimensionError

logger = logging.getLogger(__name__)

NMSE_DB_FLOOR = -100.0
SMOOTHING_WINDOW = 6

AggregationMode = Literal["linear", "db"]


class NMSE(NamedTuple):
    """Linear NMSE and its dB value."""

    linear: float
    db: float


def to_db(linear, floor: float = NMSE_DB_FLOOR):
    """
    10 log10 with a lower floor.

    Examples:
        >>> float(to_db(0.1))
        -10.0
        >>> float(to_db(0.0))
        -100.0
    """
    linear = np.asarray(linear, dtype=float)
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(linear)
    out = np.maximum(db, floor)
    return float(out) if out.ndim == 0 else out


def nmse(hv_true: np.ndarray, hv_est: np.ndarray) -> NMSE:
    """
    ||hv_true - hv_est||_F^2 / ||hv_true||_F^2.

    Works in either domain; the value is invariant under the unitary
    beamspace transform.

    Raises:
        ValueError: If hv_true is zero
        InvalidDimensionError: On shape mismatch

    Examples:
        >>> h = np.array([[1 + 1j, 2.0]])
        >>> nmse(h, 2 * h).db
        0.0
        >>> nmse(h, h).db
        -100.0
    """
    hv_true, hv_est = np.asarray(hv_true), np.asarray(hv_est)
    if hv_true.shape != hv_est.shape:
        raise InvalidDimensionError(f"Shape mismatch: true {hv_true.shape}, estimate {hv_est.shape}")
    power = float(np.sum(np.abs(hv_true) ** 2))
    if power == 0.0:
        raise ValueError("NMSE is undefined for an all-zero true channel")
    err = float(np.sum(np.abs(hv_true - hv_est) ** 2)) / power
    return NMSE(linear=err, db=to_db(err))


def batch_nmse(hv_true: np.ndarray, hv_est: np.ndarray) -> np.ndarray:
    """Linear NMSE per sample over a leading batch axis."""
    hv_true, hv_est = np.asarray(hv_true), np.asarray(hv_est)
    if hv_true.shape != hv_est.shape:
        raise InvalidDimensionError(f"Shape mismatch: true {hv_true.shape}, estimate {hv_est.shape}")
    axes = tuple(range(1, hv_true.ndim))
    power = np.sum(np.abs(hv_true) ** 2, axis=axes)
    if np.any(power == 0):
        raise ValueError("NMSE is undefined for an all-zero true channel")
    return np.sum(np.abs(hv_true - hv_est) ** 2, axis=axes) / power


def aggregate_nmse_db(values_linear: Sequence[float], mode: AggregationMode = "linear") -> float:
    """
    Test-set NMSE in dB.

    Args:
        values_linear: Per-sample linear NMSE values
        mode: "linear" -> 10 log10(mean(nmse)); "db" -> mean(10 log10(nmse))

    Examples:
        >>> round(aggregate_nmse_db([0.1, 0.001]), 2)
        -12.97
        >>> aggregate_nmse_db([0.1, 0.001], mode="db")
        -20.0
    """
    values = np.asarray(values_linear, dtype=float)
    if values.size == 0:
        raise ValueError("Cannot aggregate an empty set of NMSE values")
    if mode == "linear":
        return to_db(values.mean())
    if mode == "db":
        return float(np.mean(to_db(values)))
    raise ValueError(f"Unknown aggregation mode '{mode}'. Use 'linear' or 'db'")


def smoothing_window(size: int = SMOOTHING_WINDOW) -> np.ndarray:
    """Normalized Hanning window without its zero end points."""
    w = hann(size + 2)[1:-1]
    return w / w.sum()


def hanning_smooth(values: Sequence[float], size: int = SMOOTHING_WINDOW) -> np.ndarray:
    """
    Smooth an iteration curve with a Hanning window of the given size.

    Output has the input's length; edges are extended with the end values.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return values
    return convolve1d(values, smoothing_window(size), mode="nearest")
