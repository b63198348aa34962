"""
Beamspace Transforms

Unitary DFT codebooks and the spatial <-> beamspace change of basis
Hv = A_R^H H A_T, H = A_R Hv A_T^H.

Design Principles:
- Codebooks cached per size and returned read-only
- All transforms accept a trailing (n_r, n_t) matrix or a batch (..., n_r, n_t)
"""

from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.linalg import dft

from src.common.errors import InvalidDimensionError

from .schemas import ArrayConfig


@lru_cache(maxsize=32)
def _codebook(n: int) -> np.ndarray:
    u = dft(n, scale="sqrtn")
    u.setflags(write=False)
    return u


def dft_codebook(n: int) -> np.ndarray:
    """
    Unitary n-point DFT matrix.

    Args:
        n: Codebook size (antenna count)

    Returns:
        Complex (n, n) matrix U with U^H U = I and |U[i, j]| = 1/sqrt(n)

    Raises:
        InvalidDimensionError: If n < 1

    Examples:
        >>> dft_codebook(1)
        array([[1.+0.j]])
        >>> np.allclose(dft_codebook(2) * np.sqrt(2), [[1, 1], [1, -1]])
        True
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidDimensionError(f"Codebook size must be a positive integer, got {n}")
    return _codebook(int(n))


def steering_vectors(n: int, angles_rad: np.ndarray, spacing: float = 0.5) -> np.ndarray:
    """
    Unnormalized ULA steering vectors exp(j 2 pi spacing m sin(theta)).

    Args:
        n: Number of elements
        angles_rad: Array of angles, any shape S
        spacing: Element spacing in wavelengths

    Returns:
        Complex array of shape S + (n,) with unit-modulus entries
    """
    m = np.arange(n)
    phase = 2.0 * np.pi * spacing * np.sin(np.asarray(angles_rad))[..., None] * m
    return np.exp(1j * phase)


def _check_shape(h: np.ndarray, arrays: Optional[ArrayConfig]) -> None:
    if h.ndim < 2:
        raise InvalidDimensionError(f"Expected a matrix or batch of matrices, got shape {h.shape}")
    if arrays is not None and h.shape[-2:] != (arrays.n_r, arrays.n_t):
        raise InvalidDimensionError(
            f"Channel shape {h.shape[-2:]} does not match arrays (n_r={arrays.n_r}, n_t={arrays.n_t})"
        )


def to_beamspace(h: np.ndarray, arrays: Optional[ArrayConfig] = None) -> np.ndarray:
    """
    Spatial -> beamspace: A_R^H h A_T.

    Args:
        h: Complex (n_r, n_t) channel or (..., n_r, n_t) batch
        arrays: Optional array geometry to validate against

    Returns:
        Beamspace channel(s) with the same shape

    Raises:
        InvalidDimensionError: On dimension mismatch
    """
    h = np.asarray(h)
    _check_shape(h, arrays)
    a_r = dft_codebook(h.shape[-2])
    a_t = dft_codebook(h.shape[-1])
    return a_r.conj().T @ h @ a_t


def from_beamspace(hv: np.ndarray, arrays: Optional[ArrayConfig] = None) -> np.ndarray:
    """Beamspace -> spatial: A_R hv A_T^H (exact inverse of `to_beamspace`)."""
    hv = np.asarray(hv)
    _check_shape(hv, arrays)
    a_r = dft_codebook(hv.shape[-2])
    a_t = dft_codebook(hv.shape[-1])
    return a_r @ hv @ a_t.conj().T


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-major vectorization of the trailing two axes."""
    matrix = np.asarray(matrix)
    return np.swapaxes(matrix, -1, -2).reshape(matrix.shape[:-2] + (-1,))


def unvec(vector: np.ndarray, n_rows: int, n_cols: int) -> np.ndarray:
    """Inverse of `vec` for (n_rows, n_cols) matrices."""
    vector = np.asarray(vector)
    return np.swapaxes(vector.reshape(vector.shape[:-1] + (n_cols, n_rows)), -1, -2)
