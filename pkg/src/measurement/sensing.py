"""
Kronecker Sensing Matrices

vec(W^H H F S) = (S^T F^T kron W^H) vec(H)                       (spatial)
vec(W^H H F S) = ((A_T^H F S)^T kron (W^H A_R)) vec(Hv)          (beamspace)

plus rank and mutual-coherence diagnostics, and the coherence/rank study
across stream counts.

Design Principles:
- Exact Kronecker assembly (no approximations)
- Rank threshold: singular values below 1e-9 x largest are zero
- Zero columns are skipped by mutual coherence
"""

import logging
from typing import Iterable, Sequence

import numpy as np
import pandas as pd
from scipy.linalg import svdvals

from src.channel.beamspace import dft_codebook
from src.channel.schemas import ArrayConfig
from src.common.errors import InvalidDimensionError

from .pilots import sample_triplet
from .schemas import RANK_RTOL, PilotConfig, PilotTriplet, SensingMatrix

logger = logging.getLogger(__name__)


def matrix_rank(a: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """
    Numerical rank: count of singular values above rtol x the largest.

    Examples:
        >>> matrix_rank(np.eye(3))
        3
        >>> matrix_rank(np.zeros((2, 2)))
        0
    """
    s = svdvals(np.asarray(a))
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def mutual_coherence(a: np.ndarray) -> float:
    """
    Maximum normalized inner-product magnitude over pairs of distinct columns.

    Args:
        a: Matrix with at least 2 columns

    Returns:
        Coherence in [0, 1]

    Raises:
        InvalidDimensionError: If a has fewer than 2 columns

    Examples:
        >>> mutual_coherence(np.eye(4))
        0.0
        >>> mutual_coherence(np.array([[1.0, 1.0], [0.0, 0.0]]))
        1.0
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[1] < 2:
        raise InvalidDimensionError(
            f"Mutual coherence needs a matrix with >= 2 columns, got shape {a.shape}"
        )
    norms = np.linalg.norm(a, axis=0)
    keep = norms > 0
    if keep.sum() < 2:
        return 0.0
    unit = a[:, keep] / norms[keep]
    gram = np.abs(unit.conj().T @ unit)
    np.fill_diagonal(gram, 0.0)
    return float(min(gram.max(), 1.0))


def sensing_matrix(triplet: PilotTriplet) -> SensingMatrix:
    """Spatial sensing matrix A = S^T F^T kron W^H."""
    a = np.kron((triplet.f @ triplet.s).T, triplet.w.conj().T)
    return SensingMatrix(a, domain="spatial")


def beamspace_sensing_matrix(triplet: PilotTriplet, arrays: ArrayConfig) -> SensingMatrix:
    """
    Beamspace sensing matrix A_sp = (A_T^H F S)^T kron (W^H A_R).

    Raises:
        InvalidDimensionError: If the triplet does not match the arrays
    """
    if triplet.f.shape[0] != arrays.n_t or triplet.w.shape[0] != arrays.n_r:
        raise InvalidDimensionError(
            f"Triplet sized for n_t={triplet.f.shape[0]}, n_r={triplet.w.shape[0]}; "
            f"arrays are n_t={arrays.n_t}, n_r={arrays.n_r}"
        )
    a_t = dft_codebook(arrays.n_t)
    a_r = dft_codebook(arrays.n_r)
    left = (a_t.conj().T @ triplet.f @ triplet.s).T
    right = triplet.w.conj().T @ a_r
    return SensingMatrix(np.kron(left, right), domain="beamspace")


def beamspace_basis(arrays: ArrayConfig) -> np.ndarray:
    """Matrix B with vec(H) = B vec(Hv), i.e. conj(A_T) kron A_R."""
    return np.kron(dft_codebook(arrays.n_t).conj(), dft_codebook(arrays.n_r))


def to_beamspace_sensing(sensing: SensingMatrix, arrays: ArrayConfig) -> SensingMatrix:
    """Re-express a spatial sensing matrix so it acts on vec(Hv)."""
    if sensing.domain == "beamspace":
        return sensing
    return SensingMatrix(sensing.a @ beamspace_basis(arrays), domain="beamspace")


def stack_sensing(blocks: Sequence[SensingMatrix]) -> SensingMatrix:
    """Vertically stack per-transmission sensing matrices of one domain."""
    domains = {b.domain for b in blocks}
    if len(domains) != 1:
        raise ValueError(f"Cannot stack sensing matrices of mixed domains {domains}")
    return SensingMatrix(np.vstack([b.a for b in blocks]), domain=domains.pop())


def coherence_rank_study(
    n_s_values: Iterable[int],
    n_p_values: Iterable[int],
    draws: int,
    arrays: ArrayConfig,
    n_bit_t: int = 6,
    n_bit_r: int = 2,
    seed: int = 0,
) -> pd.DataFrame:
    """
    Mutual coherence and rank of single-transmission A_sp versus stream count.

    Args:
        n_s_values: Stream counts to sweep
        n_p_values: Pilot lengths to sweep
        draws: Random triplets per (n_s, n_p) point
        arrays: Array geometry
        n_bit_t: Precoder quantization bits
        n_bit_r: Combiner quantization bits
        seed: Sweep seed

    Returns:
        DataFrame with one row per draw: n_s, n_p, draw, coherence, rank, rank_bound
    """
    rows = []
    for n_p in n_p_values:
        for n_s in n_s_values:
            cfg = PilotConfig(n_s=n_s, n_p=n_p, n_bit_t=n_bit_t, n_bit_r=n_bit_r)
            cfg.check_for(arrays)
            rng = np.random.default_rng([seed, n_p, n_s])
            for draw in range(draws):
                a_sp = beamspace_sensing_matrix(sample_triplet(cfg, arrays, rng), arrays)
                rows.append({
                    "n_s": n_s,
                    "n_p": n_p,
                    "draw": draw,
                    "coherence": a_sp.coherence,
                    "rank": a_sp.rank,
                    "rank_bound": min(n_s ** 2, n_s * n_p, arrays.n_elements),
                })
        logger.info(f"Coherence/rank study done for n_p={n_p}")
    return pd.DataFrame(rows)
