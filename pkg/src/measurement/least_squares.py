"""
Stacked Least-Squares Channel Estimation

K consecutive pilot transmissions over a block-fading channel are stacked into

    y = A[1:K] vec(H) + diag(I_Np kron W[i]^H) vec(N)

and, when A[1:K] has full rank n_t * n_r, inverted to the beamspace LS estimate

    vec(Hv_LS) = (A_T^T kron A_R^H) pinv(A[1:K]) y = vec(Hv) + zeta
    zeta       = Sigma^(1/2) vec(N),
    Sigma^(1/2) = (A_T^T kron A_R^H) pinv(A[1:K]) diag(I_Np kron W[i]^H)

Design Principles:
- Full-rank triplet blocks are resampled (max 20 attempts) via tenacity
- Sigma^(1/2) is kept as the explicit product above; no re-factorization
- `LSOperator` precomputes pinv once so datasets reuse it across samples
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.linalg import block_diag, pinv
from tenacity import after_log, retry, retry_if_exception_type, stop_after_attempt

from src.channel.beamspace import dft_codebook, unvec, vec
from src.channel.schemas import ArrayConfig
from src.common.errors import ConfigurationError, InvalidDimensionError, RankDeficiencyError

from .pilots import complex_normal, snr_to_noise_std, sample_triplet
from .schemas import LSEstimate, PilotConfig, PilotTriplet, SensingMatrix
from .sensing import sensing_matrix, stack_sensing, to_beamspace_sensing

logger = logging.getLogger(__name__)

MAX_FULL_RANK_ATTEMPTS = 20


class StackedMeasurement(NamedTuple):
    """Result of `stack_measurements` (unpackable as a 4-tuple)."""

    y: np.ndarray  # (k * n_s * n_p,)
    sensing: SensingMatrix  # spatial A[1:K]
    triplets: List[PilotTriplet]
    w_blocks: List[np.ndarray]  # I_Np kron W[i]^H, each (n_s * n_p, n_r * n_p)


def noise_shaping_block(triplet: PilotTriplet) -> np.ndarray:
    """I_Np kron W^H for one transmission."""
    return np.kron(np.eye(triplet.s.shape[1]), triplet.w.conj().T)


def _draw_block(cfg: PilotConfig, arrays: ArrayConfig, rng: np.random.Generator):
    triplets = [sample_triplet(cfg, arrays, rng) for _ in range(cfg.k)]
    sensing = stack_sensing([sensing_matrix(t) for t in triplets])
    return triplets, sensing


@retry(
    stop=stop_after_attempt(MAX_FULL_RANK_ATTEMPTS),
    retry=retry_if_exception_type(RankDeficiencyError),
    after=after_log(logger, logging.DEBUG),
    reraise=True,
)
def _draw_full_rank_block(cfg: PilotConfig, arrays: ArrayConfig, rng: np.random.Generator):
    triplets, sensing = _draw_block(cfg, arrays, rng)
    if not sensing.is_full_rank():
        raise RankDeficiencyError(sensing.rank, arrays.n_elements)
    return triplets, sensing


def draw_triplets(
    cfg: PilotConfig,
    arrays: ArrayConfig,
    rng: np.random.Generator,
    require_full_rank: bool = True,
):
    """
    Draw k triplets and their stacked spatial sensing matrix.

    Args:
        cfg: Pilot configuration (k transmissions)
        arrays: Array geometry
        rng: Seeded numpy Generator
        require_full_rank: Resample until rank(A[1:K]) = n_t * n_r

    Returns:
        Tuple (triplets, stacked SensingMatrix)

    Raises:
        ConfigurationError: If full rank is impossible or not reached in 20 attempts
    """
    cfg.check_for(arrays, full_rank=require_full_rank)
    if not require_full_rank:
        return _draw_block(cfg, arrays, rng)
    try:
        return _draw_full_rank_block(cfg, arrays, rng)
    except RankDeficiencyError as e:
        raise ConfigurationError(
            f"No full-rank pilot block after {MAX_FULL_RANK_ATTEMPTS} attempts "
            f"(best rank {e.rank} of {e.required}); check n_s, n_p and k"
        ) from e


def measure_block(
    h: np.ndarray,
    triplets: Sequence[PilotTriplet],
    sensing: SensingMatrix,
    sigma: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Stacked received vector for a batch of channels.

    Equivalent to stacking vec(pilot_measure(h, t_i, sigma, rng)) over i, but
    vectorized over a leading batch axis.

    Args:
        h: Spatial channel (n_r, n_t) or batch (B, n_r, n_t)
        triplets: The k triplets behind `sensing`
        sensing: Stacked spatial sensing matrix
        sigma: Noise standard deviation per entry of N
        rng: Seeded numpy Generator (not consumed when sigma == 0)

    Returns:
        Complex (k * n_s * n_p,) or (B, k * n_s * n_p)
    """
    h = np.asarray(h)
    if h.shape[-1] * h.shape[-2] != sensing.shape[1]:
        raise InvalidDimensionError(
            f"Channel shape {h.shape[-2:]} incompatible with sensing matrix {sensing.shape}"
        )
    y = vec(h) @ sensing.a.T
    if sigma > 0:
        n_r = h.shape[-2]
        shaping = block_diag(*[noise_shaping_block(t) for t in triplets])
        n_noise = sum(t.s.shape[1] for t in triplets) * n_r
        noise = complex_normal(rng, h.shape[:-2] + (n_noise,), sigma)
        y = y + noise @ shaping.T
    return y


def stack_measurements(
    h: np.ndarray,
    cfg: PilotConfig,
    rng: np.random.Generator,
    sigma: Optional[float] = None,
    require_full_rank: bool = True,
) -> StackedMeasurement:
    """
    Simulate K pilot transmissions over one block-fading channel and stack them.

    Args:
        h: Spatial channel (n_r, n_t)
        cfg: Pilot configuration
        rng: Seeded numpy Generator
        sigma: Noise std override; defaults to the value implied by cfg.snr_db
        require_full_rank: Resample triplets until rank(A[1:K]) = n_t * n_r

    Returns:
        StackedMeasurement (y, sensing, triplets, w_blocks)

    Raises:
        ConfigurationError: If full rank is requested but not reached
    """
    h = np.asarray(h)
    arrays = ArrayConfig(n_t=h.shape[1], n_r=h.shape[0])
    sigma = snr_to_noise_std(cfg.snr_db) if sigma is None else sigma
    triplets, sensing = draw_triplets(cfg, arrays, rng, require_full_rank)
    y = measure_block(h, triplets, sensing, sigma, rng)
    return StackedMeasurement(
        y=y,
        sensing=sensing,
        triplets=list(triplets),
        w_blocks=[noise_shaping_block(t) for t in triplets],
    )


@dataclass
class LSOperator:
    """
    Precomputed stacked-LS estimator for one fixed set of k triplets.

    Attributes:
        sensing: Full-rank stacked spatial sensing matrix A[1:K]
        triplets: The triplets behind it
        arrays: Array geometry
    """

    sensing: SensingMatrix
    triplets: List[PilotTriplet]
    arrays: ArrayConfig

    def __post_init__(self) -> None:
        if self.sensing.domain != "spatial":
            raise ValueError("LSOperator expects the spatial stacked sensing matrix")
        if not self.sensing.is_full_rank():
            raise RankDeficiencyError(self.sensing.rank, self.arrays.n_elements)

    @cached_property
    def estimator(self) -> np.ndarray:
        """(A_T^T kron A_R^H) pinv(A[1:K]), shape (n_t n_r, k n_s n_p)."""
        a_t = dft_codebook(self.arrays.n_t)
        a_r = dft_codebook(self.arrays.n_r)
        to_beam = np.kron(a_t.T, a_r.conj().T)
        return to_beam @ pinv(self.sensing.a)

    @cached_property
    def sigma_half(self) -> np.ndarray:
        """Sigma^(1/2) = estimator @ diag(I_Np kron W[i]^H), shape (n_t n_r, k n_r n_p)."""
        shaping = block_diag(*[noise_shaping_block(t) for t in self.triplets])
        return self.estimator @ shaping

    def apply(self, y: np.ndarray) -> np.ndarray:
        """LS beamspace estimate(s) (n_r, n_t) from stacked measurement(s)."""
        return unvec(np.asarray(y) @ self.estimator.T, self.arrays.n_r, self.arrays.n_t)


def ls_estimate(
    y_stacked: np.ndarray,
    a_stacked: SensingMatrix,
    triplets: Sequence[PilotTriplet],
    arrays: ArrayConfig,
    snr_db: float = float("nan"),
) -> LSEstimate:
    """
    Beamspace LS estimate from full-rank stacked pilots.

    Args:
        y_stacked: Stacked received vector (k * n_s * n_p,)
        a_stacked: Full-rank stacked spatial sensing matrix
        triplets: The k triplets behind a_stacked
        arrays: Array geometry
        snr_db: SNR the measurements were taken at (recorded only)

    Returns:
        LSEstimate with hv_ls (n_r, n_t) and sigma_half

    Raises:
        RankDeficiencyError: If a_stacked is not full rank; compressive pilots
            cannot produce an LS training sample
    """
    op = LSOperator(sensing=a_stacked, triplets=list(triplets), arrays=arrays)
    return LSEstimate(hv_ls=op.apply(y_stacked), sigma_half=op.sigma_half, snr_db=snr_db)


def sample_ls_noise(
    sigma_half: np.ndarray,
    sigma: float,
    rng: np.random.Generator,
    size: Optional[int] = None,
) -> np.ndarray:
    """
    Draw zeta = sigma * Sigma^(1/2) g with g ~ CN(0, I).

    Args:
        sigma_half: Covariance square root (n_t n_r, k n_r n_p)
        sigma: Pilot noise standard deviation
        rng: Seeded numpy Generator (not consumed when sigma == 0)
        size: Optional number of independent draws

    Returns:
        Complex (n_t n_r,) vector, or (size, n_t n_r)
    """
    n_out, n_in = sigma_half.shape
    shape = (n_in,) if size is None else (size, n_in)
    if sigma == 0:
        return np.zeros(shape[:-1] + (n_out,), dtype=complex)
    g = complex_normal(rng, shape)
    return sigma * g @ sigma_half.T


def compressive_measure(
    h: np.ndarray,
    cfg: PilotConfig,
    arrays: ArrayConfig,
    rng: np.random.Generator,
    sigma: Optional[float] = None,
):
    """
    Compressive pilots for estimation: y and the beamspace sensing matrix A_sp.

    No rank requirement; typically k * n_s^2 < n_t * n_r.

    Returns:
        Tuple (y, A_sp SensingMatrix in the beamspace domain, triplets)
    """
    cfg.check_for(arrays)
    sigma = snr_to_noise_std(cfg.snr_db) if sigma is None else sigma
    triplets, sensing = draw_triplets(cfg, arrays, rng, require_full_rank=False)
    y = measure_block(h, triplets, sensing, sigma, rng)
    return y, to_beamspace_sensing(sensing, arrays), triplets
