"""
Pilot Transmission

Quantized constant-modulus precoders/combiners, QPSK pilot symbols and the
narrowband received-signal model Y = W^H H F S + W^H N.
"""

import logging

import numpy as np

from src.channel.schemas import ArrayConfig
from src.common.errors import InvalidDimensionError

from .schemas import PilotConfig, PilotTriplet

logger = logging.getLogger(__name__)


def snr_to_noise_std(snr_db: float) -> float:
    """
    Per-entry noise standard deviation for an SNR in dB.

    Channels have unit average element power, so sigma^2 = 10^(-snr/10).
    An infinite SNR maps to a noiseless link.

    Examples:
        >>> snr_to_noise_std(20.0)
        0.1
        >>> snr_to_noise_std(float("inf"))
        0.0
    """
    if np.isinf(snr_db) and snr_db > 0:
        return 0.0
    return float(10.0 ** (-snr_db / 20.0))


def quantized_phases(n_bits: int) -> np.ndarray:
    """The phase set {0, 2 pi / 2^b, ..., 2 pi (2^b - 1) / 2^b}."""
    levels = 2 ** n_bits
    return 2.0 * np.pi * np.arange(levels) / levels


def sample_triplet(cfg: PilotConfig, arrays: ArrayConfig, rng: np.random.Generator) -> PilotTriplet:
    """
    Draw one precoder / pilot / combiner triplet.

    Phases are uniform over the quantized sets; pilot symbols are QPSK.

    Args:
        cfg: Pilot configuration
        arrays: Array geometry
        rng: Seeded numpy Generator

    Returns:
        PilotTriplet with f (n_t, n_s), s (n_s, n_p), w (n_r, n_s)
    """
    phases_t = quantized_phases(cfg.n_bit_t)
    phases_r = quantized_phases(cfg.n_bit_r)
    f = np.exp(1j * rng.choice(phases_t, size=(arrays.n_t, cfg.n_s))) / np.sqrt(arrays.n_t)
    w = np.exp(1j * rng.choice(phases_r, size=(arrays.n_r, cfg.n_s))) / np.sqrt(arrays.n_r)
    s = np.exp(1j * (np.pi / 4 + np.pi / 2 * rng.integers(0, 4, size=(cfg.n_s, cfg.n_p))))
    return PilotTriplet(f=f, s=s, w=w)


def complex_normal(rng: np.random.Generator, size, scale: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with E|x|^2 = scale^2."""
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)


def pilot_measure(
    h: np.ndarray,
    triplet: PilotTriplet,
    sigma: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Received pilot block Y = W^H H F S + W^H N with N ~ CN(0, sigma^2) entries.

    Args:
        h: Spatial channel (n_r, n_t)
        triplet: Precoder / pilot / combiner set
        sigma: Noise standard deviation per entry of N
        rng: Seeded numpy Generator (not consumed when sigma == 0)

    Returns:
        Complex (n_s, n_p) received block

    Raises:
        InvalidDimensionError: If h does not match the triplet
    """
    h = np.asarray(h)
    n_r, n_t = triplet.w.shape[0], triplet.f.shape[0]
    if h.shape != (n_r, n_t):
        raise InvalidDimensionError(f"Channel shape {h.shape} does not match triplet ({n_r}, {n_t})")

    w_h = triplet.w.conj().T
    y = w_h @ h @ triplet.f @ triplet.s
    if sigma > 0:
        noise = complex_normal(rng, (n_r, triplet.s.shape[1]), sigma)
        y = y + w_h @ noise
    return y
