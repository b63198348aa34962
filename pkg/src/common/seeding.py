"""
Seed and determinism helpers.

Every stochastic routine in beamgan takes an explicit numpy Generator or
torch.Generator; `seed_everything` only pins the global torch stream used by
module initialization and dropout.
"""

import logging
from typing import Optional

import numpy as np
import torch

logger = logging.getLogger(__name__)


def seed_everything(seed: int, deterministic: bool = True) -> None:
    """
    Seed the global torch RNG and optionally force deterministic kernels.

    Args:
        seed: Integer seed for torch.manual_seed
        deterministic: Restrict torch to deterministic algorithms on one thread
    """
    torch.manual_seed(seed)
    if deterministic:
        torch.use_deterministic_algorithms(True, warn_only=True)
        torch.set_num_threads(1)
    logger.debug(f"Seeded torch with {seed} (deterministic={deterministic})")


def make_rng(seed: Optional[int]) -> np.random.Generator:
    """numpy Generator for a seed (None draws fresh entropy)."""
    return np.random.default_rng(seed)


def make_torch_generator(seed: int, device: str = "cpu") -> torch.Generator:
    """torch.Generator seeded for the given device."""
    gen = torch.Generator(device=device)
    gen.manual_seed(seed)
    return gen


def derive_seed(seed: int, *keys: int) -> int:
    """
    Deterministically derive a child seed from a parent seed and integer keys.

    Examples:
        >>> derive_seed(7, 1) == derive_seed(7, 1)
        True
        >>> derive_seed(7, 1) != derive_seed(7, 2)
        True
    """
    seq = np.random.SeedSequence([seed, *keys])
    return int(seq.generate_state(1, dtype=np.uint32)[0])
