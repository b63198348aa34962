"""
beamgan Error Hierarchy

Every failure the toolkit raises on purpose derives from BeamganError so the CLI
can map it to a user-error exit code.

Design Principles:
- Fail fast with explicit error messages naming the offending value
- Dimension errors are also ValueErrors so numpy-style callers can catch them
"""

from pathlib import Path
from typing import Optional


class BeamganError(Exception):
    """Base class for all beamgan errors"""
    pass


class InvalidDimensionError(BeamganError, ValueError):
    """Raised when an array, matrix or tensor has the wrong size or shape"""
    pass


class ConfigurationError(BeamganError, ValueError):
    """Raised when a configuration cannot be satisfied (e.g. full rank never reached)"""
    pass


class RankDeficiencyError(BeamganError):
    """Raised when a stacked sensing matrix is not full rank"""

    def __init__(self, rank: int, required: int):
        self.rank = rank
        self.required = required
        super().__init__(
            f"Stacked sensing matrix has rank {rank}, full rank {required} required"
        )


class TrainingDivergedError(BeamganError):
    """Raised when a loss becomes NaN or infinite during adversarial training"""

    def __init__(self, message: str, iteration: int, last_good_checkpoint: Optional[Path] = None):
        self.reason = message
        self.iteration = iteration
        self.last_good_checkpoint = last_good_checkpoint
        suffix = (
            f"; last good checkpoint: {last_good_checkpoint}"
            if last_good_checkpoint is not None
            else "; no checkpoint written yet"
        )
        super().__init__(f"{message} at iteration {iteration}{suffix}")


class IncompatibleModelError(BeamganError, ValueError):
    """Raised when an estimator is paired with a model it cannot use"""
    pass


class DatasetError(BeamganError):
    """Raised when a dataset archive is missing, malformed or of the wrong kind"""
    pass
