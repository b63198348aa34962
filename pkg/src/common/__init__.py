"""
Shared infrastructure for beamgan: settings, logging, errors and seeding.
"""

from .errors import (
    BeamganError,
    InvalidDimensionError,
    ConfigurationError,
    RankDeficiencyError,
    TrainingDivergedError,
    IncompatibleModelError,
    DatasetError,
)

from .settings import BeamganSettings, get_settings, REPO_ROOT, CONFIG_DIR

from .logging_config import configure_logging, MetricsLogger, open_metrics_logger

from .seeding import seed_everything, make_rng, make_torch_generator, derive_seed

__all__ = [
    # Errors
    'BeamganError',
    'InvalidDimensionError',
    'ConfigurationError',
    'RankDeficiencyError',
    'TrainingDivergedError',
    'IncompatibleModelError',
    'DatasetError',
    # Settings
    'BeamganSettings',
    'get_settings',
    'REPO_ROOT',
    'CONFIG_DIR',
    # Logging
    'configure_logging',
    'MetricsLogger',
    'open_metrics_logger',
    # Seeding
    'seed_everything',
    'make_rng',
    'make_torch_generator',
    'derive_seed',
]
