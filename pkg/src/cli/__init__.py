"""
Command-line front end for beamgan: generate, train, evaluate, reproduce.
"""

from .config import ExperimentConfig, SCALES, load_experiment, preset_path

from .commands import (
    REGIMES,
    cmd_generate,
    cmd_train,
    cmd_evaluate,
    coherence_figure,
    data_paths,
    run_dir,
    trail_table,
    validation_channels,
)

from .reproduce import FIGURES, FIGURE_PRESETS, cmd_reproduce, write_manifest

from .main import main, build_parser

__all__ = [
    # Config
    'ExperimentConfig',
    'SCALES',
    'load_experiment',
    'preset_path',
    # Commands
    'REGIMES',
    'cmd_generate',
    'cmd_train',
    'cmd_evaluate',
    'coherence_figure',
    'data_paths',
    'run_dir',
    'trail_table',
    'validation_channels',
    # Reproduction
    'FIGURES',
    'FIGURE_PRESETS',
    'cmd_reproduce',
    'write_manifest',
    # Entry point
    'main',
    'build_parser',
]
