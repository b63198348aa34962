"""
Hybrid-beamforming pilot measurement for beamgan.

Quantized pilot triplets, Kronecker sensing matrices, coherence/rank
diagnostics and full-rank stacked LS estimation with its exact noise covariance.
"""

from .schemas import PilotConfig, PilotTriplet, SensingMatrix, LSEstimate, RANK_RTOL

from .pilots import (
    snr_to_noise_std,
    quantized_phases,
    sample_triplet,
    complex_normal,
    pilot_measure,
)

from .sensing import (
    matrix_rank,
    mutual_coherence,
    sensing_matrix,
    beamspace_sensing_matrix,
    beamspace_basis,
    to_beamspace_sensing,
    stack_sensing,
    coherence_rank_study,
)

from .least_squares import (
    StackedMeasurement,
    LSOperator,
    MAX_FULL_RANK_ATTEMPTS,
    noise_shaping_block,
    draw_triplets,
    measure_block,
    stack_measurements,
    ls_estimate,
    sample_ls_noise,
    compressive_measure,
)

from .dataset import (
    LSDataset,
    build_ls_dataset,
    build_ls_dataset_from_channels,
    save_ls_dataset,
    load_ls_dataset,
)

__all__ = [
    # Schemas
    'PilotConfig',
    'PilotTriplet',
    'SensingMatrix',
    'LSEstimate',
    'RANK_RTOL',
    # Pilots
    'snr_to_noise_std',
    'quantized_phases',
    'sample_triplet',
    'complex_normal',
    'pilot_measure',
    # Sensing
    'matrix_rank',
    'mutual_coherence',
    'sensing_matrix',
    'beamspace_sensing_matrix',
    'beamspace_basis',
    'to_beamspace_sensing',
    'stack_sensing',
    'coherence_rank_study',
    # Least squares
    'StackedMeasurement',
    'LSOperator',
    'MAX_FULL_RANK_ATTEMPTS',
    'noise_shaping_block',
    'draw_triplets',
    'measure_block',
    'stack_measurements',
    'ls_estimate',
    'sample_ls_noise',
    'compressive_measure',
    # Datasets
    'LSDataset',
    'build_ls_dataset',
    'build_ls_dataset_from_channels',
    'save_ls_dataset',
    'load_ls_dataset',
]
