"""
Channel simulation for beamgan.

Synthetic narrowband MIMO channels with controllable LOS/NLOS cluster structure,
the spatial <-> beamspace DFT change of basis, and dataset normalization.
"""

from .schemas import (
    ChannelProfile,
    ArrayConfig,
    ChannelRealization,
    NormStats,
    ANALOG_PROFILES,
    SIGMA_FLOOR,
)

from .beamspace import (
    dft_codebook,
    steering_vectors,
    to_beamspace,
    from_beamspace,
    vec,
    unvec,
)

from .simulator import (
    load_channel_profiles,
    get_profile,
    sample_channel,
    sample_spatial_channels,
    energy_concentration,
    gini_coefficient,
    beamspace_gini,
    profile_statistics,
)

from .normalization import compute_norm_stats, stack_normalize, unstack_unnormalize

from .dataset import (
    ChannelDataset,
    generate_channel_dataset,
    save_channel_dataset,
    load_channel_dataset,
    stratified_indices,
)

__all__ = [
    # Schemas
    'ChannelProfile',
    'ArrayConfig',
    'ChannelRealization',
    'NormStats',
    'ANALOG_PROFILES',
    'SIGMA_FLOOR',
    # Beamspace
    'dft_codebook',
    'steering_vectors',
    'to_beamspace',
    'from_beamspace',
    'vec',
    'unvec',
    # Simulator
    'load_channel_profiles',
    'get_profile',
    'sample_channel',
    'sample_spatial_channels',
    'energy_concentration',
    'gini_coefficient',
    'beamspace_gini',
    'profile_statistics',
    # Normalization
    'compute_norm_stats',
    'stack_normalize',
    'unstack_unnormalize',
    # Datasets
    'ChannelDataset',
    'generate_channel_dataset',
    'save_channel_dataset',
    'load_channel_dataset',
    'stratified_indices',
]
