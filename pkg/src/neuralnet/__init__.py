"""
Neural networks for beamgan.

Generator, critic and LOS-predictor families with conditional embedding
paths, functional forward evaluations, parameter introspection and
checkpoints.
"""

from .specs import (
    GeneratorSpec,
    CriticSpec,
    LOSPredictorSpec,
    PAPER_PARAMETER_COUNTS,
    spec_from_dict,
)

from .transforms import BeamspaceNormalizer, to_tensor

from .networks import (
    ConditionEmbedding,
    Generator,
    Critic,
    LOSPredictor,
    NetParams,
    build_network,
    check_condition,
    clip_parameters,
    count_parameters,
    init_weights,
)

from .forward import (
    evaluation_mode,
    generator_forward,
    critic_forward,
    los_forward,
    embed_condition,
)

from .checkpoint import (
    CheckpointInfo,
    save_checkpoint,
    load_checkpoint,
    load_network,
    read_checkpoint_info,
)

__all__ = [
    # Specs
    'GeneratorSpec',
    'CriticSpec',
    'LOSPredictorSpec',
    'PAPER_PARAMETER_COUNTS',
    'spec_from_dict',
    # Normalization
    'BeamspaceNormalizer',
    'to_tensor',
    # Networks
    'ConditionEmbedding',
    'Generator',
    'Critic',
    'LOSPredictor',
    'NetParams',
    'build_network',
    'check_condition',
    'clip_parameters',
    'count_parameters',
    'init_weights',
    # Forward evaluations
    'evaluation_mode',
    'generator_forward',
    'critic_forward',
    'los_forward',
    'embed_condition',
    # Checkpoints
    'CheckpointInfo',
    'save_checkpoint',
    'load_checkpoint',
    'load_network',
    'read_checkpoint_info',
]
