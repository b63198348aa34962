"""
Adversarial and supervised training for beamgan.

WGAN / WGAN-GP, CWGAN, Pilot GAN and PCGAN share one critic/generator loop;
the LOS predictor is trained separately with binary cross entropy.
"""

from .config import TrainConfig, ValidationConfig, LOSTrainConfig

from .updates import (
    StepResult,
    gradient_penalty,
    critic_loss,
    update_critic,
    update_generator,
    make_rmsprop,
    reset_optimizer,
)

from .data import (
    LSNoiseModel,
    BlockNoiseModel,
    TrainingData,
    prepare_training_data,
    install_norm_stats,
    pooled_norm_stats,
    draw_latent,
    draw_conditions,
)

from .trainer import (
    NetworkSpecs,
    CheckpointRecord,
    CheckpointTrail,
    TrainingResult,
    GCEValidator,
    AdversarialTrainer,
    build_gan,
    critic_step,
    generator_step,
    check_ls_dataset,
    predict_conditions,
    train_wgan,
    train_cwgan,
    train_pilot_gan,
    train_pcgan,
)

from .los_predictor import LOSTrainingResult, train_los_predictor, evaluate_los_accuracy

__all__ = [
    # Config
    'TrainConfig',
    'ValidationConfig',
    'LOSTrainConfig',
    # Updates
    'StepResult',
    'gradient_penalty',
    'critic_loss',
    'update_critic',
    'update_generator',
    'make_rmsprop',
    'reset_optimizer',
    # Data
    'LSNoiseModel',
    'BlockNoiseModel',
    'TrainingData',
    'prepare_training_data',
    'install_norm_stats',
    'pooled_norm_stats',
    'draw_latent',
    'draw_conditions',
    # Loop
    'NetworkSpecs',
    'CheckpointRecord',
    'CheckpointTrail',
    'TrainingResult',
    'GCEValidator',
    'AdversarialTrainer',
    'build_gan',
    'critic_step',
    'generator_step',
    'check_ls_dataset',
    'predict_conditions',
    'train_wgan',
    'train_cwgan',
    'train_pilot_gan',
    'train_pcgan',
    # LOS predictor
    'LOSTrainingResult',
    'train_los_predictor',
    'evaluate_los_accuracy',
]
