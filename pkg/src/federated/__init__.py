"""
Federated Pilot GAN simulation for beamgan.

UE-local critics on LS estimates at link-budget SNRs, server-side critic
averaging and a centrally trained generator.
"""

from .link_budget import LinkBudget, link_snr

from .averaging import average_critic_weights, critic_parameters, load_parameters

from .fed_pilot_gan import FedConfig, FederatedResult, UEDataSource, run_federated_training

__all__ = [
    # Link budget
    'LinkBudget',
    'link_snr',
    # Averaging
    'average_critic_weights',
    'critic_parameters',
    'load_parameters',
    # Training
    'FedConfig',
    'FederatedResult',
    'UEDataSource',
    'run_federated_training',
]
