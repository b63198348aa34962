"""
LOS condition from a trained predictor.

chi = 1/2 (1 + sgn(2 L - 1)), with the measure-zero tie L = 0.5 mapped to 1.
"""

from typing import Union

import numpy as np
import torch

from src.neuralnet.forward import los_forward
from src.neuralnet.networks import LOSPredictor


def condition_from_probability(p: Union[float, np.ndarray, torch.Tensor]):
    """
    Threshold LOS probabilities into binary conditions.

    Examples:
        >>> condition_from_probability(0.9), condition_from_probability(0.3)
        (1, 0)
        >>> condition_from_probability(0.5)
        1
    """
    if isinstance(p, torch.Tensor):
        return (p >= 0.5).long()
    arr = np.asarray(p)
    chi = (arr >= 0.5).astype(np.int64)
    return int(chi) if chi.ndim == 0 else chi


def los_condition(hv_ls, predictor: LOSPredictor):
    """
    Binary LOS condition for beamspace LS estimate(s).

    Args:
        hv_ls: Complex (n_r, n_t) or batch (B, n_r, n_t), numpy or torch
        predictor: Trained LOS predictor

    Returns:
        int for a single estimate; int64 array (numpy input) or long tensor
        (torch input) for a batch
    """
    param = next(predictor.parameters())
    as_numpy = not isinstance(hv_ls, torch.Tensor)
    if as_numpy:
        dtype = torch.complex128 if param.dtype == torch.float64 else torch.complex64
        hv_ls = torch.as_tensor(np.asarray(hv_ls), dtype=dtype)
    with torch.no_grad():
        p = los_forward(hv_ls.to(param.device), predictor)
    chi = condition_from_probability(p)
    if not as_numpy:
        return chi
    chi = chi.cpu().numpy()
    return int(chi) if chi.ndim == 0 else chi
