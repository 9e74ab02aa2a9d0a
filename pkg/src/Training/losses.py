"""
Losses Module

This module defines the two training losses: the plain squared error on the
recombined image, and the sensitivity-weighted squared error on coil images.
Both sum over pixels (and coils) and average over the batch.
"""

from typing import Optional, Union

import torch

from exceptions import InvalidArgumentError, ShapeMismatchError
from Networks.cascade import DCCNN, DPOCSENSE, CascadeModel
from Operators.coils import SensitivityMaps, combine, expand, maps_tensor
from Training.samples import TrainingBatch

LOSS_RECOMBINED = "recombined"
LOSS_COILWISE = "coilwise"
LOSS_VARIANTS = (LOSS_RECOMBINED, LOSS_COILWISE)
DEFAULT_LOSS = {DPOCSENSE: LOSS_RECOMBINED, DCCNN: LOSS_COILWISE}


def _squared_modulus(x: torch.Tensor) -> torch.Tensor:
    return x.real ** 2 + x.imag ** 2


def loss_recombined(pred: torch.Tensor, truth: torch.Tensor) -> torch.Tensor:
    """
    Sum over pixels of |truth - pred|^2, averaged over leading batch dimensions.

    Args:
        pred (torch.Tensor): Predicted image(s), shape (..., H, W).
        truth (torch.Tensor): Ground truth, same shape.

    Returns:
        torch.Tensor: Real scalar loss.
    """
    if pred.shape != truth.shape:
        raise ShapeMismatchError(f"Prediction {tuple(pred.shape)} does not match truth {tuple(truth.shape)}")
    per_sample = _squared_modulus(truth - pred).sum(dim=(-2, -1))
    return per_sample.mean()


def loss_coilwise(pred: torch.Tensor, truth: torch.Tensor, maps: Union[SensitivityMaps, torch.Tensor]) -> torch.Tensor:
    """
    Sum over coils and pixels of |conj(C_i) (truth_i - pred_i)|^2, averaged over the batch.

    Args:
        pred (torch.Tensor): Predicted coil images, shape (..., n_coil, H, W).
        truth (torch.Tensor): Ground-truth coil images, same shape.
        maps (Union[SensitivityMaps, torch.Tensor]): Sensitivity maps weighting each coil.

    Returns:
        torch.Tensor: Real scalar loss.
    """
    weights = maps_tensor(maps)
    if pred.shape != truth.shape:
        raise ShapeMismatchError(f"Prediction {tuple(pred.shape)} does not match truth {tuple(truth.shape)}")
    if pred.dim() < 3 or tuple(pred.shape[-3:]) != tuple(weights.shape[-3:]):
        raise ShapeMismatchError(f"Coil images {tuple(pred.shape)} do not match maps {tuple(weights.shape)}")
    per_sample = _squared_modulus(weights.conj() * (truth - pred)).sum(dim=(-3, -2, -1))
    return per_sample.mean()


def batch_loss(model: CascadeModel, batch: TrainingBatch, loss_variant: Optional[str] = None) -> torch.Tensor:
    """
    Run the model on a batch and evaluate the requested loss.

    The recombined loss compares images (DC-CNN outputs are recombined with the
    batch maps); the coil-wise loss compares coil images (D-POCSENSE outputs
    are expanded with the batch maps).
    """
    loss_variant = loss_variant or DEFAULT_LOSS[model.variant]
    if loss_variant not in LOSS_VARIANTS:
        raise InvalidArgumentError(f"Unknown loss '{loss_variant}', expected one of {LOSS_VARIANTS}")

    pred = model(batch.s_0, batch.mask, batch.maps)
    if loss_variant == LOSS_RECOMBINED:
        image = pred if model.variant == DPOCSENSE else combine(pred, batch.maps)
        return loss_recombined(image, batch.reference)
    coils = expand(pred, batch.maps) if model.variant == DPOCSENSE else pred
    return loss_coilwise(coils, batch.coil_truth, batch.maps)
