"""
Data Consistency Module

This module implements the data-consistency layer in its two uses:
per-coil k-space blending for the calibration-less cascade, and
encode / blend / recombine for the sensitivity-based cascade.

On acquired samples the layer returns lambda * s_cnn + (1 - lambda) * s_0, and
elsewhere it keeps the network estimate s_cnn.
"""

import math
from numbers import Real
from typing import List, Optional, Union

import torch
import torch.nn as nn

from exceptions import InvalidArgumentError, ShapeMismatchError
from Operators.coils import combine, expand
from Operators.encoding import MapsLike, MaskLike
from Operators.fourier import fft2c, ifft2c
from Operators.sampling import check_mask_shape, mask_tensor

DEFAULT_LAMBDA = 0.05

LambdaLike = Union[float, torch.Tensor]


class DcParam(nn.Module):
    """
    The blending weight lambda of one data-consistency layer.

    A trainable weight is stored as an unconstrained scalar ``raw`` with
    lambda = sigmoid(raw), so it stays inside (0, 1) under any update. A fixed
    weight may take any value in [0, 1], including 0 for hard consistency.

    Attributes:
        trainable (bool): Whether lambda is a network parameter.
    """

    def __init__(self, init_lambda: float = DEFAULT_LAMBDA, trainable: bool = True):
        super().__init__()
        self.trainable = trainable
        if trainable:
            if not 0.0 < init_lambda < 1.0:
                raise InvalidArgumentError(f"A trainable lambda must start inside (0, 1), got {init_lambda}")
            raw = math.log(init_lambda / (1.0 - init_lambda))
            self.raw = nn.Parameter(torch.tensor(raw, dtype=torch.float64))
        else:
            if not 0.0 <= init_lambda <= 1.0:
                raise InvalidArgumentError(f"Lambda must lie in [0, 1], got {init_lambda}")
            self.register_buffer("fixed", torch.tensor(init_lambda, dtype=torch.float64))

    def value(self) -> torch.Tensor:
        """Current lambda as a 0-dim tensor (differentiable when trainable)."""
        if self.trainable:
            return torch.sigmoid(self.raw)
        return self.fixed

    @property
    def lambda_value(self) -> float:
        return float(self.value().detach())

    def stored_value(self) -> torch.Tensor:
        """The scalar written to checkpoints: raw for trainable weights, lambda otherwise."""
        return self.raw if self.trainable else self.fixed

    def extra_repr(self) -> str:
        return f"lambda={self.lambda_value:.4g}, trainable={self.trainable}"


def _check_lambda(lam: LambdaLike):
    if isinstance(lam, Real):
        value = float(lam)
    elif isinstance(lam, torch.Tensor) and lam.dim() == 0:
        value = float(lam.detach())
    else:
        return
    if not 0.0 <= value <= 1.0:
        raise InvalidArgumentError(f"Lambda must lie in [0, 1], got {value}")


def dc_percoil(s_cnn: torch.Tensor, s_0: torch.Tensor, mask: MaskLike, lam: LambdaLike) -> torch.Tensor:
    """
    Blend network k-space with acquired k-space on the sampled lines, per coil.

    Args:
        s_cnn (torch.Tensor): Network estimate in k-space, shape (..., n_coil, H, W).
        s_0 (torch.Tensor): Acquired k-space, same shape.
        mask (MaskLike): Sampling pattern.
        lam (LambdaLike): Blending weight in [0, 1].

    Returns:
        torch.Tensor: Consistent k-space, same shape.
    """
    if s_cnn.shape != s_0.shape:
        raise ShapeMismatchError(f"Network k-space {tuple(s_cnn.shape)} does not match acquired {tuple(s_0.shape)}")
    check_mask_shape(s_cnn, mask)
    _check_lambda(lam)
    rows = mask_tensor(mask, s_cnn.device)
    blended = lam * s_cnn + (1 - lam) * s_0
    return torch.where(rows, blended, s_cnn)


def dc_combined(x_cnn: torch.Tensor, s_0: torch.Tensor, maps: MapsLike, mask: MaskLike, lam: LambdaLike,
                trace: Optional[List[torch.Tensor]] = None) -> torch.Tensor:
    """
    Encode the network image, blend on the sampled lines and recombine.

    The recombination uses the full (unmasked) inverse transform so that the
    network's estimate of unacquired frequencies is kept.

    Args:
        x_cnn (torch.Tensor): Network image estimate, shape (..., H, W).
        s_0 (torch.Tensor): Acquired k-space, shape (..., n_coil, H, W).
        maps (MapsLike): Coil maps.
        mask (MaskLike): Sampling pattern.
        lam (LambdaLike): Blending weight in [0, 1].
        trace (Optional[List[torch.Tensor]]): Receives the blended k-space before recombination.

    Returns:
        torch.Tensor: Recombined image, shape (..., H, W).
    """
    s_cnn = fft2c(expand(x_cnn, maps))
    s_rec = dc_percoil(s_cnn, s_0, mask, lam)
    if trace is not None:
        trace.append(s_rec)
    return combine(ifft2c(s_rec), maps)
