"""
Encoding Module

This module provides the SENSE encoding operator E (image -> masked multi-coil
k-space) and its adjoint E^H, composed from the coil, Fourier and sampling
operators.
"""

from typing import Union

import torch

from Operators.coils import SensitivityMaps, combine, expand
from Operators.fourier import fft2c, ifft2c
from Operators.sampling import SamplingMask, apply_mask

MapsLike = Union[SensitivityMaps, torch.Tensor]
MaskLike = Union[SamplingMask, torch.Tensor]


def forward_op(x: torch.Tensor, maps: MapsLike, mask: MaskLike) -> torch.Tensor:
    """
    Apply E x = M F C x coil-wise.

    Args:
        x (torch.Tensor): Image(s), shape (..., H, W).
        maps (MapsLike): Coil maps.
        mask (MaskLike): Sampling pattern.

    Returns:
        torch.Tensor: Masked k-space, shape (..., n_coil, H, W).
    """
    return apply_mask(fft2c(expand(x, maps)), mask)


def adjoint_op(s: torch.Tensor, maps: MapsLike, mask: MaskLike) -> torch.Tensor:
    """
    Apply E^H s = C^H F^H M s.

    Args:
        s (torch.Tensor): Multi-coil k-space, shape (..., n_coil, H, W).
        maps (MapsLike): Coil maps.
        mask (MaskLike): Sampling pattern.

    Returns:
        torch.Tensor: Recombined image(s), shape (..., H, W).
    """
    return combine(ifft2c(apply_mask(s, mask)), maps)


class SenseOperator:
    """
    The encoding operator bound to one set of maps and one sampling pattern.

    Calling the operator applies E; ``H`` applies the adjoint.

    Attributes:
        maps (MapsLike): Coil sensitivity maps.
        mask (MaskLike): Sampling pattern.
    """

    def __init__(self, maps: MapsLike, mask: MaskLike):
        self.maps = maps
        self.mask = mask

    def __call__(self, x: torch.Tensor) -> torch.Tensor:
        return forward_op(x, self.maps, self.mask)

    def H(self, s: torch.Tensor) -> torch.Tensor:
        return adjoint_op(s, self.maps, self.mask)

    def normal(self, x: torch.Tensor) -> torch.Tensor:
        """E^H E x."""
        return self.H(self(x))

    def residual(self, x: torch.Tensor, s0: torch.Tensor) -> torch.Tensor:
        """E x - s0 restricted to the acquired samples."""
        return self(x) - apply_mask(s0, self.mask)
