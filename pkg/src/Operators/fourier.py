"""
Fourier Module

This module provides the complex 2D tensor helpers and the centered, orthonormal
Fourier transform that maps images to k-space and back.

Images are complex torch tensors whose last two dimensions are (height, width);
any leading dimensions (batch, coil) are transformed independently. The center
index of a frame is (H // 2, W // 2) for both even and odd sizes.
"""

from typing import Tuple

import torch

from exceptions import InvalidArgumentError, ShapeMismatchError

_FFT_DIMS = (-2, -1)

REAL_DTYPES = {
    "double": torch.float64,
    "single": torch.float32,
}

COMPLEX_DTYPES = {
    "double": torch.complex128,
    "single": torch.complex64,
}


def precision_dtypes(precision: str) -> Tuple[torch.dtype, torch.dtype]:
    """
    Map a precision name to its (real, complex) torch dtypes.

    Args:
        precision (str): Either "double" or "single".

    Returns:
        Tuple[torch.dtype, torch.dtype]: The real and complex dtypes.
    """
    if precision not in REAL_DTYPES:
        raise InvalidArgumentError(f"Unknown precision '{precision}', expected one of {sorted(REAL_DTYPES)}")
    return REAL_DTYPES[precision], COMPLEX_DTYPES[precision]


def _check_frame(x: torch.Tensor):
    if x.dim() < 2:
        raise InvalidArgumentError(f"Expected at least a 2D frame, got shape {tuple(x.shape)}")
    if x.shape[-2] < 1 or x.shape[-1] < 1:
        raise InvalidArgumentError(f"Frame dimensions must be >= 1, got {tuple(x.shape[-2:])}")


def fft2c(img: torch.Tensor) -> torch.Tensor:
    """
    Centered orthonormal 2D Fourier transform over the last two dimensions.

    The input is circularly shifted so that (H // 2, W // 2) lands on the DFT
    origin, transformed with 1/sqrt(H*W) scaling, and shifted back so that DC
    sits at the frame center.

    Args:
        img (torch.Tensor): Complex image(s), shape (..., H, W).

    Returns:
        torch.Tensor: k-space with the same shape.
    """
    _check_frame(img)
    shifted = torch.fft.ifftshift(img, dim=_FFT_DIMS)
    ksp = torch.fft.fft2(shifted, dim=_FFT_DIMS, norm="ortho")
    return torch.fft.fftshift(ksp, dim=_FFT_DIMS)


def ifft2c(ksp: torch.Tensor) -> torch.Tensor:
    """
    Inverse of fft2c (also its adjoint, the transform being unitary).

    Args:
        ksp (torch.Tensor): Complex k-space, shape (..., H, W).

    Returns:
        torch.Tensor: Image(s) with the same shape.
    """
    _check_frame(ksp)
    shifted = torch.fft.ifftshift(ksp, dim=_FFT_DIMS)
    img = torch.fft.ifft2(shifted, dim=_FFT_DIMS, norm="ortho")
    return torch.fft.fftshift(img, dim=_FFT_DIMS)


def inner_product(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """
    Complex inner product sum(conj(a) * b) over every sample.

    Args:
        a (torch.Tensor): Left operand (conjugated).
        b (torch.Tensor): Right operand, same shape as a.

    Returns:
        torch.Tensor: A complex scalar tensor.
    """
    if a.shape != b.shape:
        raise ShapeMismatchError(f"inner_product operands differ: {tuple(a.shape)} vs {tuple(b.shape)}")
    return torch.sum(a.conj() * b)


def complex_to_channels(x: torch.Tensor) -> torch.Tensor:
    """
    Split a complex stack (B, n, H, W) into real channels (B, 2n, H, W).

    Channel 2j holds the real part and channel 2j+1 the imaginary part of image j.
    """
    batch, n_img, height, width = x.shape
    as_real = torch.view_as_real(x)  # (B, n, H, W, 2)
    return as_real.permute(0, 1, 4, 2, 3).reshape(batch, 2 * n_img, height, width)


def channels_to_complex(x: torch.Tensor) -> torch.Tensor:
    """Inverse of complex_to_channels."""
    batch, channels, height, width = x.shape
    pairs = x.reshape(batch, channels // 2, 2, height, width).permute(0, 1, 3, 4, 2).contiguous()
    return torch.view_as_complex(pairs)
