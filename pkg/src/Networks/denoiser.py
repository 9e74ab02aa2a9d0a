"""
Denoiser Module

This module implements the CNN sub-network applied between data-consistency
layers: a stack of dilated 3x3 convolutions over complex images represented as
pairs of real channels, with ReLU between layers and a residual connection.
"""

import math
from typing import List

import torch
import torch.nn as nn
import torch.nn.functional as F

from exceptions import InvalidArgumentError, ShapeMismatchError
from Operators.fourier import channels_to_complex, complex_to_channels


def conv2d_dilated(x: torch.Tensor, kernel: torch.Tensor, bias: torch.Tensor, dilation: int) -> torch.Tensor:
    """
    Same-size dilated cross-correlation.

    Args:
        x (torch.Tensor): Real feature maps, shape (B, in_ch, H, W).
        kernel (torch.Tensor): Weights, shape (out_ch, in_ch, k, k) with odd k.
        bias (torch.Tensor): Biases, shape (out_ch,).
        dilation (int): Spacing between kernel taps.

    Returns:
        torch.Tensor: Feature maps, shape (B, out_ch, H, W).
    """
    if x.shape[1] != kernel.shape[1]:
        raise ShapeMismatchError(f"Input has {x.shape[1]} channels, kernel expects {kernel.shape[1]}")
    if kernel.shape[-1] % 2 == 0 or kernel.shape[-1] != kernel.shape[-2]:
        raise InvalidArgumentError(f"Kernels must be square with odd size, got {tuple(kernel.shape[-2:])}")
    padding = (kernel.shape[-1] - 1) * dilation // 2
    return F.conv2d(x, kernel, bias, padding=padding, dilation=dilation)


def layer_dilations(n_d: int, dilation: int) -> List[int]:
    """Dilation per layer: 1 on the first and last layer, ``dilation`` on hidden ones."""
    return [1 if index in (0, n_d - 1) else dilation for index in range(n_d)]


class Subnet(nn.Module):
    """
    Residual dilated CNN over a stack of n_img complex images.

    Attributes:
        n_d (int): Number of convolution layers.
        n_img (int): Number of complex images in the stack (1 or n_coil).
        n_filters (int): Hidden channel width.
        dilation (int): Dilation of the hidden layers.
        kernel_size (int): Spatial kernel size.
    """

    def __init__(self, n_d: int, n_filters: int, n_img: int, dilation: int = 2, kernel_size: int = 3):
        super().__init__()
        if n_d < 1:
            raise InvalidArgumentError(f"n_d must be >= 1, got {n_d}")
        if n_img < 1 or n_filters < 1:
            raise InvalidArgumentError(f"n_img and n_filters must be >= 1, got {n_img} and {n_filters}")
        self.n_d = n_d
        self.n_img = n_img
        self.n_filters = n_filters
        self.dilation = dilation
        self.kernel_size = kernel_size

        channels = [2 * n_img] + [n_filters] * (n_d - 1) + [2 * n_img]
        self.layers = nn.ModuleList()
        for index, layer_dilation in enumerate(layer_dilations(n_d, dilation)):
            self.layers.append(nn.Conv2d(channels[index], channels[index + 1], kernel_size,
                                         dilation=layer_dilation, bias=True, dtype=torch.float64))

    def cnn(self, features: torch.Tensor) -> torch.Tensor:
        """The convolution stack without the residual connection."""
        for index, layer in enumerate(self.layers):
            features = conv2d_dilated(features, layer.weight, layer.bias, layer.dilation[0])
            if index < self.n_d - 1:
                features = F.relu(features)
        return features

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """
        Denoise a complex stack.

        Args:
            x (torch.Tensor): Complex images, shape (B, n_img, H, W) or (n_img, H, W).

        Returns:
            torch.Tensor: x + cnn(x) with the input shape.
        """
        unbatched = x.dim() == 3
        stack = x.unsqueeze(0) if unbatched else x
        if stack.dim() != 4 or stack.shape[1] != self.n_img:
            raise ShapeMismatchError(f"Sub-network expects {self.n_img} complex images, got shape {tuple(x.shape)}")
        features = complex_to_channels(stack)
        out = channels_to_complex(features + self.cnn(features))
        return out.squeeze(0) if unbatched else out


def subnet_forward(x: torch.Tensor, params: Subnet) -> torch.Tensor:
    """Apply a sub-network to a complex image stack."""
    return params(x)


def init_params(n_d: int, n_filters: int, n_img: int, dilation: int, seed: int, kernel_size: int = 3) -> Subnet:
    """
    Build a sub-network with He-scaled normal weights and zero biases.

    Args:
        n_d (int): Number of convolution layers, >= 1.
        n_filters (int): Hidden channel width.
        n_img (int): Complex images per stack.
        dilation (int): Hidden-layer dilation.
        seed (int): Random seed; equal seeds give equal weights.
        kernel_size (int): Spatial kernel size.

    Returns:
        Subnet: The initialized sub-network (double precision).
    """
    subnet = Subnet(n_d, n_filters, n_img, dilation, kernel_size)
    generator = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for layer in subnet.layers:
            fan_in = layer.weight.shape[1] * kernel_size * kernel_size
            std = math.sqrt(2.0 / fan_in)
            layer.weight.copy_(torch.randn(layer.weight.shape, generator=generator, dtype=torch.float64) * std)
            layer.bias.zero_()
    return subnet
