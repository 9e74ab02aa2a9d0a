"""
Coils Module

This module simulates, estimates and applies coil sensitivity maps, and performs
the sensitivity-weighted recombination (C^H) and expansion (C) of images.
"""

import math
from typing import Union

import numpy as np
import torch

from exceptions import InvalidArgumentError, InvalidConfigurationError, ShapeMismatchError
from Operators.fourier import ifft2c
from Operators.sampling import SamplingMask, central_lines

DEFAULT_SUPPORT_THRESHOLD = 0.05


class SensitivityMaps:
    """
    Represents a set of coil sensitivity maps with pixelwise normalization.

    On the support the maps satisfy sum_i |C_i(p)|^2 = 1; off the support every
    map is zero.

    Attributes:
        maps (torch.Tensor): Complex maps, shape (n_coil, H, W).
        support (torch.Tensor): Boolean grid, shape (H, W), where the maps are defined.
    """

    def __init__(self, maps: torch.Tensor, support: torch.Tensor = None):
        if maps.dim() != 3 or maps.shape[0] < 1:
            raise ShapeMismatchError(f"Maps must have shape (n_coil, H, W), got {tuple(maps.shape)}")
        if support is None:
            support = torch.ones(maps.shape[-2:], dtype=torch.bool, device=maps.device)
        if tuple(support.shape) != tuple(maps.shape[-2:]):
            raise ShapeMismatchError(f"Support {tuple(support.shape)} does not match maps {tuple(maps.shape[-2:])}")
        self.maps = maps
        self.support = support.to(torch.bool)

    @property
    def n_coil(self) -> int:
        return self.maps.shape[0]

    @property
    def shape(self):
        return tuple(self.maps.shape[-2:])

    def normalization_error(self) -> float:
        """Largest deviation of sum_i |C_i|^2 from 1 on the support."""
        energy = torch.sum(self.maps.abs() ** 2, dim=0)
        if not bool(self.support.any()):
            return 0.0
        return float(torch.max(torch.abs(energy[self.support] - 1.0)))

    def __str__(self) -> str:
        coverage = 100.0 * float(self.support.float().mean())
        return f"SensitivityMaps: {self.n_coil} coils, {self.shape[0]}x{self.shape[1]}, support {coverage:.1f}%"


def maps_tensor(maps: Union[SensitivityMaps, torch.Tensor]) -> torch.Tensor:
    """Return the raw map tensor (n_coil, H, W) or a batched (B, n_coil, H, W) stack."""
    if isinstance(maps, SensitivityMaps):
        return maps.maps
    return maps


def _normalize(coil_images: np.ndarray, support: np.ndarray) -> np.ndarray:
    rss = np.sqrt(np.sum(np.abs(coil_images) ** 2, axis=0))
    safe = np.where(support, rss, 1.0)
    return np.where(support[None], coil_images / safe[None], 0.0)


def simulate_sensitivities(height: int, width: int, n_coil: int, seed: int) -> SensitivityMaps:
    """
    Simulate smooth complex coil maps arranged around the field of view.

    Each coil has a Gaussian magnitude profile centered at one of n_coil equally
    spaced angles (with a seeded common rotation) and a seeded linear phase ramp;
    the set is normalized to root-sum-of-squares 1 at every pixel.

    Args:
        height (int): Frame height.
        width (int): Frame width.
        n_coil (int): Number of coils, >= 1.
        seed (int): Random seed.

    Returns:
        SensitivityMaps: Maps in double precision, support covering the whole frame.
    """
    if n_coil < 1:
        raise InvalidArgumentError(f"n_coil must be >= 1, got {n_coil}")
    if height < 1 or width < 1:
        raise InvalidArgumentError(f"Frame dimensions must be >= 1, got ({height}, {width})")

    rng = np.random.default_rng(seed)
    rows = (np.arange(height) - height // 2) / max(height / 2.0, 1.0)
    cols = (np.arange(width) - width // 2) / max(width / 2.0, 1.0)
    grid_y, grid_x = np.meshgrid(rows, cols, indexing="ij")

    rotation = rng.uniform(0.0, 2.0 * math.pi)
    coil_images = np.empty((n_coil, height, width), dtype=np.complex128)
    for coil in range(n_coil):
        angle = rotation + 2.0 * math.pi * coil / n_coil
        center_y, center_x = 1.1 * math.sin(angle), 1.1 * math.cos(angle)
        spread = rng.uniform(0.6, 0.9)
        distance2 = (grid_y - center_y) ** 2 + (grid_x - center_x) ** 2
        magnitude = np.exp(-distance2 / (2.0 * spread ** 2))
        slope_y, slope_x = rng.uniform(-math.pi / 2, math.pi / 2, size=2)
        phase = slope_y * grid_y + slope_x * grid_x + rng.uniform(-math.pi, math.pi)
        coil_images[coil] = magnitude * np.exp(1j * phase)

    support = np.ones((height, width), dtype=bool)
    maps = _normalize(coil_images, support)
    return SensitivityMaps(torch.from_numpy(maps), torch.from_numpy(support))


def calibration_window(calib: int) -> np.ndarray:
    """Raised-cosine apodization across the calib lines; strictly positive at the edges."""
    taps = np.arange(1, calib + 1)
    return 0.5 - 0.5 * np.cos(2.0 * math.pi * taps / (calib + 1))


def estimate_sensitivities(s0: torch.Tensor, mask: SamplingMask, calib: int,
                           threshold: float = DEFAULT_SUPPORT_THRESHOLD) -> SensitivityMaps:
    """
    Estimate coil maps from the fully sampled calibration lines.

    The calib central lines of every coil are apodized, zero-padded to the full
    frame and transformed to low-resolution coil images l_i; the maps are
    l_i / rss(l) where rss >= threshold * max(rss), and zero elsewhere.

    Args:
        s0 (torch.Tensor): Acquired multi-coil k-space, shape (n_coil, H, W).
        mask (SamplingMask): Acquisition pattern; must contain the calibration lines.
        calib (int): Number of central calibration lines, >= 4.
        threshold (float): Support threshold relative to the peak RSS.

    Returns:
        SensitivityMaps: Estimated maps in the dtype of s0.
    """
    if calib < 4:
        raise InvalidArgumentError(f"Calibration width must be >= 4, got {calib}")
    if s0.dim() != 3:
        raise ShapeMismatchError(f"Expected k-space of shape (n_coil, H, W), got {tuple(s0.shape)}")
    if tuple(s0.shape[-2:]) != mask.shape:
        raise ShapeMismatchError(f"Mask {mask.shape} does not match k-space frame {tuple(s0.shape[-2:])}")
    lines = central_lines(mask.height, calib)
    if not mask.contains_lines(lines):
        raise InvalidConfigurationError(f"Mask does not acquire the {calib} central calibration lines")

    window = torch.from_numpy(calibration_window(calib)).to(s0.real.dtype)
    low_freq = torch.zeros_like(s0)
    low_freq[:, lines, :] = s0[:, lines, :] * window[:, None]
    low_res = ifft2c(low_freq)

    rss = torch.sqrt(torch.sum(low_res.abs() ** 2, dim=0))
    peak = torch.max(rss)
    support = (rss >= threshold * peak) & (rss > 0)
    safe = torch.where(support, rss, torch.ones_like(rss))
    maps = torch.where(support[None], low_res / safe[None], torch.zeros((), dtype=s0.dtype))
    return SensitivityMaps(maps, support)


def _check_coils(stack: torch.Tensor, maps: torch.Tensor):
    if stack.dim() < 3 or tuple(stack.shape[-3:]) != tuple(maps.shape[-3:]):
        raise ShapeMismatchError(f"Coil stack {tuple(stack.shape)} does not match maps {tuple(maps.shape)}")


def combine(coil_imgs: torch.Tensor, maps: Union[SensitivityMaps, torch.Tensor]) -> torch.Tensor:
    """
    Sensitivity-weighted recombination x(p) = sum_i conj(C_i(p)) x_i(p).

    Args:
        coil_imgs (torch.Tensor): Coil images, shape (..., n_coil, H, W).
        maps (Union[SensitivityMaps, torch.Tensor]): Maps, shape (n_coil, H, W) or batched.

    Returns:
        torch.Tensor: Recombined image(s), shape (..., H, W).
    """
    weights = maps_tensor(maps)
    _check_coils(coil_imgs, weights)
    return torch.sum(weights.conj() * coil_imgs, dim=-3)


def expand(img: torch.Tensor, maps: Union[SensitivityMaps, torch.Tensor]) -> torch.Tensor:
    """
    Coil expansion x_i(p) = C_i(p) x(p).

    Args:
        img (torch.Tensor): Image(s), shape (..., H, W).
        maps (Union[SensitivityMaps, torch.Tensor]): Maps, shape (n_coil, H, W) or batched.

    Returns:
        torch.Tensor: Coil images, shape (..., n_coil, H, W).
    """
    weights = maps_tensor(maps)
    if img.dim() < 2 or tuple(img.shape[-2:]) != tuple(weights.shape[-2:]):
        raise ShapeMismatchError(f"Image {tuple(img.shape)} does not match maps {tuple(weights.shape)}")
    return weights * img.unsqueeze(-3)
