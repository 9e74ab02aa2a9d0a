"""
Sampling Module

This module generates the Cartesian undersampling patterns used to simulate
accelerated acquisitions and applies them to multi-coil k-space.

Undersampling acts on phase-encode lines, i.e. rows of the (H, W) k-space frame;
a sampled row is acquired over its full readout.
"""

import math
from typing import Any, Dict, List, Union

import numpy as np
import torch

from exceptions import InvalidArgumentError, InvalidConfigurationError, ShapeMismatchError


def central_lines(height: int, calib: int) -> List[int]:
    """
    Indices of the calib lines centered on height // 2.

    Args:
        height (int): Number of phase-encode lines.
        calib (int): Number of central lines.

    Returns:
        List[int]: Sorted line indices.
    """
    start = height // 2 - calib // 2
    return list(range(start, start + calib))


def lines_for_acceleration(height: int, af: float) -> int:
    """Number of acquired lines, round(height / af) with halves rounded up."""
    return int(math.floor(height / af + 0.5))


class SamplingMask:
    """
    Represents the set of acquired phase-encode lines of a Cartesian pattern.

    Attributes:
        height (int): Number of phase-encode lines.
        width (int): Number of readout samples per line.
        sampled_lines (List[int]): Sorted, unique acquired line indices.
        seed (int): Seed the pattern was drawn with.
    """

    def __init__(self, height: int, width: int, sampled_lines: List[int], seed: int = 0):
        if height < 1 or width < 1:
            raise InvalidArgumentError(f"Mask dimensions must be >= 1, got ({height}, {width})")
        lines = sorted(set(int(line) for line in sampled_lines))
        if lines and (lines[0] < 0 or lines[-1] >= height):
            raise InvalidArgumentError(f"Sampled lines must lie in [0, {height}), got {lines[0]}..{lines[-1]}")
        self.height = height
        self.width = width
        self.sampled_lines = lines
        self.seed = seed

    @classmethod
    def full(cls, height: int, width: int) -> "SamplingMask":
        """A mask acquiring every line."""
        return cls(height, width, list(range(height)))

    @classmethod
    def empty(cls, height: int, width: int) -> "SamplingMask":
        """A mask acquiring nothing."""
        return cls(height, width, [])

    @classmethod
    def from_metadata(cls, meta: Dict[str, Any]) -> "SamplingMask":
        """Rebuild a mask from the fields stored in a dataset header."""
        return cls(meta["height"], meta["width"], meta["sampled_lines"], meta.get("mask_seed", 0))

    @property
    def shape(self):
        return (self.height, self.width)

    @property
    def fraction(self) -> float:
        return len(self.sampled_lines) / self.height

    def contains_lines(self, lines: List[int]) -> bool:
        acquired = set(self.sampled_lines)
        return all(line in acquired for line in lines)

    def as_tensor(self, device: Union[str, torch.device] = "cpu") -> torch.Tensor:
        """
        Boolean line mask of shape (H, 1) that broadcasts over (..., H, W) k-space.

        Returns:
            torch.Tensor: True on acquired lines.
        """
        rows = torch.zeros(self.height, 1, dtype=torch.bool, device=device)
        if self.sampled_lines:
            rows[self.sampled_lines] = True
        return rows

    def __eq__(self, other) -> bool:
        if not isinstance(other, SamplingMask):
            return NotImplemented
        return self.shape == other.shape and self.sampled_lines == other.sampled_lines

    def __str__(self) -> str:
        return (f"SamplingMask {self.height}x{self.width}: {len(self.sampled_lines)} lines "
                f"({100.0 * self.fraction:.1f}%), seed {self.seed}")


def generate_mask(height: int, width: int, af: float, calib: int, seed: int) -> SamplingMask:
    """
    Draw a Cartesian line mask with a fully sampled center.

    The calib central lines are always acquired; the remaining
    round(height / af) - calib lines are drawn uniformly without replacement
    from the non-central lines.

    Args:
        height (int): Number of phase-encode lines.
        width (int): Readout samples per line.
        af (float): Acceleration factor, >= 1.
        calib (int): Number of central calibration lines.
        seed (int): Random seed; equal seeds give equal masks.

    Returns:
        SamplingMask: The generated pattern.
    """
    if af < 1:
        raise InvalidArgumentError(f"Acceleration factor must be >= 1, got {af}")
    if calib < 0 or calib > height:
        raise InvalidArgumentError(f"Calibration width must lie in [0, {height}], got {calib}")
    n_lines = lines_for_acceleration(height, af)
    if n_lines < calib:
        raise InvalidConfigurationError(
            f"round({height}/{af}) = {n_lines} lines cannot hold {calib} calibration lines")

    center = central_lines(height, calib)
    center_set = set(center)
    outer = np.array([line for line in range(height) if line not in center_set], dtype=np.int64)
    rng = np.random.default_rng(seed)
    drawn = rng.choice(outer, size=n_lines - calib, replace=False) if n_lines > calib else []
    return SamplingMask(height, width, center + [int(line) for line in drawn], seed=seed)


def mask_tensor(mask: Union[SamplingMask, torch.Tensor], device: Union[str, torch.device] = "cpu") -> torch.Tensor:
    """Return the broadcastable boolean tensor of a mask (tensors pass through)."""
    if isinstance(mask, SamplingMask):
        return mask.as_tensor(device)
    return mask.to(device=device, dtype=torch.bool)


def check_mask_shape(ksp: torch.Tensor, mask: Union[SamplingMask, torch.Tensor]):
    if isinstance(mask, SamplingMask):
        if tuple(ksp.shape[-2:]) != mask.shape:
            raise ShapeMismatchError(f"Mask {mask.shape} does not match k-space frame {tuple(ksp.shape[-2:])}")
    elif mask.shape[-2] != ksp.shape[-2] or mask.shape[-1] not in (1, ksp.shape[-1]):
        raise ShapeMismatchError(f"Mask {tuple(mask.shape)} does not match k-space frame {tuple(ksp.shape[-2:])}")


def apply_mask(ksp: torch.Tensor, mask: Union[SamplingMask, torch.Tensor]) -> torch.Tensor:
    """
    Keep acquired lines verbatim and zero every other sample.

    Args:
        ksp (torch.Tensor): Complex k-space, shape (..., H, W).
        mask (Union[SamplingMask, torch.Tensor]): Pattern or its boolean tensor.

    Returns:
        torch.Tensor: Masked k-space.
    """
    check_mask_shape(ksp, mask)
    rows = mask_tensor(mask, ksp.device)
    return torch.where(rows, ksp, torch.zeros((), dtype=ksp.dtype, device=ksp.device))
