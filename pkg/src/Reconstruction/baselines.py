"""
Baselines Module

This module provides the two non-learned reconstructions: the zero-filled
adjoint and the classical POCSENSE iteration (a Landweber gradient step on the
data residual followed by a hard data-consistency projection).
"""

import math
from dataclasses import dataclass, field
from typing import List

import torch

from exceptions import InvalidArgumentError, NonFiniteError
from Networks.data_consistency import dc_combined
from Operators.encoding import MapsLike, MaskLike, SenseOperator, adjoint_op
from Operators.sampling import apply_mask

MONOTONE_TOLERANCE = 1e-9


@dataclass
class PocsenseResult:
    """
    Output of the POCSENSE iteration.

    Attributes:
        image (torch.Tensor): Final iterate, shape (H, W).
        residuals (List[float]): Data residual norm after every iteration.
        consistency_errors (List[float]): Largest deviation of the projected k-space
            from the acquired samples, per iteration.
    """
    image: torch.Tensor
    residuals: List[float] = field(default_factory=list)
    consistency_errors: List[float] = field(default_factory=list)

    def is_monotone(self, tol: float = MONOTONE_TOLERANCE) -> bool:
        """Whether the residual trace never increases by more than tol (relative to its start)."""
        slack = tol * max(self.residuals[0], 1.0) if self.residuals else 0.0
        return all(later <= earlier + slack for earlier, later in zip(self.residuals, self.residuals[1:]))


def zero_filled(s_0: torch.Tensor, maps: MapsLike, mask: MaskLike) -> torch.Tensor:
    """The aliased adjoint reconstruction E^H s_0."""
    return adjoint_op(s_0, maps, mask)


def pocsense_iterate(s_0: torch.Tensor, maps: MapsLike, mask: MaskLike, iters: int = 30,
                     step: float = 1.0) -> PocsenseResult:
    """
    Run projected Landweber iterations from the zero-filled image.

    Each iteration applies x <- x - step * E^H (E x - s_0) and then replaces the
    acquired samples of the coil k-space of x by s_0 before recombining.

    Args:
        s_0 (torch.Tensor): Acquired k-space, shape (n_coil, H, W).
        maps (MapsLike): Coil maps.
        mask (MaskLike): Sampling pattern.
        iters (int): Number of iterations, >= 1.
        step (float): Gradient step size; the residual trace is non-increasing for step <= 1.

    Returns:
        PocsenseResult: Final image and per-iteration traces.
    """
    if iters < 1:
        raise InvalidArgumentError(f"iters must be >= 1, got {iters}")
    if step < 0:
        raise InvalidArgumentError(f"step must be >= 0, got {step}")

    encoder = SenseOperator(maps, mask)
    x = zero_filled(s_0, maps, mask)
    result = PocsenseResult(x)
    for iteration in range(iters):
        x = x - step * encoder.H(encoder.residual(x, s_0))
        projected = []
        x = dc_combined(x, s_0, maps, mask, 0.0, projected)
        residual = float(torch.linalg.vector_norm(encoder.residual(x, s_0)))
        result.residuals.append(residual)
        result.consistency_errors.append(
            float(torch.max(torch.abs(apply_mask(projected[0] - s_0, mask)))))
        if not torch.isfinite(x).all() or not math.isfinite(residual):
            raise NonFiniteError(f"POCSENSE iterate became non-finite at iteration {iteration + 1}", {
                "iteration": iteration + 1,
                "residuals": list(result.residuals),
            })
    result.image = x
    return result
