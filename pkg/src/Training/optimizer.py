"""
Optimizer Module

This module implements the Adam update with bias correction as a pure step
function over lists of parameter and gradient tensors.
"""

from dataclasses import dataclass, field
from typing import List

import torch

from exceptions import ShapeMismatchError

BETA1 = 0.9
BETA2 = 0.999
EPSILON = 1e-8


@dataclass
class AdamState:
    """
    First and second moment estimates of every parameter.

    Attributes:
        m (List[torch.Tensor]): First moments, shaped like the parameters.
        v (List[torch.Tensor]): Second moments, shaped like the parameters.
        step (int): Number of updates applied so far.
        beta1 (float): First-moment decay.
        beta2 (float): Second-moment decay.
        eps (float): Denominator offset.
    """
    m: List[torch.Tensor] = field(default_factory=list)
    v: List[torch.Tensor] = field(default_factory=list)
    step: int = 0
    beta1: float = BETA1
    beta2: float = BETA2
    eps: float = EPSILON

    @classmethod
    def for_params(cls, params: List[torch.Tensor], **kwargs) -> "AdamState":
        """Zero moments matching the given parameters."""
        return cls(
            m=[torch.zeros_like(p, memory_format=torch.preserve_format).detach() for p in params],
            v=[torch.zeros_like(p, memory_format=torch.preserve_format).detach() for p in params],
            **kwargs,
        )


def adam_step(params: List[torch.Tensor], grads: List[torch.Tensor], state: AdamState, lr: float) -> AdamState:
    """
    Apply one Adam update in place.

    m <- b1 m + (1 - b1) g;  v <- b2 v + (1 - b2) g^2;
    p <- p - lr * m_hat / (sqrt(v_hat) + eps) with the bias-corrected moments.

    Args:
        params (List[torch.Tensor]): Parameters, updated in place.
        grads (List[torch.Tensor]): Gradients in the same order.
        state (AdamState): Moments, updated in place.
        lr (float): Learning rate.

    Returns:
        AdamState: The updated state (the same object).
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ShapeMismatchError(
            f"Got {len(params)} parameters, {len(grads)} gradients and {len(state.m)} moment slots")
    for param, grad, m in zip(params, grads, state.m):
        if param.shape != grad.shape or param.shape != m.shape:
            raise ShapeMismatchError(f"Parameter {tuple(param.shape)} has gradient {tuple(grad.shape)}")

    state.step += 1
    bias1 = 1.0 - state.beta1 ** state.step
    bias2 = 1.0 - state.beta2 ** state.step
    with torch.no_grad():
        for param, grad, m, v in zip(params, grads, state.m, state.v):
            m.mul_(state.beta1).add_(grad, alpha=1.0 - state.beta1)
            v.mul_(state.beta2).addcmul_(grad, grad, value=1.0 - state.beta2)
            m_hat = m / bias1
            v_hat = v / bias2
            param.sub_(lr * m_hat / (v_hat.sqrt() + state.eps))
    return state
