"""
Cascade Module

This module defines the two end-to-end reconstruction networks, each an
interleaving of denoising sub-networks and data-consistency layers:

- D-POCSENSE works on a single sensitivity-weighted recombined image and
  enforces consistency through the encoding operator.
- DC-CNN works on the stacked coil images and enforces consistency per coil,
  without sensitivity maps.
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional

import torch
import torch.nn as nn

from exceptions import InvalidConfigurationError, ShapeMismatchError, VariantMismatchError
from Networks.data_consistency import DEFAULT_LAMBDA, DcParam, dc_combined, dc_percoil
from Networks.denoiser import Subnet, init_params
from Operators.encoding import MapsLike, MaskLike, adjoint_op
from Operators.fourier import fft2c, ifft2c

DPOCSENSE = "dpocsense"
DCCNN = "dccnn"
VARIANTS = (DPOCSENSE, DCCNN)
VARIANT_LABELS = {DPOCSENSE: "D-POCSENSE", DCCNN: "DC-CNN"}


@dataclass
class ModelConfig:
    """
    Architecture of a cascade network.

    Attributes:
        variant (str): "dpocsense" or "dccnn".
        n_c (int): Number of cascades (sub-network + DC layer pairs).
        n_d (int): Convolution layers per sub-network.
        n_filters (int): Hidden channel width.
        kernel_size (int): Spatial kernel size.
        dilation (int): Dilation of hidden convolution layers.
        lambda_init (float): Initial DC blending weight.
        lambda_trainable (bool): Whether lambda is learned.
        shared_lambda (bool): One lambda for all DC layers instead of one per layer.
    """
    variant: str = DPOCSENSE
    n_c: int = 3
    n_d: int = 3
    n_filters: int = 32
    kernel_size: int = 3
    dilation: int = 2
    lambda_init: float = DEFAULT_LAMBDA
    lambda_trainable: bool = True
    shared_lambda: bool = False

    @classmethod
    def desk_scale(cls, variant: str = DPOCSENSE) -> "ModelConfig":
        return cls(variant=variant, n_c=3, n_d=3, n_filters=32)

    @classmethod
    def full_scale(cls, variant: str = DPOCSENSE) -> "ModelConfig":
        return cls(variant=variant, n_c=10, n_d=5, n_filters=64)

    def validate(self):
        if self.variant not in VARIANTS:
            raise InvalidConfigurationError(f"Unknown variant '{self.variant}', expected one of {VARIANTS}")
        if self.n_c < 1 or self.n_d < 1 or self.n_filters < 1:
            raise InvalidConfigurationError(
                f"n_c, n_d and n_filters must be >= 1, got {self.n_c}, {self.n_d}, {self.n_filters}")


class CascadeModel(nn.Module):
    """
    A cascade of n_c sub-networks interleaved with n_c data-consistency layers.

    Attributes:
        config (ModelConfig): Architecture description.
        n_coil (int): Coil count the model was built for.
        height (int): Frame height the model was built for.
        width (int): Frame width the model was built for.
        subnets (nn.ModuleList): The n_c sub-networks, in cascade order.
        dc_params (nn.ModuleList): The n_c DC weights (the same module repeated when shared).
    """

    def __init__(self, config: ModelConfig, n_coil: int, height: int, width: int, seed: int = 0):
        super().__init__()
        config.validate()
        self.config = config
        self.n_coil = n_coil
        self.height = height
        self.width = width
        self.seed = seed

        n_img = 1 if config.variant == DPOCSENSE else n_coil
        self.subnets = nn.ModuleList([
            init_params(config.n_d, config.n_filters, n_img, config.dilation, seed + cascade, config.kernel_size)
            for cascade in range(config.n_c)
        ])
        if config.shared_lambda:
            shared = DcParam(config.lambda_init, config.lambda_trainable)
            self.dc_params = nn.ModuleList([shared] * config.n_c)
        else:
            self.dc_params = nn.ModuleList([
                DcParam(config.lambda_init, config.lambda_trainable) for _ in range(config.n_c)
            ])

    @property
    def variant(self) -> str:
        return self.config.variant

    @property
    def n_c(self) -> int:
        return self.config.n_c

    def unique_dc_params(self) -> List[DcParam]:
        """DC weights without repetition, in layer order."""
        seen, unique = set(), []
        for param in self.dc_params:
            if id(param) not in seen:
                seen.add(id(param))
                unique.append(param)
        return unique

    def lambdas(self) -> List[float]:
        return [param.lambda_value for param in self.dc_params]

    def describe(self) -> Dict[str, Any]:
        """Configuration echo used in checkpoint headers."""
        return {
            **asdict(self.config),
            "n_coil": self.n_coil,
            "height": self.height,
            "width": self.width,
            "seed": self.seed,
        }

    def forward(self, s_0: torch.Tensor, mask: MaskLike, maps: Optional[MapsLike] = None,
                trace: Optional[List[torch.Tensor]] = None) -> torch.Tensor:
        if self.variant == DPOCSENSE:
            return dpocsense_forward(s_0, maps, mask, self, trace)
        return dccnn_forward(s_0, mask, self, trace)

    def __str__(self) -> str:
        n_params = sum(p.numel() for p in self.parameters())
        return (f"{VARIANT_LABELS[self.variant]} cascade: n_c={self.n_c}, n_d={self.config.n_d}, "
                f"filters={self.config.n_filters}, coils={self.n_coil}, {n_params} parameters")


def _check_variant(model: CascadeModel, expected: str):
    if model.variant != expected:
        raise VariantMismatchError(
            f"{VARIANT_LABELS[expected]} forward called on a {VARIANT_LABELS[model.variant]} model")


def _check_coils(s_0: torch.Tensor, model: CascadeModel):
    if s_0.dim() < 3 or s_0.shape[-3] != model.n_coil:
        raise ShapeMismatchError(f"Model was built for {model.n_coil} coils, got k-space {tuple(s_0.shape)}")


def dpocsense_forward(s_0: torch.Tensor, maps: MapsLike, mask: MaskLike, model: CascadeModel,
                      trace: Optional[List[torch.Tensor]] = None) -> torch.Tensor:
    """
    Reconstruct a recombined image with the sensitivity-based cascade.

    Args:
        s_0 (torch.Tensor): Acquired (masked) k-space, shape (..., n_coil, H, W).
        maps (MapsLike): Coil sensitivity maps.
        mask (MaskLike): Sampling pattern.
        model (CascadeModel): A D-POCSENSE model.
        trace (Optional[List[torch.Tensor]]): Receives the pre-recombination k-space of every DC layer.

    Returns:
        torch.Tensor: Reconstructed image, shape (..., H, W).
    """
    _check_variant(model, DPOCSENSE)
    _check_coils(s_0, model)
    if maps is None:
        raise ShapeMismatchError("D-POCSENSE requires sensitivity maps")
    x = adjoint_op(s_0, maps, mask)
    for subnet, dc_param in zip(model.subnets, model.dc_params):
        x_cnn = subnet(x.unsqueeze(-3)).squeeze(-3)
        x = dc_combined(x_cnn, s_0, maps, mask, dc_param.value(), trace)
    return x


def dccnn_forward(s_0: torch.Tensor, mask: MaskLike, model: CascadeModel,
                  trace: Optional[List[torch.Tensor]] = None) -> torch.Tensor:
    """
    Reconstruct every coil image jointly with the calibration-less cascade.

    Args:
        s_0 (torch.Tensor): Acquired (masked) k-space, shape (..., n_coil, H, W).
        mask (MaskLike): Sampling pattern.
        model (CascadeModel): A DC-CNN model.
        trace (Optional[List[torch.Tensor]]): Receives the k-space of every DC layer output.

    Returns:
        torch.Tensor: Reconstructed coil images, shape (..., n_coil, H, W).
    """
    _check_variant(model, DCCNN)
    _check_coils(s_0, model)
    x = ifft2c(s_0)
    for subnet, dc_param in zip(model.subnets, model.dc_params):
        s_cnn = fft2c(subnet(x))
        s_rec = dc_percoil(s_cnn, s_0, mask, dc_param.value())
        if trace is not None:
            trace.append(s_rec)
        x = ifft2c(s_rec)
    return x


def build_model(config: ModelConfig, n_coil: int, height: int, width: int, seed: int = 0,
                dtype: torch.dtype = torch.float64) -> CascadeModel:
    """Construct a cascade model and cast its parameters to the given real dtype."""
    return CascadeModel(config, n_coil, height, width, seed).to(dtype)
