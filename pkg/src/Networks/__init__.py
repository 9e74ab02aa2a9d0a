"""
Networks Package

This package provides the data-consistency layers, the dilated CNN sub-networks
and the two cascade networks (D-POCSENSE and the calibration-less DC-CNN).
"""

from Networks.data_consistency import DcParam, dc_percoil, dc_combined
from Networks.denoiser import Subnet, conv2d_dilated, subnet_forward, init_params
from Networks.cascade import (
    CascadeModel,
    ModelConfig,
    build_model,
    dpocsense_forward,
    dccnn_forward,
    DPOCSENSE,
    DCCNN,
    VARIANTS,
    VARIANT_LABELS
)

__all__ = [
    'DcParam',
    'dc_percoil',
    'dc_combined',
    'Subnet',
    'conv2d_dilated',
    'subnet_forward',
    'init_params',
    'CascadeModel',
    'ModelConfig',
    'build_model',
    'dpocsense_forward',
    'dccnn_forward',
    'DPOCSENSE',
    'DCCNN',
    'VARIANTS',
    'VARIANT_LABELS'
]
