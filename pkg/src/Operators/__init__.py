"""
Operators Package

This package provides the classical parallel-imaging operators: the centered
Fourier transform, Cartesian sampling masks, coil sensitivity maps and the SENSE
encoding operator built from them.
"""

from Operators.fourier import (
    fft2c,
    ifft2c,
    inner_product,
    complex_to_channels,
    channels_to_complex,
    precision_dtypes
)
from Operators.sampling import SamplingMask, generate_mask, apply_mask, central_lines
from Operators.coils import (
    SensitivityMaps,
    simulate_sensitivities,
    estimate_sensitivities,
    combine,
    expand
)
from Operators.encoding import SenseOperator, forward_op, adjoint_op

__all__ = [
    'fft2c',
    'ifft2c',
    'inner_product',
    'complex_to_channels',
    'channels_to_complex',
    'precision_dtypes',
    'SamplingMask',
    'generate_mask',
    'apply_mask',
    'central_lines',
    'SensitivityMaps',
    'simulate_sensitivities',
    'estimate_sensitivities',
    'combine',
    'expand',
    'SenseOperator',
    'forward_op',
    'adjoint_op'
]
