"""
Shared fixtures for the toolkit tests.

Tests run with ``src`` on the import path (see pytest.ini).
"""

import numpy as np
import pytest
import torch

from DatasetGeneration.acquisition import simulate_dataset
from Networks.cascade import DCCNN, DPOCSENSE, ModelConfig, build_model
from Operators.coils import simulate_sensitivities
from Training.samples import collate, prepare_sample


def random_complex(shape, seed=0, dtype=torch.complex128):
    """Standard complex Gaussian samples of the given shape."""
    generator = torch.Generator().manual_seed(seed)
    real = torch.randn(shape, generator=generator, dtype=torch.float64)
    imag = torch.randn(shape, generator=generator, dtype=torch.float64)
    return torch.complex(real, imag).to(dtype)


@pytest.fixture
def np_rng():
    return np.random.default_rng(1234)


@pytest.fixture
def maps_8x8():
    return simulate_sensitivities(8, 8, 4, seed=3)


@pytest.fixture
def small_records():
    """Two noiseless 8x8, 2-coil records whose masks hold only the 4 calibration lines."""
    return simulate_dataset(2, 8, 2, 0.0, seed=5, af=2, calib=4, n_ellipses=3)


@pytest.fixture
def small_batch(small_records):
    return collate([prepare_sample(record, calib=4) for record in small_records])


@pytest.fixture
def full_batch(small_records):
    """Batch whose masks acquire every line."""
    return collate([prepare_sample(record, af=1.0, calib=4) for record in small_records])


def tiny_model(variant, n_coil=2, size=8, seed=11, **overrides):
    settings = dict(variant=variant, n_c=2, n_d=2, n_filters=4)
    settings.update(overrides)
    return build_model(ModelConfig(**settings), n_coil, size, size, seed)


@pytest.fixture(params=[DPOCSENSE, DCCNN])
def variant(request):
    return request.param
