"""
Acquisition Module

This module simulates multi-coil acquisitions of a phantom and generates whole
synthetic datasets spread over the protocol profiles.
"""

import math
from typing import List, Optional, Sequence

import numpy as np
import torch
from tqdm import tqdm

from exceptions import InvalidArgumentError, ShapeMismatchError
from DatasetGeneration.dataset_entities import DatasetRecord
from DatasetGeneration.phantom import DEFAULT_PROTOCOL, PROTOCOLS, make_phantom
from Operators.coils import SensitivityMaps, expand, simulate_sensitivities
from Operators.fourier import fft2c
from Operators.sampling import SamplingMask, generate_mask


def complex_noise(shape: Sequence[int], sigma: float, seed: int) -> torch.Tensor:
    """Circular complex Gaussian noise with E|n|^2 = sigma^2 per sample."""
    rng = np.random.default_rng(seed)
    scale = sigma / math.sqrt(2.0)
    noise = rng.normal(0.0, scale, size=shape) + 1j * rng.normal(0.0, scale, size=shape)
    return torch.from_numpy(noise)


def simulate_acquisition(phantom: torch.Tensor, maps: SensitivityMaps, mask: SamplingMask, noise_sigma: float,
                         seed: int, record_id: str = "rec0000", protocol: str = DEFAULT_PROTOCOL) -> DatasetRecord:
    """
    Acquire a phantom with the given coils and store the fully sampled k-space.

    Args:
        phantom (torch.Tensor): Complex image, shape (H, W).
        maps (SensitivityMaps): Coil maps of the same frame size.
        mask (SamplingMask): Acquisition pattern kept with the record.
        noise_sigma (float): Complex noise standard deviation, >= 0.
        seed (int): Noise seed.
        record_id (str): Identifier of the record.
        protocol (str): Protocol tag.

    Returns:
        DatasetRecord: The simulated record.
    """
    if noise_sigma < 0:
        raise InvalidArgumentError(f"noise_sigma must be >= 0, got {noise_sigma}")
    if tuple(phantom.shape) != maps.shape or mask.shape != maps.shape:
        raise ShapeMismatchError(
            f"Phantom {tuple(phantom.shape)}, maps {maps.shape} and mask {mask.shape} must share one frame size")

    kspace = fft2c(expand(phantom.to(maps.maps.dtype), maps))
    if noise_sigma > 0:
        kspace = kspace + complex_noise(kspace.shape, noise_sigma, seed).to(kspace.dtype)
    return DatasetRecord(record_id, protocol, kspace, mask, maps, noise_sigma, seed)


def simulate_dataset(n_records: int, size: int, n_coil: int, noise_sigma: float, seed: int,
                     protocols: Optional[Sequence[str]] = None, af: float = 4, calib: int = 24,
                     n_ellipses: int = 8, show_progress: bool = False) -> List[DatasetRecord]:
    """
    Generate n_records square records, cycling through the protocols.

    Every record gets its own phantom, coil maps, mask and noise seeds, all
    derived from ``seed`` so the dataset is reproducible.

    Args:
        n_records (int): Number of records.
        size (int): Frame height and width.
        n_coil (int): Coils per record.
        noise_sigma (float): Complex noise standard deviation.
        seed (int): Base seed.
        protocols (Optional[Sequence[str]]): Protocol tags; all five by default.
        af (float): Acceleration factor of the stored masks.
        calib (int): Calibration lines of the stored masks.
        n_ellipses (int): Ellipses per phantom.
        show_progress (bool): Whether to show a progress bar.

    Returns:
        List[DatasetRecord]: The generated records.
    """
    # Check protocol tags
    protocols = list(protocols or PROTOCOLS.keys())
    for protocol in protocols:
        if protocol not in PROTOCOLS:
            raise InvalidArgumentError(f"Unknown protocol '{protocol}', expected one of {sorted(PROTOCOLS)}")

    indices = range(n_records)
    if show_progress:
        indices = tqdm(indices, desc="Simulating records", unit="record")

    records = []
    for index in indices:
        # Derive per-record seeds
        record_seed = seed * 100003 + index
        protocol = protocols[index % len(protocols)]

        # Draw phantom, coil maps and mask
        phantom = make_phantom(size, size, record_seed, n_ellipses, protocol)
        maps = simulate_sensitivities(size, size, n_coil, record_seed + 1)
        mask = generate_mask(size, size, af, calib, record_seed + 2)

        # Acquire k-space
        records.append(simulate_acquisition(phantom, maps, mask, noise_sigma, record_seed + 3,
                                            record_id=f"rec{index:04d}", protocol=protocol))
    return records
