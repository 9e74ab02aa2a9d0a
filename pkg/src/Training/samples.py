"""
Samples Module

This module turns dataset records into training samples: it applies (or
regenerates) the sampling mask, estimates sensitivity maps from the
calibration lines, normalizes intensities and builds the ground truths of both
network variants.
"""

from dataclasses import dataclass
from typing import List, Optional

import torch

from exceptions import ShapeMismatchError
from DatasetGeneration.dataset_entities import DatasetRecord
from Operators.coils import SensitivityMaps, combine, estimate_sensitivities
from Operators.encoding import adjoint_op
from Operators.fourier import ifft2c
from Operators.sampling import SamplingMask, generate_mask

NORMALIZATION_QUANTILE = 0.99


@dataclass
class TrainingSample:
    """
    One normalized training (or evaluation) pair.

    Attributes:
        record_id (str): Source record.
        protocol (str): Protocol tag of the source record.
        s_0 (torch.Tensor): Acquired k-space divided by ``scale``, shape (n_coil, H, W).
        mask (SamplingMask): Acquisition pattern.
        maps (SensitivityMaps): Maps estimated from the calibration lines.
        reference (torch.Tensor): Recombined fully sampled image, shape (H, W).
        coil_truth (torch.Tensor): Fully sampled coil images, shape (n_coil, H, W).
        scale (float): 99th-percentile magnitude of the zero-filled image.
    """
    record_id: str
    protocol: str
    s_0: torch.Tensor
    mask: SamplingMask
    maps: SensitivityMaps
    reference: torch.Tensor
    coil_truth: torch.Tensor
    scale: float


@dataclass
class TrainingBatch:
    """
    Stacked samples; the mask is a boolean (B, 1, H, 1) tensor.
    """
    s_0: torch.Tensor
    mask: torch.Tensor
    maps: torch.Tensor
    reference: torch.Tensor
    coil_truth: torch.Tensor

    def __len__(self) -> int:
        return self.s_0.shape[0]


def intensity_scale(image: torch.Tensor) -> float:
    """99th-percentile magnitude of an image, or 1 for an all-zero image."""
    scale = float(torch.quantile(image.abs().flatten(), NORMALIZATION_QUANTILE))
    return scale if scale > 0 else 1.0


def prepare_sample(record: DatasetRecord, af: Optional[float] = None, calib: int = 24,
                   mask_seed: Optional[int] = None, dtype: torch.dtype = torch.complex128) -> TrainingSample:
    """
    Build a normalized sample from a record.

    Args:
        record (DatasetRecord): Source record with fully sampled k-space.
        af (Optional[float]): Acceleration factor of a regenerated mask; the stored mask when None.
        calib (int): Calibration lines used for the mask and the map estimate.
        mask_seed (Optional[int]): Seed of the regenerated mask; the record seed when None.
        dtype (torch.dtype): Complex dtype of the sample tensors.

    Returns:
        TrainingSample: The prepared sample.
    """
    if af is None:
        mask = record.mask
    else:
        seed = record.seed if mask_seed is None else mask_seed
        mask = generate_mask(record.height, record.width, af, calib, seed)

    kspace = record.kspace.to(dtype)
    s_0 = record.undersampled(mask).to(dtype)
    maps = estimate_sensitivities(s_0, mask, calib)
    scale = intensity_scale(adjoint_op(s_0, maps, mask))

    s_0 = s_0 / scale
    coil_truth = ifft2c(kspace / scale)
    reference = combine(coil_truth, maps)
    return TrainingSample(record.record_id, record.protocol, s_0, mask, maps, reference, coil_truth, scale)


def collate(samples: List[TrainingSample]) -> TrainingBatch:
    """Stack samples of identical frame size and coil count into a batch."""
    shapes = {tuple(sample.s_0.shape) for sample in samples}
    if len(shapes) != 1:
        raise ShapeMismatchError(f"Cannot batch samples of different shapes: {sorted(shapes)}")
    masks = torch.stack([sample.mask.as_tensor() for sample in samples]).unsqueeze(1)
    return TrainingBatch(
        s_0=torch.stack([sample.s_0 for sample in samples]),
        mask=masks,
        maps=torch.stack([sample.maps.maps for sample in samples]),
        reference=torch.stack([sample.reference for sample in samples]),
        coil_truth=torch.stack([sample.coil_truth for sample in samples]),
    )
