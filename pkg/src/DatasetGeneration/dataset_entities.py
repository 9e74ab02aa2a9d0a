"""
Dataset Entities Module

This module defines the classes that represent a synthetic multi-coil dataset:
one DatasetRecord per simulated acquisition and the Dataset that holds them.
"""

from typing import Any, Dict, List, Optional

import torch

from Operators.coils import SensitivityMaps
from Operators.sampling import SamplingMask, apply_mask


class DatasetRecord:
    """
    Represents one simulated acquisition in fully sampled form.

    Masking is applied when the record is used, so the same record can serve
    several acceleration factors.

    Attributes:
        record_id (str): Unique identifier of the record.
        protocol (str): Protocol tag the phantom was drawn from.
        kspace (torch.Tensor): Fully sampled k-space, shape (n_coil, H, W).
        mask (SamplingMask): Stored acquisition pattern.
        maps (Optional[SensitivityMaps]): Reference sensitivity maps, if kept.
        noise_sigma (float): Standard deviation of the complex acquisition noise.
        seed (int): Seed the record was generated with.
    """

    def __init__(self, record_id: str, protocol: str, kspace: torch.Tensor, mask: SamplingMask,
                 maps: Optional[SensitivityMaps] = None, noise_sigma: float = 0.0, seed: int = 0):
        self.record_id = record_id
        self.protocol = protocol
        self.kspace = kspace
        self.mask = mask
        self.maps = maps
        self.noise_sigma = noise_sigma
        self.seed = seed

    @property
    def n_coil(self) -> int:
        return self.kspace.shape[0]

    @property
    def height(self) -> int:
        return self.kspace.shape[-2]

    @property
    def width(self) -> int:
        return self.kspace.shape[-1]

    def undersampled(self, mask: Optional[SamplingMask] = None) -> torch.Tensor:
        """Acquired k-space s_0 for the stored mask or the one given."""
        return apply_mask(self.kspace, mask or self.mask)

    def to_metadata(self) -> Dict[str, Any]:
        """Header fields describing the record (payloads excluded)."""
        return {
            'record_id': self.record_id,
            'protocol': self.protocol,
            'height': self.height,
            'width': self.width,
            'n_coil': self.n_coil,
            'seed': self.seed,
            'noise_sigma': self.noise_sigma,
            'sampled_lines': list(self.mask.sampled_lines),
            'mask_seed': self.mask.seed,
            'has_sens': self.maps is not None,
        }

    def __str__(self) -> str:
        lines = [f"Record: {self.record_id}"]
        lines.append(f"  Protocol: {self.protocol}")
        lines.append(f"  K-space: {self.n_coil} coils, {self.height}x{self.width}")
        lines.append(f"  Mask: {len(self.mask.sampled_lines)} lines (seed {self.mask.seed})")
        lines.append(f"  Noise sigma: {self.noise_sigma}")
        if self.maps is not None:
            lines.append(f"  Reference maps: {self.maps.n_coil} coils")
        return "\n".join(lines)


class Dataset:
    """
    Represents a collection of records sharing one on-disk directory.

    Attributes:
        format_version (int): Version of the on-disk format.
        records (List[DatasetRecord]): Records ordered by identifier.
    """

    def __init__(self, records: List[DatasetRecord], format_version: int = 1):
        self.format_version = format_version
        self.records = sorted(records, key=lambda record: record.record_id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def protocols(self) -> List[str]:
        return sorted({record.protocol for record in self})

    def get_record_by_id(self, record_id: str) -> Optional[DatasetRecord]:
        """
        Get a record by its identifier.

        Args:
            record_id (str): Identifier of the record.

        Returns:
            Optional[DatasetRecord]: The record, or None if not found.
        """
        for record in self:
            if record.record_id == record_id:
                return record
        return None

    def __str__(self) -> str:
        lines = ["Dataset:"]
        lines.append(f"  Format version: {self.format_version}")
        lines.append(f"  Records: {len(self.records)}")
        lines.append(f"  Protocols: {', '.join(self.protocols())}")
        return "\n".join(lines)
