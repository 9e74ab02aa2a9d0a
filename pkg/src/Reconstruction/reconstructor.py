"""
Reconstructor Module

This module reconstructs dataset records with a trained cascade or with one of
the baselines. It is shared by the `recon` and `eval` commands: every record is
prepared exactly as for training (mask, estimated maps, normalization), the
method runs on the normalized data and the scale is undone on the output.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import torch
from tqdm import tqdm

from exceptions import InvalidArgumentError, InvalidConfigurationError, ShapeMismatchError
from DatasetGeneration.dataset_entities import DatasetRecord
from Networks.cascade import DCCNN, VARIANT_LABELS, CascadeModel
from Operators.coils import combine
from Reconstruction.baselines import PocsenseResult, pocsense_iterate, zero_filled
from Training.samples import prepare_sample

METHOD_MODEL = "model"
METHOD_ZERO_FILLED = "zf"
METHOD_POCSENSE = "pocsense"
BASELINES = (METHOD_ZERO_FILLED, METHOD_POCSENSE)
BASELINE_LABELS = {METHOD_ZERO_FILLED: "Zero-filled", METHOD_POCSENSE: "POCSENSE"}

THREADS_ENV = "MRDC_THREADS"


def worker_count() -> int:
    """Worker threads allowed by MRDC_THREADS (all CPUs when unset)."""
    value = os.environ.get(THREADS_ENV)
    if not value:
        return os.cpu_count() or 1
    try:
        count = int(value)
    except ValueError:
        raise InvalidConfigurationError(f"{THREADS_ENV} must be a positive integer, got '{value}'")
    if count < 1:
        raise InvalidConfigurationError(f"{THREADS_ENV} must be a positive integer, got '{value}'")
    return count


@dataclass
class Reconstruction:
    """
    One reconstructed record, in the intensity scale of the stored k-space.

    Attributes:
        record_id (str): Source record.
        protocol (str): Protocol tag of the record.
        image (torch.Tensor): Reconstructed image, shape (H, W).
        reference (torch.Tensor): Fully sampled recombined image, shape (H, W).
        support (torch.Tensor): Boolean support of the estimated maps.
        residuals (List[float]): POCSENSE residual trace (empty for other methods).
        monotone (bool): Whether the residual trace is non-increasing within tolerance.
    """
    record_id: str
    protocol: str
    image: torch.Tensor
    reference: torch.Tensor
    support: torch.Tensor
    residuals: List[float] = field(default_factory=list)
    monotone: bool = True


class Reconstructor:
    """
    Reconstructs records with a model or a baseline.

    Attributes:
        method (str): "model", "zf" or "pocsense".
        model (Optional[CascadeModel]): The cascade for the "model" method.
        af (Optional[float]): Acceleration of regenerated masks; stored masks when None.
        calib (int): Calibration lines.
        iters (int): POCSENSE iterations.
        step (float): POCSENSE step size.
    """

    def __init__(self, method: str, model: Optional[CascadeModel] = None, af: Optional[float] = None,
                 calib: int = 24, iters: int = 30, step: float = 1.0):
        if method not in (METHOD_MODEL,) + BASELINES:
            raise InvalidArgumentError(f"Unknown method '{method}', expected 'model' or one of {BASELINES}")
        if method == METHOD_MODEL and model is None:
            raise InvalidArgumentError("The model method requires a model")
        self.method = method
        self.model = model
        self.af = af
        self.calib = calib
        self.iters = iters
        self.step = step

    @property
    def label(self) -> str:
        if self.method == METHOD_MODEL:
            return VARIANT_LABELS[self.model.variant]
        return BASELINE_LABELS[self.method]

    def _complex_dtype(self) -> torch.dtype:
        if self.model is not None and next(self.model.parameters()).dtype == torch.float32:
            return torch.complex64
        return torch.complex128

    def reconstruct(self, record: DatasetRecord) -> Reconstruction:
        """Reconstruct one record."""
        if self.model is not None and record.n_coil != self.model.n_coil:
            raise ShapeMismatchError(
                f"Record {record.record_id} has {record.n_coil} coils, model was built for {self.model.n_coil}")
        sample = prepare_sample(record, self.af, self.calib, dtype=self._complex_dtype())
        residuals, monotone = [], True
        if self.method == METHOD_ZERO_FILLED:
            image = zero_filled(sample.s_0, sample.maps, sample.mask)
        elif self.method == METHOD_POCSENSE:
            result: PocsenseResult = pocsense_iterate(sample.s_0, sample.maps, sample.mask, self.iters, self.step)
            image, residuals, monotone = result.image, result.residuals, result.is_monotone()
        else:
            with torch.no_grad():
                image = self.model(sample.s_0, sample.mask, sample.maps)
                if self.model.variant == DCCNN:
                    image = combine(image, sample.maps)

        return Reconstruction(record.record_id, record.protocol, image.detach() * sample.scale,
                              sample.reference * sample.scale, sample.maps.support, residuals, monotone)

    def reconstruct_dataset(self, records: List[DatasetRecord], show_progress: bool = False) -> List[Reconstruction]:
        """
        Reconstruct records on a thread pool; results are ordered by record id.

        Args:
            records (List[DatasetRecord]): Records to reconstruct.
            show_progress (bool, optional): Whether to show a progress bar. Defaults to False.

        Returns:
            List[Reconstruction]: One reconstruction per record.
        """
        ordered = sorted(records, key=lambda record: record.record_id)
        with ThreadPoolExecutor(max_workers=min(worker_count(), max(len(ordered), 1))) as pool:
            results = pool.map(self.reconstruct, ordered)
            if show_progress:
                results = tqdm(results, total=len(ordered), desc=f"Reconstructing ({self.label})", unit="record")
            return list(results)
