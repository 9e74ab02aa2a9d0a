"""
Trainer Module

This module computes exact reverse-mode gradients of the training losses and
runs the seeded mini-batch training loop with Adam, periodic checkpoints and a
state dump when the loss stops being finite.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import torch
from tqdm import tqdm

from exceptions import InvalidArgumentError, InvalidConfigurationError, NonFiniteError, ShapeMismatchError
from DatasetGeneration.dataset_entities import DatasetRecord
from Networks.cascade import CascadeModel
from Operators.fourier import precision_dtypes
from Training.checkpoint import save_checkpoint
from Training.losses import DEFAULT_LOSS, LOSS_VARIANTS, batch_loss
from Training.optimizer import AdamState, adam_step
from Training.samples import TrainingBatch, TrainingSample, collate, prepare_sample

MASK_EPOCH_STRIDE = 7919


@dataclass
class TrainConfig:
    """
    Training hyper-parameters.

    Attributes:
        lr (float): Adam learning rate (0 freezes the parameters).
        epochs (int): Passes over the dataset.
        batch_size (int): Records per mini-batch.
        seed (int): Seed of the per-epoch shuffles.
        loss (Optional[str]): "recombined" or "coilwise"; the variant's default when None.
        precision (str): "double" or "single".
        af (Optional[float]): Acceleration of regenerated training masks; stored masks when None.
        calib (int): Calibration lines for masks and map estimation.
        resample_masks (bool): Draw a fresh mask for every record in every epoch.
        checkpoint_every (int): Epoch interval between checkpoints (0 disables them).
        checkpoint_path (Optional[str]): Checkpoint destination.
        show_progress (bool): Whether to show progress bars and epoch lines.
    """
    lr: float = 1e-3
    epochs: int = 30
    batch_size: int = 4
    seed: int = 0
    loss: Optional[str] = None
    precision: str = "double"
    af: Optional[float] = 4.0
    calib: int = 24
    resample_masks: bool = False
    checkpoint_every: int = 10
    checkpoint_path: Optional[str] = None
    show_progress: bool = False

    @classmethod
    def desk_scale(cls, **overrides) -> "TrainConfig":
        return cls(**{'lr': 1e-3, 'epochs': 30, 'batch_size': 4, **overrides})

    @classmethod
    def full_scale(cls, **overrides) -> "TrainConfig":
        """The schedule paired with ModelConfig.full_scale: Adam at 1e-3 for 200 epochs, batches of 4."""
        return cls(**{'lr': 1e-3, 'epochs': 200, 'batch_size': 4, **overrides})

    def validate(self):
        if self.lr < 0:
            raise InvalidConfigurationError(f"Learning rate must be >= 0, got {self.lr}")
        if self.epochs < 0 or self.batch_size < 1:
            raise InvalidConfigurationError(
                f"epochs must be >= 0 and batch_size >= 1, got {self.epochs} and {self.batch_size}")
        if self.loss is not None and self.loss not in LOSS_VARIANTS:
            raise InvalidConfigurationError(f"Unknown loss '{self.loss}', expected one of {LOSS_VARIANTS}")
        if self.checkpoint_every < 0:
            raise InvalidConfigurationError(f"checkpoint_every must be >= 0, got {self.checkpoint_every}")
        precision_dtypes(self.precision)


@dataclass
class Gradients:
    """
    Loss value and gradients of one batch.

    Attributes:
        loss (float): Batch-mean loss.
        names (List[str]): Trainable parameter names, in model order.
        grads (List[torch.Tensor]): Gradient of every trainable parameter.
    """
    loss: float
    names: List[str]
    grads: List[torch.Tensor]

    def as_dict(self) -> Dict[str, torch.Tensor]:
        return dict(zip(self.names, self.grads))


@dataclass
class TrainResult:
    model: CascadeModel
    epoch_losses: List[float] = field(default_factory=list)
    step_losses: List[float] = field(default_factory=list)


def trainable_parameters(model: CascadeModel) -> List[torch.nn.Parameter]:
    """Trainable parameters without repetition (a shared lambda appears once)."""
    return [param for param in model.parameters() if param.requires_grad]


def compute_gradients(model: CascadeModel, batch: TrainingBatch, loss_variant: Optional[str] = None) -> Gradients:
    """
    Exact gradients of the batch-mean loss with respect to every trainable parameter.

    Args:
        model (CascadeModel): The model to differentiate.
        batch (TrainingBatch): A non-empty batch.
        loss_variant (Optional[str]): Loss to use; the variant's default when None.

    Returns:
        Gradients: Loss and gradients in model parameter order.
    """
    if len(batch) == 0:
        raise InvalidArgumentError("Cannot compute gradients of an empty batch")
    named = [(name, param) for name, param in model.named_parameters() if param.requires_grad]
    loss = batch_loss(model, batch, loss_variant)
    if not torch.isfinite(loss):
        raise NonFiniteError(f"Loss is {float(loss)}", {
            "loss": float(loss),
            "lambdas": model.lambdas(),
            "batch_size": len(batch),
        })
    grads = torch.autograd.grad(loss, [param for _, param in named], allow_unused=True)
    grads = [torch.zeros_like(param) if grad is None else grad.detach()
             for (_, param), grad in zip(named, grads)]
    return Gradients(float(loss.detach()), [name for name, _ in named], grads)


def _check_records(model: CascadeModel, records: List[DatasetRecord]):
    if not records:
        raise InvalidArgumentError("Cannot train on an empty dataset")
    for record in records:
        if (record.n_coil, record.height, record.width) != (model.n_coil, model.height, model.width):
            raise ShapeMismatchError(
                f"Record {record.record_id} has shape {(record.n_coil, record.height, record.width)}, model was "
                f"built for {(model.n_coil, model.height, model.width)}")


def _dump_state(model: CascadeModel, config: TrainConfig, epoch: int) -> Optional[str]:
    if not config.checkpoint_path:
        return None
    path = Path(config.checkpoint_path)
    return str(save_checkpoint(model, str(path.with_name(path.name + ".nonfinite")), epoch))


def train(model: CascadeModel, records: List[DatasetRecord], config: TrainConfig) -> TrainResult:
    """
    Train a model with shuffled mini-batches and Adam.

    Samples are prepared once unless ``resample_masks`` is set, in which case a
    new mask is drawn for every record in every epoch. Shuffles use a numpy
    generator seeded with ``config.seed``, so runs with equal inputs are
    identical.

    Args:
        model (CascadeModel): The model to train, updated in place.
        records (List[DatasetRecord]): Training records.
        config (TrainConfig): Hyper-parameters.

    Returns:
        TrainResult: The model and its per-epoch and per-step loss traces.
    """
    # Check configuration and record shapes
    config.validate()
    _check_records(model, records)
    _, complex_dtype = precision_dtypes(config.precision)
    loss_variant = config.loss or DEFAULT_LOSS[model.variant]

    def samples_for(epoch: int) -> List[TrainingSample]:
        return [
            prepare_sample(record, config.af, config.calib,
                           record.seed + MASK_EPOCH_STRIDE * epoch if config.resample_masks else None,
                           complex_dtype)
            for record in records
        ]

    # Set up optimizer state and the shuffle generator
    params = trainable_parameters(model)
    state = AdamState.for_params(params)
    rng = np.random.default_rng(config.seed)
    result = TrainResult(model)
    # Fixed masks are prepared once
    samples = None if config.resample_masks else samples_for(0)

    if config.show_progress:
        print(f"Training {model} on {len(records)} records ({loss_variant} loss, lr={config.lr})")
    epochs = range(1, config.epochs + 1)
    if config.show_progress:
        epochs = tqdm(epochs, desc="Training", unit="epoch")

    for epoch in epochs:
        epoch_samples = samples_for(epoch) if config.resample_masks else samples
        order = rng.permutation(len(epoch_samples))

        # Process mini-batches
        step_losses = []
        for start in range(0, len(order), config.batch_size):
            batch = collate([epoch_samples[i] for i in order[start:start + config.batch_size]])
            try:
                gradients = compute_gradients(model, batch, loss_variant)
            except NonFiniteError as e:
                e.diagnostic.update(epoch=epoch, step=len(result.step_losses),
                                    dump=_dump_state(model, config, epoch))
                raise
            adam_step(params, gradients.grads, state, config.lr)
            step_losses.append(gradients.loss)

        # Record epoch loss
        result.step_losses.extend(step_losses)
        result.epoch_losses.append(float(np.mean(step_losses)))
        if config.show_progress:
            lambdas = ", ".join(f"{value:.4f}" for value in model.lambdas())
            tqdm.write(f"epoch {epoch}/{config.epochs}  loss {result.epoch_losses[-1]:.4e}  lambda [{lambdas}]")
        # Periodic checkpoint
        if config.checkpoint_path and config.checkpoint_every and epoch % config.checkpoint_every == 0:
            save_checkpoint(model, config.checkpoint_path, epoch)

    # Final checkpoint
    if config.checkpoint_path:
        save_checkpoint(model, config.checkpoint_path, config.epochs)
    return result
