"""
Training Package

This package provides everything needed to fit a cascade network: sample
preparation and batching, the two losses, the Adam update, the training loop
and the binary checkpoint format.
"""

from Operators.fourier import precision_dtypes as precision
from Training.samples import TrainingSample, TrainingBatch, prepare_sample, collate, intensity_scale
from Training.losses import (
    loss_recombined,
    loss_coilwise,
    batch_loss,
    LOSS_RECOMBINED,
    LOSS_COILWISE,
    LOSS_VARIANTS,
    DEFAULT_LOSS
)
from Training.optimizer import AdamState, adam_step
from Training.checkpoint import save_checkpoint, load_checkpoint, encode_checkpoint, decode_checkpoint
from Training.trainer import TrainConfig, TrainResult, Gradients, compute_gradients, train, trainable_parameters

__all__ = [
    'precision',
    'TrainingSample',
    'TrainingBatch',
    'prepare_sample',
    'collate',
    'intensity_scale',
    'loss_recombined',
    'loss_coilwise',
    'batch_loss',
    'LOSS_RECOMBINED',
    'LOSS_COILWISE',
    'LOSS_VARIANTS',
    'DEFAULT_LOSS',
    'AdamState',
    'adam_step',
    'save_checkpoint',
    'load_checkpoint',
    'encode_checkpoint',
    'decode_checkpoint',
    'TrainConfig',
    'TrainResult',
    'Gradients',
    'compute_gradients',
    'train',
    'trainable_parameters'
]
