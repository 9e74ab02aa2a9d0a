"""
Reconstruction Package

This package provides the non-learned baselines (zero-filled and POCSENSE), the
record reconstruction driver shared by the command line, and the writers for
reconstructed images.
"""

from Reconstruction.baselines import PocsenseResult, zero_filled, pocsense_iterate
from Reconstruction.reconstructor import (
    Reconstruction,
    Reconstructor,
    worker_count,
    METHOD_MODEL,
    METHOD_ZERO_FILLED,
    METHOD_POCSENSE,
    BASELINES,
    THREADS_ENV
)
from Reconstruction.image_writer import encode_pgm, write_reconstructions, RECON_INDEX_FILE

__all__ = [
    'PocsenseResult',
    'zero_filled',
    'pocsense_iterate',
    'Reconstruction',
    'Reconstructor',
    'worker_count',
    'METHOD_MODEL',
    'METHOD_ZERO_FILLED',
    'METHOD_POCSENSE',
    'BASELINES',
    'THREADS_ENV',
    'encode_pgm',
    'write_reconstructions',
    'RECON_INDEX_FILE'
]
