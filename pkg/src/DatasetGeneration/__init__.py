"""
DatasetGeneration Package

This package provides synthetic phantom generation, multi-coil acquisition
simulation and the on-disk dataset format.
"""

from DatasetGeneration.dataset_entities import Dataset, DatasetRecord
from DatasetGeneration.phantom import Ellipse, PROTOCOLS, make_phantom, phantom_from_ellipses
from DatasetGeneration.acquisition import simulate_acquisition, simulate_dataset
from DatasetGeneration.dataset_writer import DatasetWriter, write_dataset
from DatasetGeneration.dataset_reader import DatasetReader, read_dataset

__all__ = [
    'Dataset',
    'DatasetRecord',
    'Ellipse',
    'PROTOCOLS',
    'make_phantom',
    'phantom_from_ellipses',
    'simulate_acquisition',
    'simulate_dataset',
    'DatasetWriter',
    'write_dataset',
    'DatasetReader',
    'read_dataset'
]
