"""
MRDC Package

This package provides a parallel-MRI reconstruction toolkit: encoding
operators, the D-POCSENSE and DC-CNN data-consistency cascades, classical
baselines, image-quality metrics and synthetic multi-coil datasets.
"""

__version__ = '0.1.0'
