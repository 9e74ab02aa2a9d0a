"""
Evaluation Package

This package provides the PSNR and SSIM image-quality metrics and the
per-protocol evaluation report.
"""

from Evaluation.metrics import psnr, ssim, ssim_map, gaussian_window, magnitude
from Evaluation.report import EvaluationReport, MetricSummary, RecordMetrics, evaluate_reconstructions

__all__ = [
    'psnr',
    'ssim',
    'ssim_map',
    'gaussian_window',
    'magnitude',
    'EvaluationReport',
    'MetricSummary',
    'RecordMetrics',
    'evaluate_reconstructions'
]
