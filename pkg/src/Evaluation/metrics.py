"""
Metrics Module

This module computes PSNR and SSIM between a reconstruction and its reference.
Both metrics work on magnitude images and use the peak reference magnitude
inside the region of interest as the data range.
"""

import math
from typing import Optional, Union

import numpy as np
import torch
from scipy.signal import convolve2d

from exceptions import InvalidArgumentError, ShapeMismatchError, UndefinedReferenceError

ImageLike = Union[np.ndarray, torch.Tensor]

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def magnitude(image: ImageLike) -> np.ndarray:
    """Magnitude of a complex or real image as a float64 array."""
    if isinstance(image, torch.Tensor):
        image = image.detach().cpu().numpy()
    return np.abs(np.asarray(image)).astype(np.float64)


def _prepare(pred: ImageLike, ref: ImageLike, roi: Optional[ImageLike]):
    pred_mag, ref_mag = magnitude(pred), magnitude(ref)
    if pred_mag.shape != ref_mag.shape or pred_mag.ndim != 2:
        raise ShapeMismatchError(f"Expected two images of one 2D shape, got {pred_mag.shape} and {ref_mag.shape}")
    if roi is None:
        region = np.ones(ref_mag.shape, dtype=bool)
    else:
        region = np.asarray(roi.detach().cpu().numpy() if isinstance(roi, torch.Tensor) else roi, dtype=bool)
        if region.shape != ref_mag.shape:
            raise ShapeMismatchError(f"ROI {region.shape} does not match image {ref_mag.shape}")
    if not region.any():
        raise InvalidArgumentError("The region of interest is empty")
    return pred_mag, ref_mag, region


def _data_range(ref_mag: np.ndarray, region: np.ndarray, data_range: Optional[float]) -> float:
    peak = float(ref_mag[region].max()) if data_range is None else float(data_range)
    if peak <= 0:
        raise UndefinedReferenceError("The reference image is zero inside the region of interest")
    return peak


def psnr(pred: ImageLike, ref: ImageLike, roi: Optional[ImageLike] = None, data_range: Optional[float] = None) -> float:
    """
    Peak signal-to-noise ratio 10 log10(L^2 / MSE) in dB.

    Args:
        pred (ImageLike): Reconstructed image, shape (H, W).
        ref (ImageLike): Reference image, same shape.
        roi (Optional[ImageLike]): Boolean region of interest; the full frame when None.
        data_range (Optional[float]): Fixed L; the peak reference magnitude in the ROI when None.

    Returns:
        float: PSNR in dB, or math.inf when the magnitudes coincide.
    """
    pred_mag, ref_mag, region = _prepare(pred, ref, roi)
    peak = _data_range(ref_mag, region, data_range)
    mse = float(np.mean((pred_mag[region] - ref_mag[region]) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak ** 2 / mse)


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    """Normalized 2D Gaussian window."""
    offsets = np.arange(size) - (size - 1) / 2.0
    profile = np.exp(-offsets ** 2 / (2.0 * sigma ** 2))
    window = np.outer(profile, profile)
    return window / window.sum()


def ssim_map(pred_mag: np.ndarray, ref_mag: np.ndarray, peak: float,
             window: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Local SSIM at every position where the window fits inside the frame.

    Returns:
        np.ndarray: Map of shape (H - size + 1, W - size + 1).
    """
    window = gaussian_window() if window is None else window
    c1 = (SSIM_K1 * peak) ** 2
    c2 = (SSIM_K2 * peak) ** 2

    def filtered(x):
        return convolve2d(x, window, mode="valid")

    mu1 = filtered(pred_mag)
    mu2 = filtered(ref_mag)
    sigma1_sq = filtered(pred_mag * pred_mag) - mu1 * mu1
    sigma2_sq = filtered(ref_mag * ref_mag) - mu2 * mu2
    sigma12 = filtered(pred_mag * ref_mag) - mu1 * mu2

    numerator = (2 * mu1 * mu2 + c1) * (2 * sigma12 + c2)
    denominator = (mu1 * mu1 + mu2 * mu2 + c1) * (sigma1_sq + sigma2_sq + c2)
    return numerator / denominator


def ssim(pred: ImageLike, ref: ImageLike, roi: Optional[ImageLike] = None, data_range: Optional[float] = None) -> float:
    """
    Mean structural similarity over the region of interest.

    Local statistics use an 11x11 Gaussian window (sigma 1.5) with K1 = 0.01 and
    K2 = 0.03. The map is evaluated at window centers that keep the whole
    window inside the frame, and averaged over the centers inside the ROI.

    Args:
        pred (ImageLike): Reconstructed image, shape (H, W).
        ref (ImageLike): Reference image, same shape.
        roi (Optional[ImageLike]): Boolean region of interest; the full frame when None.
        data_range (Optional[float]): Fixed L; the peak reference magnitude in the ROI when None.

    Returns:
        float: SSIM in [-1, 1].
    """
    pred_mag, ref_mag, region = _prepare(pred, ref, roi)
    if min(ref_mag.shape) < SSIM_WINDOW:
        raise InvalidArgumentError(f"Frame {ref_mag.shape} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window")
    peak = _data_range(ref_mag, region, data_range)

    local = ssim_map(pred_mag, ref_mag, peak)
    half = SSIM_WINDOW // 2
    centers = region[half:region.shape[0] - half, half:region.shape[1] - half]
    if not centers.any():
        raise InvalidArgumentError("No window center lies inside the region of interest")
    return float(np.mean(local[centers]))
