"""
Phantom Module

This module generates the synthetic complex images that stand in for knee
slices: sums of seeded random ellipses with a smooth low-order phase.

Five protocol profiles give the ellipses different statistics so that a single
network can be trained on a mixture of "acquisition protocols".
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np
import torch

from exceptions import InvalidArgumentError


@dataclass
class Ellipse:
    """
    One ellipse in normalized coordinates (the frame spans [-1, 1) on both axes).

    Attributes:
        center_y (float): Vertical center.
        center_x (float): Horizontal center.
        axis_y (float): Vertical semi-axis before rotation.
        axis_x (float): Horizontal semi-axis before rotation.
        angle (float): Rotation in radians.
        intensity (float): Added magnitude inside the ellipse.
    """
    center_y: float
    center_x: float
    axis_y: float
    axis_x: float
    angle: float
    intensity: float


@dataclass
class ProtocolProfile:
    """
    Ellipse and phase statistics of a synthetic acquisition protocol.

    Attributes:
        name (str): Protocol tag.
        body_axes (Tuple[float, float]): Range of the semi-axes of the large body ellipse.
        body_intensity (Tuple[float, float]): Intensity range of the body ellipse.
        detail_axes (Tuple[float, float]): Semi-axis range of the detail ellipses.
        detail_intensity (Tuple[float, float]): Intensity range of the detail ellipses.
        phase_strength (float): Bound on the polynomial phase coefficients.
    """
    name: str
    body_axes: Tuple[float, float]
    body_intensity: Tuple[float, float]
    detail_axes: Tuple[float, float]
    detail_intensity: Tuple[float, float]
    phase_strength: float


PROTOCOLS: Dict[str, ProtocolProfile] = {
    "axial_t2_fs": ProtocolProfile("axial_t2_fs", (0.55, 0.75), (0.1, 0.3), (0.05, 0.25), (0.3, 1.0), 1.2),
    "coronal_pd": ProtocolProfile("coronal_pd", (0.7, 0.85), (0.4, 0.6), (0.08, 0.35), (0.2, 0.5), 0.4),
    "coronal_pdfs": ProtocolProfile("coronal_pdfs", (0.65, 0.85), (0.2, 0.35), (0.06, 0.3), (0.3, 0.7), 0.6),
    "sagittal_pd": ProtocolProfile("sagittal_pd", (0.6, 0.8), (0.45, 0.65), (0.1, 0.4), (0.15, 0.4), 0.3),
    "sagittal_t2_fs": ProtocolProfile("sagittal_t2_fs", (0.6, 0.8), (0.15, 0.3), (0.05, 0.3), (0.3, 0.9), 0.8),
}

DEFAULT_PROTOCOL = "coronal_pd"


def normalized_grid(height: int, width: int) -> Tuple[np.ndarray, np.ndarray]:
    """Pixel coordinates scaled so that the frame center is 0 and the edges are near +-1."""
    rows = (np.arange(height) - height // 2) / max(height / 2.0, 1.0)
    cols = (np.arange(width) - width // 2) / max(width / 2.0, 1.0)
    return np.meshgrid(rows, cols, indexing="ij")


def phantom_from_ellipses(height: int, width: int, ellipses: Sequence[Ellipse],
                          phase_coeffs: Sequence[float] = (0.0,) * 6) -> torch.Tensor:
    """
    Render ellipses into a complex image.

    Intensities add where ellipses overlap and the magnitude is clipped to [0, 1];
    the phase is c0 + c1 y + c2 x + c3 y^2 + c4 x y + c5 x^2.

    Returns:
        torch.Tensor: Complex128 image of shape (height, width).
    """
    grid_y, grid_x = normalized_grid(height, width)
    magnitude = np.zeros((height, width))
    for ellipse in ellipses:
        dy, dx = grid_y - ellipse.center_y, grid_x - ellipse.center_x
        cos_a, sin_a = math.cos(ellipse.angle), math.sin(ellipse.angle)
        u = cos_a * dy + sin_a * dx
        v = -sin_a * dy + cos_a * dx
        inside = (u / ellipse.axis_y) ** 2 + (v / ellipse.axis_x) ** 2 <= 1.0
        magnitude[inside] += ellipse.intensity
    magnitude = np.clip(magnitude, 0.0, 1.0)

    c0, c1, c2, c3, c4, c5 = phase_coeffs
    phase = c0 + c1 * grid_y + c2 * grid_x + c3 * grid_y ** 2 + c4 * grid_x * grid_y + c5 * grid_x ** 2
    return torch.from_numpy(magnitude * np.exp(1j * phase))


def draw_ellipses(rng: np.random.Generator, n_ellipses: int, profile: ProtocolProfile) -> List[Ellipse]:
    """Draw a body ellipse followed by n_ellipses - 1 detail ellipses inside it."""
    ellipses = [Ellipse(
        center_y=rng.uniform(-0.05, 0.05),
        center_x=rng.uniform(-0.05, 0.05),
        axis_y=rng.uniform(*profile.body_axes),
        axis_x=rng.uniform(*profile.body_axes),
        angle=rng.uniform(-math.pi / 8, math.pi / 8),
        intensity=rng.uniform(*profile.body_intensity),
    )]
    for _ in range(n_ellipses - 1):
        radius, theta = rng.uniform(0.0, 0.45), rng.uniform(0.0, 2.0 * math.pi)
        ellipses.append(Ellipse(
            center_y=radius * math.sin(theta),
            center_x=radius * math.cos(theta),
            axis_y=rng.uniform(*profile.detail_axes),
            axis_x=rng.uniform(*profile.detail_axes),
            angle=rng.uniform(0.0, math.pi),
            intensity=rng.uniform(*profile.detail_intensity),
        ))
    return ellipses


def make_phantom(height: int, width: int, seed: int, n_ellipses: int = 8,
                 protocol: str = DEFAULT_PROTOCOL) -> torch.Tensor:
    """
    Generate a seeded random ellipse phantom.

    Args:
        height (int): Frame height.
        width (int): Frame width.
        seed (int): Random seed; equal seeds give equal phantoms.
        n_ellipses (int): Number of ellipses, >= 1.
        protocol (str): Protocol profile tag.

    Returns:
        torch.Tensor: Complex128 image with magnitude in [0, 1].
    """
    if n_ellipses < 1:
        raise InvalidArgumentError(f"n_ellipses must be >= 1, got {n_ellipses}")
    if protocol not in PROTOCOLS:
        raise InvalidArgumentError(f"Unknown protocol '{protocol}', expected one of {sorted(PROTOCOLS)}")
    profile = PROTOCOLS[protocol]
    rng = np.random.default_rng(seed)
    ellipses = draw_ellipses(rng, n_ellipses, profile)
    phase_coeffs = rng.uniform(-profile.phase_strength, profile.phase_strength, size=6)
    return phantom_from_ellipses(height, width, ellipses, phase_coeffs)
