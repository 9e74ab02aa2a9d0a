"""
Image Writer Module

This module writes reconstruction outputs:

    recon.json   label, acceleration, calibration, record ids and format version
    <id>.cplx    complex image, little-endian float32 interleaved real/imag, row-major
    <id>.pgm     magnitude image as binary PGM (P5), 16-bit big-endian samples
"""

import json
from pathlib import Path
from typing import List, Optional

import numpy as np
import torch

from DatasetGeneration.dataset_schema import encode_complex
from Reconstruction.reconstructor import Reconstruction

RECON_FORMAT_VERSION = 1
RECON_INDEX_FILE = "recon.json"
PGM_MAXVAL = 65535


def encode_pgm(image: torch.Tensor) -> bytes:
    """
    Encode the magnitude of an image as a 16-bit binary PGM.

    The magnitude is scaled so that its maximum maps to 65535; an all-zero image
    stays black.

    Args:
        image (torch.Tensor): Complex or real image, shape (H, W).

    Returns:
        bytes: The PGM file content.
    """
    magnitude = image.detach().abs().cpu().numpy().astype(np.float64)
    height, width = magnitude.shape
    peak = magnitude.max() if magnitude.size else 0.0
    scaled = np.zeros_like(magnitude) if peak <= 0 else magnitude / peak * PGM_MAXVAL
    samples = np.clip(np.rint(scaled), 0, PGM_MAXVAL).astype(">u2")
    header = f"P5\n{width} {height}\n{PGM_MAXVAL}\n".encode("ascii")
    return header + samples.tobytes()


def write_reconstructions(reconstructions: List[Reconstruction], output_dir: str, label: str,
                          af: Optional[float], calib: int) -> Path:
    """
    Write every reconstruction and the recon.json index into output_dir.

    Args:
        reconstructions (List[Reconstruction]): Reconstructed records.
        output_dir (str): Destination directory (created if needed).
        label (str): Method label recorded in the index.
        af (Optional[float]): Acceleration used; None for the stored masks.
        calib (int): Calibration lines used.

    Returns:
        Path: The output directory.
    """
    directory = Path(output_dir)
    directory.mkdir(parents=True, exist_ok=True)
    for reconstruction in reconstructions:
        (directory / f"{reconstruction.record_id}.cplx").write_bytes(encode_complex(reconstruction.image))
        (directory / f"{reconstruction.record_id}.pgm").write_bytes(encode_pgm(reconstruction.image))

    index = {
        'format_version': RECON_FORMAT_VERSION,
        'label': label,
        'af': af,
        'calib': calib,
        'records': [reconstruction.record_id for reconstruction in reconstructions],
    }
    (directory / RECON_INDEX_FILE).write_text(json.dumps(index, indent=2, sort_keys=True), encoding='utf-8')
    return directory
