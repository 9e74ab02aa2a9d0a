"""
Dataset Schema Module

This module defines the on-disk dataset format and the helpers that encode and
validate it.

Layout of a dataset directory:

    index.json              format tag, version and the ordered record ids
    <record_id>/meta.json   UTF-8 header of one record
    <record_id>/kspace.cplx little-endian float32, interleaved real/imag,
                            coil-major, row-major within a coil
    <record_id>/sens.cplx   optional reference maps, same layout
"""

from pathlib import Path
from typing import Any, Dict, Sequence

import numpy as np
import torch

from exceptions import FormatVersionError, MalformedHeaderError, TruncatedPayloadError

FORMAT_NAME = "MRDC-dataset"
FORMAT_VERSION = 1
BYTE_ORDER = "little"

INDEX_FILE = "index.json"
META_FILE = "meta.json"
KSPACE_FILE = "kspace.cplx"
SENS_FILE = "sens.cplx"

PAYLOAD_DTYPE = np.dtype("<f4")

REQUIRED_FIELDS = {
    'format': str,
    'format_version': int,
    'byte_order': str,
    'record_id': str,
    'protocol': str,
    'height': int,
    'width': int,
    'n_coil': int,
    'seed': int,
    'noise_sigma': (int, float),
    'sampled_lines': list,
    'has_sens': bool,
}


def check_format_tag(header: Dict[str, Any], source: str):
    """Reject headers of a foreign format, byte order or version."""
    if header.get('format') != FORMAT_NAME:
        raise FormatVersionError(f"{source}: format tag {header.get('format')!r}, expected {FORMAT_NAME!r}")
    if header.get('byte_order') != BYTE_ORDER:
        raise FormatVersionError(f"{source}: byte order {header.get('byte_order')!r}, expected {BYTE_ORDER!r}")
    if header.get('format_version') != FORMAT_VERSION:
        raise FormatVersionError(
            f"{source}: format version {header.get('format_version')!r}, expected {FORMAT_VERSION}")


def validate_record_header(header: Any, source: str) -> Dict[str, Any]:
    """
    Check a record header for completeness and version.

    Args:
        header (Any): Decoded JSON content of meta.json.
        source (str): Path used in error messages.

    Returns:
        Dict[str, Any]: The header, unchanged.
    """
    if not isinstance(header, dict):
        raise MalformedHeaderError(f"{source}: header is not a JSON object")
    for field, expected in REQUIRED_FIELDS.items():
        if field not in header:
            raise MalformedHeaderError(f"{source}: missing field '{field}'")
        if not isinstance(header[field], expected):
            raise MalformedHeaderError(f"{source}: field '{field}' has type {type(header[field]).__name__}")
    check_format_tag(header, source)
    if header['height'] < 1 or header['width'] < 1 or header['n_coil'] < 1:
        raise MalformedHeaderError(f"{source}: non-positive dimensions")
    return header


def check_record_id(record_id: Any, source: str) -> str:
    """Reject index entries that are not a single plain directory name."""
    if not isinstance(record_id, str) or record_id in ("", ".", ".."):
        raise MalformedHeaderError(f"{source}: invalid record id {record_id!r}")
    if "/" in record_id or "\\" in record_id or record_id != Path(record_id).name:
        raise MalformedHeaderError(f"{source}: record id {record_id!r} is not a plain name")
    return record_id


def encode_complex(x: torch.Tensor) -> bytes:
    """Serialize a complex tensor as interleaved little-endian float32."""
    as_numpy = x.detach().cpu().to(torch.complex64).numpy()
    return np.ascontiguousarray(as_numpy).view(np.float32).astype(PAYLOAD_DTYPE, copy=False).tobytes()


def decode_complex(payload: bytes, shape: Sequence[int], source: str) -> torch.Tensor:
    """
    Deserialize interleaved little-endian float32 into a complex64 tensor.

    Args:
        payload (bytes): Raw file content.
        shape (Sequence[int]): Expected complex shape.
        source (str): Path used in error messages.

    Returns:
        torch.Tensor: Complex64 tensor of the given shape.
    """
    expected = 2 * int(np.prod(shape)) * PAYLOAD_DTYPE.itemsize
    if len(payload) != expected:
        raise TruncatedPayloadError(f"{source}: {len(payload)} bytes, expected {expected}")
    values = np.frombuffer(payload, dtype=PAYLOAD_DTYPE).astype(np.float32)
    return torch.from_numpy(values.view(np.complex64).reshape(tuple(shape)).copy())
