"""
Checkpoint Module

This module saves and loads cascade models in the binary checkpoint format:

    magic "MRDC" | format version u32 | header length u64 | UTF-8 JSON header | payload

All integers are little-endian. The payload is the raw little-endian float
parameters in declaration order: for every sub-network in cascade order, every
layer's weight then bias; followed by the array of stored DC values (raw
values for trainable lambdas, lambda itself for fixed ones).
"""

import json
import os
import struct
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np
import torch

from exceptions import CheckpointFormatError, TruncatedPayloadError
from Networks.cascade import CascadeModel, ModelConfig

MAGIC = b"MRDC"
CHECKPOINT_VERSION = 1
_PREAMBLE = struct.Struct("<4sIQ")

PAYLOAD_DTYPES = {
    "double": np.dtype("<f8"),
    "single": np.dtype("<f4"),
}

_CONFIG_FIELDS = ("variant", "n_c", "n_d", "n_filters", "kernel_size", "dilation",
                  "lambda_init", "lambda_trainable", "shared_lambda")


def _precision_of(model: CascadeModel) -> str:
    dtype = next(model.parameters()).dtype
    return "double" if dtype == torch.float64 else "single"


def _payload_tensors(model: CascadeModel) -> List[torch.Tensor]:
    tensors = []
    for subnet in model.subnets:
        for layer in subnet.layers:
            tensors.extend([layer.weight, layer.bias])
    tensors.append(torch.stack([param.stored_value() for param in model.unique_dc_params()]))
    return tensors


def checkpoint_header(model: CascadeModel, epoch: int = 0) -> Dict[str, Any]:
    """Header fields describing the model, its precision and training progress."""
    description = model.describe()
    return {
        **{name: description[name] for name in _CONFIG_FIELDS},
        "n_coil": model.n_coil,
        "dims": [model.height, model.width],
        "precision": _precision_of(model),
        "epoch": epoch,
        "seed": model.seed,
    }


def encode_checkpoint(model: CascadeModel, epoch: int = 0) -> bytes:
    """Serialize a model into checkpoint bytes."""
    header = checkpoint_header(model, epoch)
    payload_dtype = PAYLOAD_DTYPES[header["precision"]]
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = b"".join(
        tensor.detach().cpu().numpy().astype(payload_dtype, copy=False).tobytes()
        for tensor in _payload_tensors(model)
    )
    return _PREAMBLE.pack(MAGIC, CHECKPOINT_VERSION, len(header_bytes)) + header_bytes + payload


def save_checkpoint(model: CascadeModel, path: str, epoch: int = 0) -> Path:
    """
    Write a checkpoint atomically (temporary file then rename).

    Args:
        model (CascadeModel): The model to save.
        path (str): Destination file.
        epoch (int): Training epoch recorded in the header.

    Returns:
        Path: The written file.
    """
    destination = Path(path)
    destination.parent.mkdir(parents=True, exist_ok=True)
    staging = destination.with_name(destination.name + ".tmp")
    staging.write_bytes(encode_checkpoint(model, epoch))
    os.replace(staging, destination)
    return destination


def decode_checkpoint(data: bytes, source: str = "<bytes>") -> Tuple[CascadeModel, Dict[str, Any]]:
    """
    Rebuild a model from checkpoint bytes.

    Args:
        data (bytes): Checkpoint content.
        source (str): Name used in error messages.

    Returns:
        Tuple[CascadeModel, Dict[str, Any]]: The model and its header.
    """
    if len(data) < _PREAMBLE.size:
        raise TruncatedPayloadError(f"{source}: {len(data)} bytes is shorter than the checkpoint preamble")
    magic, version, header_length = _PREAMBLE.unpack_from(data)
    if magic != MAGIC:
        raise CheckpointFormatError(f"{source}: magic {magic!r}, expected {MAGIC!r}")
    if version != CHECKPOINT_VERSION:
        raise CheckpointFormatError(f"{source}: checkpoint version {version}, expected {CHECKPOINT_VERSION}")

    header_end = _PREAMBLE.size + header_length
    if len(data) < header_end:
        raise TruncatedPayloadError(f"{source}: header announces {header_length} bytes, file is shorter")
    try:
        header = json.loads(data[_PREAMBLE.size:header_end].decode("utf-8"))
        config = ModelConfig(**{name: header[name] for name in _CONFIG_FIELDS})
        height, width = header["dims"]
        payload_dtype = PAYLOAD_DTYPES[header["precision"]]
        n_coil, seed = header["n_coil"], header["seed"]
    except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise CheckpointFormatError(f"{source}: malformed header ({e})")

    dtype = torch.float64 if header["precision"] == "double" else torch.float32
    model = CascadeModel(config, n_coil, height, width, seed).to(dtype)
    tensors = _payload_tensors(model)
    expected = sum(tensor.numel() for tensor in tensors) * payload_dtype.itemsize
    payload = data[header_end:]
    if len(payload) != expected:
        raise TruncatedPayloadError(f"{source}: payload has {len(payload)} bytes, expected {expected}")

    values = np.frombuffer(payload, dtype=payload_dtype)
    offset = 0
    with torch.no_grad():
        for tensor in tensors[:-1]:
            count = tensor.numel()
            tensor.copy_(torch.from_numpy(values[offset:offset + count].copy()).reshape(tensor.shape))
            offset += count
        for param, value in zip(model.unique_dc_params(), values[offset:]):
            param.stored_value().fill_(float(value))
    return model, header


def load_checkpoint(path: str) -> Tuple[CascadeModel, Dict[str, Any]]:
    """Read a checkpoint file (see decode_checkpoint)."""
    source = Path(path)
    return decode_checkpoint(source.read_bytes(), str(source))
