"""
Checkpoint directory format

    <checkpoint>/
        config.json            model config snapshot + tensor list (sorted keys)
        tensors/<name>.bin     one file per named parameter/buffer

Tensor file layout (little-endian):
    bytes 0-3      magic b"DCT1"
    uint32         ndim
    uint32[ndim]   dims
    float32[...]   data in C order
"""

import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Mapping, Tuple, Union

import numpy as np
import torch

from ..errors import CheckpointError

logger = logging.getLogger(__name__)

MAGIC = b"DCT1"
CONFIG_FILE = "config.json"
TENSOR_DIR = "tensors"
FORMAT_VERSION = 1

PathLike = Union[str, Path]


def encode_tensor(tensor: torch.Tensor) -> bytes:
    array = np.ascontiguousarray(tensor.detach().cpu().to(torch.float32).numpy(), dtype="<f4")
    header = MAGIC + struct.pack("<I", array.ndim) + struct.pack(f"<{array.ndim}I", *array.shape)
    return header + array.tobytes(order="C")


def decode_tensor(data: bytes, source: str = "<bytes>") -> torch.Tensor:
    if len(data) < 8 or data[:4] != MAGIC:
        raise CheckpointError.corrupt(source, "bad magic")
    (ndim,) = struct.unpack_from("<I", data, 4)
    offset = 8 + 4 * ndim
    if len(data) < offset:
        raise CheckpointError.corrupt(source, "truncated header")
    dims = struct.unpack_from(f"<{ndim}I", data, 8)
    count = int(np.prod(dims)) if ndim else 1
    if len(data) != offset + 4 * count:
        raise CheckpointError.corrupt(source, f"expected {count} floats, found {(len(data) - offset) / 4:g}")
    array = np.frombuffer(data, dtype="<f4", count=count, offset=offset).reshape(dims)
    return torch.from_numpy(array.astype(np.float32, copy=True))


def save_checkpoint(
    directory: PathLike,
    model_config: Mapping[str, Any],
    state_dict: Mapping[str, torch.Tensor],
    metadata: Mapping[str, Any] = None,
) -> Path:
    """Write config.json and one tensor file per state_dict entry"""
    directory = Path(directory)
    tensor_dir = directory / TENSOR_DIR
    tensor_dir.mkdir(parents=True, exist_ok=True)
    names = sorted(state_dict)
    for name in names:
        with open(tensor_dir / f"{name}.bin", "wb") as f:
            f.write(encode_tensor(state_dict[name]))
    payload = {
        "format_version": FORMAT_VERSION,
        "model": dict(model_config),
        "tensors": names,
        "metadata": dict(metadata or {}),
    }
    with open(directory / CONFIG_FILE, "w", encoding="utf-8", newline="\n") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.debug(f"Saved checkpoint with {len(names)} tensors to {directory}")
    return directory


def is_checkpoint(directory: PathLike) -> bool:
    return (Path(directory) / CONFIG_FILE).is_file()


def load_checkpoint(directory: PathLike) -> Tuple[Dict[str, Any], Dict[str, torch.Tensor], Dict[str, Any]]:
    """
    Returns:
        (model config dict, state dict, metadata)
    """
    directory = Path(directory)
    config_path = directory / CONFIG_FILE
    if not config_path.is_file():
        raise CheckpointError.missing(str(directory))
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except ValueError as e:
        raise CheckpointError.corrupt(str(config_path), str(e)) from e
    if payload.get("format_version") != FORMAT_VERSION:
        raise CheckpointError.corrupt(str(config_path), f"unsupported format {payload.get('format_version')}")
    state: Dict[str, torch.Tensor] = {}
    for name in payload.get("tensors", []):
        tensor_path = directory / TENSOR_DIR / f"{name}.bin"
        if not tensor_path.is_file():
            raise CheckpointError.corrupt(str(tensor_path), "tensor file missing")
        state[name] = decode_tensor(tensor_path.read_bytes(), str(tensor_path))
    return payload["model"], state, payload.get("metadata", {})
