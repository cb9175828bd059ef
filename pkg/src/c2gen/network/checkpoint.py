"""Binary checkpoint format.

Layout (all integers little-endian):

    offset 0   4 bytes   magic b"C2GN"
    offset 4   uint32    format version (1)
    offset 8   uint32    header length H in bytes
    offset 12  H bytes   UTF-8 JSON header:
                         {"config": {...}, "seed": int, "step": int,
                          "vocab": [token, ...],
                          "tensors": [{"name": str, "shape": [int, ...]}, ...]}
    offset 12+H          tensor payload: each tensor in header order as
                         little-endian float32 (<f4), C order
"""

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from ..errors import CheckpointError
from .params import PARAM_NAMES, ModelParams
from .vocab import Vocabulary

logger = logging.getLogger(__name__)

MAGIC = b"C2GN"
VERSION = 1
_PREFIX = struct.Struct("<4sII")


@dataclass
class Checkpoint:
    params: ModelParams
    seed: int
    step: int
    config: Dict[str, Any] = field(default_factory=dict)


def save_checkpoint(
    path: Union[str, Path],
    params: ModelParams,
    seed: int,
    step: int,
    config: Dict[str, Any],
) -> Path:
    """Write parameters, vocabulary, seed, step count and a config echo to ``path``."""
    path = Path(path)
    header = {
        "config": config,
        "seed": int(seed),
        "step": int(step),
        "vocab": params.vocab.tokens,
        "tensors": [{"name": n, "shape": list(params[n].shape)} for n in PARAM_NAMES],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    try:
        with open(path, "wb") as f:
            f.write(_PREFIX.pack(MAGIC, VERSION, len(header_bytes)))
            f.write(header_bytes)
            for name in PARAM_NAMES:
                f.write(np.ascontiguousarray(params[name], dtype="<f4").tobytes())
    except OSError as e:
        raise OSError(f"Cannot write checkpoint {path}: {e}") from e
    logger.debug(f"Saved checkpoint {path} (step {step})")
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """Read a checkpoint written by save_checkpoint.

    Raises:
        FileNotFoundError: If the file does not exist.
        CheckpointError: If the magic, version, header or payload size is wrong.
    """
    data = Path(path).read_bytes()
    if len(data) < _PREFIX.size:
        raise CheckpointError(f"{path}: file too short for a checkpoint header")
    magic, version, header_len = _PREFIX.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported version {version}")

    start = _PREFIX.size
    try:
        header = json.loads(data[start : start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"{path}: unreadable header: {e}") from None

    offset = start + header_len
    tensors = {}
    for spec in header["tensors"]:
        shape = tuple(spec["shape"])
        count = int(np.prod(shape))
        end = offset + 4 * count
        if end > len(data):
            raise CheckpointError(f"{path}: payload truncated in tensor {spec['name']!r}")
        tensors[spec["name"]] = np.frombuffer(data[offset:end], dtype="<f4").reshape(shape).astype(np.float64)
        offset = end
    if offset != len(data):
        raise CheckpointError(f"{path}: {len(data) - offset} trailing bytes after payload")

    try:
        params = ModelParams(Vocabulary(header["vocab"]), tensors)
    except ValueError as e:
        raise CheckpointError(f"{path}: {e}") from None
    return Checkpoint(params=params, seed=header["seed"], step=header["step"], config=header["config"])
