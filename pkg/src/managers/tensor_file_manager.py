"""
PFT1 tensor container.

Layout: 4-byte magic ``PFT1``; u8 dtype code (0 = float32, 1 = float64);
u8 ndim; ndim little-endian u32 dims; row-major little-endian payload.
"""

import logging
import os
import struct
from typing import Union

import numpy as np

from src.errors import CorruptFileError

logger = logging.getLogger(__name__)

MAGIC = b"PFT1"
DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
CODE_FOR_ITEMSIZE = {4: 0, 8: 1}

PathLike = Union[str, "os.PathLike[str]"]


def encode_tensor(array: np.ndarray, dtype: str = "float64") -> bytes:
    source_dtype = np.dtype(dtype)
    if source_dtype.kind != "f" or source_dtype.itemsize not in CODE_FOR_ITEMSIZE:
        raise ValueError(f"unsupported PFT1 dtype '{dtype}'")
    code = CODE_FOR_ITEMSIZE[source_dtype.itemsize]
    target = DTYPE_CODES[code]
    data = np.ascontiguousarray(array, dtype=target)
    header = MAGIC + struct.pack("<BB", code, data.ndim)
    header += struct.pack(f"<{data.ndim}I", *data.shape)
    return header + data.tobytes(order="C")


def decode_tensor(blob: bytes, source: str = "<bytes>") -> np.ndarray:
    """Parse a PFT1 blob; errors name the offending header field."""
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise CorruptFileError(source, "magic")
    if len(blob) < 5:
        raise CorruptFileError(source, "dtype", "truncated")
    code = blob[4]
    if code not in DTYPE_CODES:
        raise CorruptFileError(source, "dtype", f"unknown code {code}")
    if len(blob) < 6:
        raise CorruptFileError(source, "ndim", "truncated")
    ndim = blob[5]
    dims_end = 6 + 4 * ndim
    if len(blob) < dims_end:
        raise CorruptFileError(source, "dims", "truncated")
    dims = struct.unpack(f"<{ndim}I", blob[6:dims_end])
    dtype = DTYPE_CODES[code]
    expected = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    payload = blob[dims_end:]
    if len(payload) != expected:
        raise CorruptFileError(
            source, "payload", f"expected {expected} bytes, found {len(payload)}"
        )
    return np.frombuffer(payload, dtype=dtype).reshape(dims).astype(np.float64)


def write_tensor(path: PathLike, array: np.ndarray, dtype: str = "float64") -> None:
    with open(path, "wb") as f:
        f.write(encode_tensor(array, dtype))
    logger.debug("wrote PFT1 %s shape=%s", path, np.shape(array))


def read_tensor(path: PathLike) -> np.ndarray:
    with open(path, "rb") as f:
        blob = f.read()
    return decode_tensor(blob, str(path))
