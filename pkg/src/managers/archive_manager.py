"""
PWA1 weight archives.

Layout: magic ``PWA1``; u32 entry count; then per entry (sorted by name)
u16 name length, UTF-8 name, u8 ndim, ndim u32 dims, float32 payload.
All integers little-endian.
"""

import logging
import struct
from typing import Dict, Iterator, List, Mapping, Tuple

import numpy as np

from src.errors import CorruptFileError, DomainError
from src.numerics.params import ParamStore

logger = logging.getLogger(__name__)

MAGIC = b"PWA1"
_F32 = np.dtype("<f4")


class WeightArchive:
    """Sorted, unique, finite named tensors as stored in a PWA1 file."""

    def __init__(self, entries: Mapping[str, np.ndarray]):
        self._entries: Dict[str, np.ndarray] = {}
        for name in sorted(entries):
            tensor = np.asarray(entries[name], dtype=np.float64)
            if not np.isfinite(tensor).all():
                raise DomainError(f"archive entry '{name}' is not finite")
            self._entries[name] = tensor

    @classmethod
    def from_params(cls, params: ParamStore) -> "WeightArchive":
        return cls(dict(params.items()))

    def __getitem__(self, name: str) -> np.ndarray:
        return self._entries[name]

    def __contains__(self, name: object) -> bool:
        return name in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def names(self) -> List[str]:
        return list(self._entries)

    def items(self) -> List[Tuple[str, np.ndarray]]:
        return list(self._entries.items())


def encode_archive(archive: WeightArchive) -> bytes:
    chunks = [MAGIC, struct.pack("<I", len(archive))]
    for name, tensor in archive.items():
        encoded = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(encoded)) + encoded)
        chunks.append(struct.pack("<B", tensor.ndim))
        chunks.append(struct.pack(f"<{tensor.ndim}I", *tensor.shape))
        chunks.append(np.ascontiguousarray(tensor, dtype=_F32).tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, blob: bytes, source: str):
        self._blob = blob
        self._pos = 0
        self._source = source

    def take(self, size: int, field: str) -> bytes:
        end = self._pos + size
        if end > len(self._blob):
            raise CorruptFileError(self._source, field, "truncated")
        chunk = self._blob[self._pos : end]
        self._pos = end
        return chunk

    @property
    def exhausted(self) -> bool:
        return self._pos == len(self._blob)


def decode_archive(blob: bytes, source: str = "<bytes>") -> WeightArchive:
    reader = _Reader(blob, source)
    if reader.take(4, "magic") != MAGIC:
        raise CorruptFileError(source, "magic")
    (count,) = struct.unpack("<I", reader.take(4, "count"))

    entries: Dict[str, np.ndarray] = {}
    previous = None
    for _ in range(count):
        (name_len,) = struct.unpack("<H", reader.take(2, "name_length"))
        try:
            name = reader.take(name_len, "name").decode("utf-8")
        except UnicodeDecodeError:
            raise CorruptFileError(source, "name", "not UTF-8") from None
        if name in entries:
            raise CorruptFileError(source, "name", f"duplicate '{name}'")
        if previous is not None and name < previous:
            raise CorruptFileError(source, "name", f"'{name}' out of order")
        (ndim,) = struct.unpack("<B", reader.take(1, "ndim"))
        dims = struct.unpack(f"<{ndim}I", reader.take(4 * ndim, "dims"))
        size = int(np.prod(dims, dtype=np.int64)) * _F32.itemsize
        payload = reader.take(size, "payload")
        entries[name] = np.frombuffer(payload, dtype=_F32).reshape(dims)
        previous = name
    if not reader.exhausted:
        raise CorruptFileError(source, "payload", "trailing bytes")
    try:
        return WeightArchive(entries)
    except DomainError as e:
        raise CorruptFileError(source, "payload", str(e)) from None


def save_archive(path, archive: WeightArchive) -> None:
    with open(path, "wb") as f:
        f.write(encode_archive(archive))
    logger.info("saved %d tensors to %s", len(archive), path)


def load_archive(path) -> WeightArchive:
    with open(path, "rb") as f:
        blob = f.read()
    return decode_archive(blob, str(path))
