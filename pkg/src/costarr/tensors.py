"""Array containers and the CST1 / CSV interchange formats.

CST1 layout (all integers little-endian)::

    b"CST1" | u8 ndim | ndim x u64 dims | u8 dtype code | row-major payload

dtype codes: 1 = float32, 2 = float64, 3 = int64.
"""

from __future__ import annotations

import csv
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, ShapeError, TruncatedFileError

MAGIC = b"CST1"

_CODE_TO_DTYPE = {
    1: np.dtype("<f4"),
    2: np.dtype("<f8"),
    3: np.dtype("<i8"),
}
_KIND_TO_CODE = {("f", 4): 1, ("f", 8): 2, ("i", 8): 3}


def _dtype_code(arr: np.ndarray) -> int:
    code = _KIND_TO_CODE.get((arr.dtype.kind, arr.dtype.itemsize))
    if code is None:
        raise FormatError(f"unsupported dtype {arr.dtype}; expected float32, float64 or int64")
    return code


def encode_tensor(t: np.ndarray) -> bytes:
    """Serialize an array to CST1 bytes."""
    t = np.asarray(t)
    code = _dtype_code(t)
    if t.ndim < 1 or t.ndim > 255:
        raise FormatError(f"ndim must be in [1, 255], got {t.ndim}")
    if any(d < 1 for d in t.shape):
        raise FormatError(f"every dimension must be >= 1, got {t.shape}")
    header = MAGIC + struct.pack("<B", t.ndim) + struct.pack(f"<{t.ndim}Q", *t.shape)
    header += struct.pack("<B", code)
    payload = np.ascontiguousarray(t, dtype=_CODE_TO_DTYPE[code]).tobytes()
    return header + payload


def decode_tensor(buf: bytes) -> np.ndarray:
    """Parse CST1 bytes back into an array (native byte order)."""
    if len(buf) < 5 or buf[:4] != MAGIC:
        raise FormatError(f"bad magic {bytes(buf[:4])!r}, expected {MAGIC!r}")
    ndim = buf[4]
    if ndim < 1:
        raise FormatError("ndim must be >= 1")
    pos = 5
    need = pos + 8 * ndim + 1
    if len(buf) < need:
        raise TruncatedFileError(f"header truncated: {len(buf)} bytes, need {need}")
    dims = struct.unpack_from(f"<{ndim}Q", buf, pos)
    pos += 8 * ndim
    if any(d < 1 for d in dims):
        raise FormatError(f"every dimension must be >= 1, got {dims}")
    code = buf[pos]
    pos += 1
    dtype = _CODE_TO_DTYPE.get(code)
    if dtype is None:
        raise FormatError(f"unknown dtype code {code}")
    count = int(np.prod(dims, dtype=np.uint64))
    nbytes = count * dtype.itemsize
    if len(buf) - pos < nbytes:
        raise TruncatedFileError(
            f"payload truncated: {len(buf) - pos} bytes, need {nbytes}"
        )
    if len(buf) - pos > nbytes:
        raise FormatError(f"{len(buf) - pos - nbytes} trailing bytes after payload")
    data = np.frombuffer(buf, dtype=dtype, count=count, offset=pos)
    return data.astype(dtype.newbyteorder("="), copy=True).reshape(dims)


def read_tensor(path: str | os.PathLike) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_tensor(fh.read())


def write_tensor(t: np.ndarray, path: str | os.PathLike) -> None:
    data = encode_tensor(t)
    with open(path, "wb") as fh:
        fh.write(data)


def _parse_row(row: list[str]) -> list[float] | None:
    try:
        return [float(c) for c in row]
    except ValueError:
        return None


def read_csv_matrix(path: str | os.PathLike) -> np.ndarray:
    """Read a rectangular numeric CSV into a float64 ``[rows x cols]`` array.

    The first row is treated as a header if any of its cells fails to parse
    as a number. Blank lines are ignored.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows and _parse_row(rows[0]) is None:
        rows = rows[1:]
    if not rows:
        raise FormatError(f"{path}: no numeric rows")
    width = len(rows[0])
    values = []
    for i, row in enumerate(rows):
        if len(row) != width:
            raise FormatError(f"{path}: ragged row {i} has {len(row)} cells, expected {width}")
        parsed = _parse_row(row)
        if parsed is None:
            raise FormatError(f"{path}: non-numeric cell in row {i}")
        values.append(parsed)
    return np.asarray(values, dtype=np.float64)


@dataclass(frozen=True)
class LabeledSet:
    """Features, logits and labels for one split. Label -1 marks an unknown."""

    features: np.ndarray
    logits: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.features.ndim != 2 or self.logits.ndim != 2 or self.labels.ndim != 1:
            raise ShapeError(
                "features and logits must be 2-D and labels 1-D, got "
                f"{self.features.shape}, {self.logits.shape}, {self.labels.shape}"
            )
        n = self.features.shape[0]
        if self.logits.shape[0] != n or self.labels.shape[0] != n:
            raise ShapeError(
                f"row counts differ: features {n}, logits {self.logits.shape[0]}, "
                f"labels {self.labels.shape[0]}"
            )
        if self.labels.dtype.kind not in "iu":
            raise ShapeError(f"labels must be integer, got {self.labels.dtype}")
        c = self.logits.shape[1]
        bad = (self.labels != -1) & ((self.labels < 0) | (self.labels >= c))
        if bad.any():
            raise ShapeError(f"labels must be -1 or in [0, {c}); first bad row {int(np.argmax(bad))}")

    def __len__(self):
        return self.labels.shape[0]

    @property
    def n_classes(self) -> int:
        return self.logits.shape[1]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def known(self) -> np.ndarray:
        return self.labels != -1

    def save(self, directory: str | os.PathLike, prefix: str) -> None:
        write_tensor(self.features, os.path.join(directory, f"{prefix}_features.cst"))
        write_tensor(self.logits, os.path.join(directory, f"{prefix}_logits.cst"))
        write_tensor(self.labels.astype(np.int64), os.path.join(directory, f"{prefix}_labels.cst"))

    @classmethod
    def load(cls, directory: str | os.PathLike, prefix: str) -> "LabeledSet":
        return cls(
            read_tensor(os.path.join(directory, f"{prefix}_features.cst")),
            read_tensor(os.path.join(directory, f"{prefix}_logits.cst")),
            read_tensor(os.path.join(directory, f"{prefix}_labels.cst")),
        )


@dataclass(frozen=True)
class ClassifierHead:
    """Final linear layer: ``weights`` is ``[C x D]``, ``bias`` is ``[C]``."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        if self.weights.ndim != 2 or self.bias.ndim != 1:
            raise ShapeError(f"weights must be 2-D and bias 1-D, got {self.weights.shape}, {self.bias.shape}")
        if self.bias.shape[0] != self.weights.shape[0]:
            raise ShapeError(f"bias length {self.bias.shape[0]} != weight rows {self.weights.shape[0]}")

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def logits(self, features: np.ndarray) -> np.ndarray:
        return np.asarray(features, dtype=np.float64) @ self.weights.T.astype(np.float64) + self.bias

    def check_compatible(self, data: LabeledSet) -> None:
        if data.dim != self.dim:
            raise ShapeError(f"features have D={data.dim} but weights have D={self.dim}")
        if data.n_classes != self.n_classes:
            raise ShapeError(f"logits have C={data.n_classes} but weights have C={self.n_classes}")
