"""Dense weight tensors and their binary container.

File format ("WTSR", little-endian):
  magic "WTSR", u16 version = 1, u8 dtype (0 = f32), u8 ndim,
  ndim x u64 dims, then the payload as f32 row-major.

Round-trips are bit-exact for f32 data.
"""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .records import ValidationError

_WTSR_MAGIC = b"WTSR"
_WTSR_VERSION = 1
_WTSR_HEADER = struct.Struct("<4sHBB")


class Layout(enum.Enum):
    CONV2D = "conv2d"  # (out, in, h, w)
    CONV3D = "conv3d"  # (out, in, t, h, w)
    DENSE = "dense"    # (out, in)
    VECTOR = "vector"  # (n,), used for biases


_NDIM_TO_LAYOUT = {1: Layout.VECTOR, 2: Layout.DENSE, 4: Layout.CONV2D, 5: Layout.CONV3D}


@dataclass
class WeightTensor:
    data: np.ndarray
    layout: Layout

    def __post_init__(self) -> None:
        self.data = np.asarray(self.data)
        if not np.all(np.isfinite(self.data)):
            raise ValidationError("weight tensor contains non-finite values")
        expected = {Layout.CONV2D: 4, Layout.CONV3D: 5, Layout.DENSE: 2, Layout.VECTOR: 1}
        if self.data.ndim != expected[self.layout]:
            raise ValidationError(
                f"{self.layout.value} tensor must have {expected[self.layout]} dims, "
                f"got shape {self.data.shape}"
            )
        if any(d < 1 for d in self.data.shape):
            raise ValidationError(f"bad dims {self.data.shape}")

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self.data.shape)


def save_weights(tensor: WeightTensor, path: str | Path) -> None:
    data = np.ascontiguousarray(tensor.data, dtype=np.float32)
    with open(path, "wb") as fh:
        fh.write(_WTSR_HEADER.pack(_WTSR_MAGIC, _WTSR_VERSION, 0, data.ndim))
        fh.write(struct.pack(f"<{data.ndim}Q", *data.shape))
        fh.write(data.tobytes())


def load_weights(path: str | Path, layout: Layout | None = None) -> WeightTensor:
    path = Path(path)
    with open(path, "rb") as fh:
        header = fh.read(_WTSR_HEADER.size)
        if len(header) != _WTSR_HEADER.size:
            raise ValidationError(f"{path}: truncated header")
        magic, version, dtype, ndim = _WTSR_HEADER.unpack(header)
        if magic != _WTSR_MAGIC:
            raise ValidationError(f"{path}: bad magic {magic!r}")
        if version != _WTSR_VERSION:
            raise ValidationError(f"{path}: unsupported version {version}")
        if dtype != 0:
            raise ValidationError(f"{path}: unsupported dtype {dtype}")
        dims = struct.unpack(f"<{ndim}Q", fh.read(8 * ndim))
        count = int(np.prod(dims)) if dims else 0
        payload = fh.read(4 * count)
    if len(payload) != 4 * count:
        raise ValidationError(f"{path}: truncated payload")
    data = np.frombuffer(payload, dtype="<f4").reshape(dims)
    if layout is None:
        if ndim not in _NDIM_TO_LAYOUT:
            raise ValidationError(f"{path}: cannot infer layout for ndim {ndim}")
        layout = _NDIM_TO_LAYOUT[ndim]
    return WeightTensor(data=data.copy(), layout=layout)
