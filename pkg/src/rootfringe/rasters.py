"""Binary PGM input, FR1 float rasters and CSV tables.

FR1 layout: an ASCII line ``FR1 <width> <height> <channels>\\n`` followed
by width*height*channels little-endian float32 values, row-major with y
as the slow axis and channels interleaved (re, im for complex data).
"""

from __future__ import annotations

import csv
import numbers
import os
import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    ArityMismatch,
    IoFailure,
    MalformedHeader,
    NonFiniteSample,
    TruncatedData,
    UnsupportedMaxval,
)

_FR1_HEADER = re.compile(rb"FR1 (\d+) (\d+) ([12])\n")


@dataclass
class IntensityImage:
    samples: np.ndarray  # uint8, shape (height, width)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.uint8)
        if self.samples.ndim != 2 or self.samples.size == 0:
            raise ValueError("intensity image must be a non-empty 2-D array")

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]


@dataclass
class FieldRaster:
    samples: np.ndarray  # float32, shape (height, width) or (height, width, 2)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float32)
        if s.ndim == 3 and s.shape[2] == 1:
            s = s[:, :, 0]
        if s.ndim not in (2, 3) or (s.ndim == 3 and s.shape[2] != 2):
            raise ValueError(f"raster samples must be (h, w) or (h, w, 2), got {s.shape}")
        if s.shape[0] < 1 or s.shape[1] < 1:
            raise ValueError("raster must be at least 1x1")
        self.samples = s

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def channels(self) -> int:
        return 1 if self.samples.ndim == 2 else 2

    @classmethod
    def from_complex(cls, arr) -> "FieldRaster":
        arr = np.asarray(arr)
        return cls(np.stack([arr.real, arr.imag], axis=-1).astype(np.float32))

    @classmethod
    def from_real(cls, arr) -> "FieldRaster":
        return cls(np.asarray(arr, dtype=np.float32))

    def to_complex(self) -> np.ndarray:
        if self.channels != 2:
            raise ValueError("raster is real; expected 2 channels")
        s = self.samples.astype(np.float64)
        return s[:, :, 0] + 1j * s[:, :, 1]

    def to_real(self) -> np.ndarray:
        if self.channels != 1:
            raise ValueError("raster is complex; expected 1 channel")
        return self.samples.astype(np.float64)


def _pgm_tokens(data: bytes, count: int):
    """Split the first ``count`` whitespace-separated header tokens, skipping comments."""
    tokens = []
    i = 0
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        start = i
        while i < n and not data[i:i + 1].isspace() and data[i:i + 1] != b"#":
            i += 1
        if start == i:
            raise MalformedHeader("PGM header ended early")
        tokens.append(data[start:i])
    return tokens, i


def read_pgm(path) -> IntensityImage:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    if data[:2] != b"P5":
        raise MalformedHeader(f"{path}: not a binary greyscale PGM (magic {data[:2]!r})")
    tokens, pos = _pgm_tokens(data, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise MalformedHeader(f"{path}: non-numeric PGM header field") from exc
    if width < 1 or height < 1:
        raise MalformedHeader(f"{path}: bad dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedMaxval(f"{path}: maxval {maxval} (only 255 supported)")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise MalformedHeader(f"{path}: missing whitespace after maxval")
    payload = data[pos + 1:]
    need = width * height
    if len(payload) < need:
        raise TruncatedData(f"{path}: expected {need} pixel bytes, found {len(payload)}")
    pix = np.frombuffer(payload[:need], dtype=np.uint8).reshape(height, width).copy()
    return IntensityImage(pix)


def write_pgm(path, image) -> None:
    pix = image.samples if isinstance(image, IntensityImage) else np.asarray(image)
    pix = np.ascontiguousarray(pix, dtype=np.uint8)
    h, w = pix.shape
    try:
        with open(path, "wb") as fh:
            fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            fh.write(pix.tobytes())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def write_field(path, field: FieldRaster) -> None:
    s = field.samples
    if not np.all(np.isfinite(s)):
        raise NonFiniteSample(f"refusing to write non-finite samples to {path}")
    header = f"FR1 {field.width} {field.height} {field.channels}\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(s, dtype="<f4").tobytes())
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def read_field(path) -> FieldRaster:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    m = _FR1_HEADER.match(data)
    if m is None:
        raise MalformedHeader(f"{path}: missing or malformed FR1 header")
    w, h, c = (int(g) for g in m.groups())
    if w < 1 or h < 1:
        raise MalformedHeader(f"{path}: bad dimensions {w}x{h}")
    payload = data[m.end():]
    need = w * h * c * 4
    if len(payload) != need:
        raise TruncatedData(f"{path}: expected {need} data bytes, found {len(payload)}")
    s = np.frombuffer(payload, dtype="<f4").astype(np.float32)
    if not np.all(np.isfinite(s)):
        raise NonFiniteSample(f"{path}: raster contains non-finite samples")
    shape = (h, w) if c == 1 else (h, w, 2)
    return FieldRaster(s.reshape(shape))


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        return f"{float(value):.6g}"
    return str(value)


def write_csv(path, header, rows) -> None:
    """Write a header row plus data rows; floats get 6 significant digits."""
    header = list(header)
    lines = []
    for row in rows:
        row = row.as_row(header) if hasattr(row, "as_row") else list(row)
        if len(row) != len(header):
            raise ArityMismatch(f"row has {len(row)} cells, header has {len(header)}")
        lines.append([format_cell(v) for v in row])
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(lines)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    if not os.path.exists(path):
        raise IoFailure(f"{path}: no such file")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise MalformedHeader(f"{path}: empty CSV")
    return rows[0], rows[1:]
