"""Optical flow condition codec: stride-grid subsampling and arrow rendering.

Dense fields are sampled on a regular stride-l grid (1-based sample i lands
on pixel min(i*l, dim-1)), transmitted as bfloat16 pairs, and visualized as
colored arrows rather than reconstructed densely, since upsampling a sparse
grid back to a field is too lossy to be useful.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidArgument
from .raster import blank, direction_color, draw_segment, put_pixel

FLO_MAGIC = 202021.25
_FLO_DIM_LIMIT = 1 << 16

ARROW_GAIN = 1.0
ARROW_HEAD_DEG = 30.0
ARROW_MIN_HEAD = 3.0


@dataclass
class FlowGrid:
    """Subsampled flow vectors: (rows, cols, 2) array at a fixed stride."""

    stride: int
    vectors: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.vectors, dtype=np.float32)
        if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidArgument(f"flow grid must be (rows, cols, 2), got {arr.shape}")
        if self.stride < 1:
            raise InvalidArgument(f"stride must be >= 1, got {self.stride}")
        self.vectors = arr

    @property
    def rows(self) -> int:
        return self.vectors.shape[0]

    @property
    def cols(self) -> int:
        return self.vectors.shape[1]

    @property
    def payload_bytes(self) -> int:
        return self.rows * self.cols * 2 * 2

    def __eq__(self, other):
        if not isinstance(other, FlowGrid):
            return NotImplemented
        return self.stride == other.stride and np.array_equal(self.vectors, other.vectors)


def sample_flow_grid(field: np.ndarray, stride: int) -> FlowGrid:
    """Sample an (H, W, 2) field at rows//stride x cols//stride grid points."""
    field = np.asarray(field)
    if field.ndim != 3 or field.shape[2] != 2:
        raise InvalidArgument(f"flow field must be (H, W, 2), got {field.shape}")
    height, width = field.shape[:2]
    if stride < 1 or stride > min(height, width):
        raise InvalidArgument(
            f"stride {stride} outside [1, min(H, W) = {min(height, width)}]"
        )
    rows = height // stride
    cols = width // stride
    r = np.minimum(np.arange(1, rows + 1) * stride, height - 1)
    c = np.minimum(np.arange(1, cols + 1) * stride, width - 1)
    return FlowGrid(stride, field[np.ix_(r, c)].astype(np.float32))


def encode_flow_grid(grid: FlowGrid) -> bytes:
    """Row-major (u, v) pairs as bfloat16."""
    from .bitstream import bf16_encode_array

    return bf16_encode_array(grid.vectors.reshape(-1))


def decode_flow_grid(data: bytes, height: int, width: int, stride: int) -> FlowGrid:
    from .bitstream import bf16_decode_array

    if stride < 1 or stride > min(height, width):
        raise InvalidArgument(f"stride {stride} invalid for {height}x{width}")
    rows = height // stride
    cols = width // stride
    expected = rows * cols * 2 * 2
    if len(data) != expected:
        raise FormatError(
            f"flow block is {len(data)} bytes, expected {expected} for a {rows}x{cols} grid",
            min(len(data), expected),
        )
    values = bf16_decode_array(data)
    return FlowGrid(stride, values.reshape(rows, cols, 2))


def render_flow_arrows(grid: FlowGrid, height: int, width: int) -> np.ndarray:
    """Draw one arrow per grid sample, colored by direction.

    Shaft length is min(|v| * gain, stride - 2); arrowheads are two segments
    at +-30 degrees off the reverse shaft direction. Zero vectors collapse to
    a single dot at the sample position.
    """
    img = blank(height, width)
    head_angle = math.radians(ARROW_HEAD_DEG)
    for i in range(grid.rows):
        for j in range(grid.cols):
            y = min((i + 1) * grid.stride, height - 1)
            x = min((j + 1) * grid.stride, width - 1)
            u, v = float(grid.vectors[i, j, 0]), float(grid.vectors[i, j, 1])
            if not (math.isfinite(u) and math.isfinite(v)):
                continue
            color = direction_color(u, v)
            magnitude = math.hypot(u, v)
            if magnitude == 0.0:
                put_pixel(img, x, y, color)
                continue
            shaft = max(0.0, min(magnitude * ARROW_GAIN, grid.stride - 2.0))
            theta = math.atan2(v, u)
            tip = (x + shaft * math.cos(theta), y + shaft * math.sin(theta))
            draw_segment(img, (x, y), tip, color)
            head = max(ARROW_MIN_HEAD, shaft / 4.0)
            for sign in (1.0, -1.0):
                phi = theta + math.pi + sign * head_angle
                end = (tip[0] + head * math.cos(phi), tip[1] + head * math.sin(phi))
                draw_segment(img, tip, end, color)
    return img


def read_flo(path: str | Path) -> np.ndarray:
    """Middlebury .flo reader: magic, w, h, then interleaved float32 (u, v)."""
    data = Path(path).read_bytes()
    if len(data) < 12:
        raise FormatError(f"{path}: .flo header truncated", len(data))
    magic = struct.unpack_from("<f", data, 0)[0]
    if magic != np.float32(FLO_MAGIC):
        raise FormatError(f"{path}: bad .flo magic {magic!r}", 0)
    width, height = struct.unpack_from("<ii", data, 4)
    if not (0 < width < _FLO_DIM_LIMIT and 0 < height < _FLO_DIM_LIMIT):
        raise FormatError(f"{path}: implausible .flo dimensions {width}x{height}", 4)
    expected = 12 + width * height * 2 * 4
    if len(data) != expected:
        raise FormatError(
            f"{path}: .flo payload is {len(data) - 12} bytes, expected {expected - 12}",
            min(len(data), expected),
        )
    field = np.frombuffer(data, dtype="<f4", count=width * height * 2, offset=12)
    return field.reshape(height, width, 2).copy()


def write_flo(path: str | Path, field: np.ndarray) -> None:
    field = np.asarray(field, dtype=np.float32)
    if field.ndim != 3 or field.shape[2] != 2:
        raise InvalidArgument(f"flow field must be (H, W, 2), got {field.shape}")
    height, width = field.shape[:2]
    with open(path, "wb") as fh:
        fh.write(struct.pack("<fii", FLO_MAGIC, width, height))
        fh.write(field.astype("<f4").tobytes())
