"""Image file I/O: label maps in (PGM / 16-bit PNG), frame dumps out (PNG / PPM)."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .errors import FormatError, InputError


def read_label_map(path: str | Path) -> np.ndarray:
    """Load a segment-id map as a uint16 (H, W) array; 0 is background."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        return read_pgm(path)
    if suffix == ".png":
        img = Image.open(path)
        if img.mode in ("I;16", "I;16B", "I;16L", "I"):
            arr = np.asarray(img.convert("I"), dtype=np.int64)
        elif img.mode == "P":
            # palette indices are the segment ids
            arr = np.asarray(img, dtype=np.int64)
        elif img.mode == "L":
            arr = np.asarray(img, dtype=np.int64)
        else:
            raise InputError(f"{path}: unsupported PNG mode {img.mode!r} for a label map")
        if arr.min() < 0 or arr.max() > 0xFFFF:
            raise InputError(f"{path}: label values outside the 16-bit range")
        return arr.astype(np.uint16)
    raise InputError(f"{path}: label maps must be .pgm or .png")


def read_pgm(path: str | Path) -> np.ndarray:
    """Binary PGM (P5) reader; 8-bit or big-endian 16-bit samples."""
    data = Path(path).read_bytes()
    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            if data[pos : pos + 1].isspace():
                pos += 1
            elif data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos] not in (0x0A, 0x0D):
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: truncated PGM header", start)
        return data[start:pos]

    if next_token() != b"P5":
        raise FormatError(f"{path}: not a binary PGM (P5) file", 0)
    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError:
        raise FormatError(f"{path}: malformed PGM header", pos) from None
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise FormatError(f"{path}: bad PGM dimensions {width}x{height} maxval {maxval}", pos)
    pos += 1  # single whitespace byte after maxval
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    expected = width * height * dtype.itemsize
    if len(data) - pos < expected:
        raise FormatError(f"{path}: PGM pixel data truncated", len(data))
    pixels = np.frombuffer(data, dtype=dtype, count=width * height, offset=pos)
    return pixels.reshape(height, width).astype(np.uint16)


def write_pgm(path: str | Path, labels: np.ndarray) -> None:
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise InputError("label map must be 2-D")
    height, width = labels.shape
    maxval = max(1, int(labels.max()))
    header = f"P5\n{width} {height}\n{maxval}\n".encode()
    if maxval > 255:
        body = labels.astype(">u2").tobytes()
    else:
        body = labels.astype("u1").tobytes()
    Path(path).write_bytes(header + body)


def write_label_png(path: str | Path, labels: np.ndarray) -> None:
    arr = np.asarray(labels, dtype=np.uint16)
    Image.fromarray(arr).save(path, format="PNG")  # uint16 maps to 16-bit grayscale


def write_ppm(path: str | Path, rgb: np.ndarray) -> None:
    rgb = np.asarray(rgb, dtype=np.uint8)
    height, width = rgb.shape[:2]
    Path(path).write_bytes(f"P6\n{width} {height}\n255\n".encode() + rgb.tobytes())


def write_png(path: str | Path, rgb: np.ndarray) -> None:
    Image.fromarray(np.asarray(rgb, dtype=np.uint8), mode="RGB").save(path, format="PNG")


def write_frame(path: str | Path, rgb: np.ndarray, image_format: str) -> Path:
    """Write one rendered frame as .png or .ppm and return the final path."""
    if image_format not in ("png", "ppm"):
        raise InputError(f"unsupported image format {image_format!r}")
    path = Path(path).with_suffix("." + image_format)
    if image_format == "png":
        write_png(path, rgb)
    else:
        write_ppm(path, rgb)
    return path
