"""Shared domain types: video metadata, compression presets, condition roles.

Frame indexing convention used throughout the package: a video spans frame
indices ``0..frame_count`` inclusive, and shot probabilities cover indices
``1..frame_count`` (one value per frame after the first). Every type here is
an immutable value and safe to share between threads.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import FormatError, InvalidArgument

MODALITIES = ("seg", "motion", "flow")

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class VideoMeta:
    """Dimensions and timing of one input video."""

    width: int
    height: int
    fps: int
    frame_count: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise InvalidArgument(f"frame dimensions must be positive, got {self.width}x{self.height}")
        if self.fps < 1:
            raise InvalidArgument(f"fps must be >= 1, got {self.fps}")
        if self.frame_count < 2:
            raise InvalidArgument(f"frame_count must be >= 2, got {self.frame_count}")

    @property
    def total_frames(self) -> int:
        """Number of physical frames (indices 0..frame_count)."""
        return self.frame_count + 1


class ModalityRole(Enum):
    """What a condition modality means to the decoder.

    PRESENT carries payload; DROPPED_OUT was deliberately zeroed at encode
    time; ABSENT means the encoder never had the signal. Decoders render
    both non-present roles as all-black but keep the distinction so a
    downstream generator can treat them differently.
    """

    PRESENT = 0
    DROPPED_OUT = 1
    ABSENT = 2

    @property
    def wire_name(self) -> str:
        return self.name.lower()


_ROLE_BY_VALUE = {r.value: r for r in ModalityRole}


@dataclass(frozen=True)
class ConditionFlags:
    """Per-clip role of each condition modality; serializes to one byte.

    Bit layout (LSB first): seg in bits 0-1, motion in bits 2-3, flow in
    bits 4-5, bits 6-7 reserved zero.
    """

    seg: ModalityRole
    motion: ModalityRole
    flow: ModalityRole

    def role(self, modality: str) -> ModalityRole:
        if modality not in MODALITIES:
            raise InvalidArgument(f"unknown modality {modality!r}")
        return getattr(self, modality)

    @property
    def all_present(self) -> bool:
        return all(self.role(m) is ModalityRole.PRESENT for m in MODALITIES)

    def to_byte(self) -> int:
        return self.seg.value | (self.motion.value << 2) | (self.flow.value << 4)

    @classmethod
    def from_byte(cls, value: int, offset: int | None = None) -> "ConditionFlags":
        if value & 0xC0:
            raise FormatError(f"reserved flag bits set in 0x{value:02x}", offset)
        roles = []
        for shift in (0, 2, 4):
            bits = (value >> shift) & 0x3
            if bits not in _ROLE_BY_VALUE:
                raise FormatError(f"invalid modality role bits 0b{bits:02b} in 0x{value:02x}", offset)
            roles.append(_ROLE_BY_VALUE[bits])
        return cls(*roles)

    @classmethod
    def all_of(cls, role: ModalityRole) -> "ConditionFlags":
        return cls(role, role, role)


@dataclass(frozen=True)
class CompressionLevel:
    """One row of the compression-settings table.

    Level 0 carries keyframes and text only; all condition parameters are
    absent. Levels 1-3 trade bitrate for condition density via the contour
    budget, the pose area threshold, and the flow sampling stride.
    """

    level_id: int
    n_contours: int | None
    pose_area_threshold: float | None
    flow_stride: int | None

    def __post_init__(self):
        if self.n_contours is not None and self.n_contours < 1:
            raise InvalidArgument("n_contours must be positive when present")
        if self.flow_stride is not None and self.flow_stride < 1:
            raise InvalidArgument("flow_stride must be >= 1 when present")
        if self.pose_area_threshold is not None and not (0.0 < self.pose_area_threshold <= 1.0):
            raise InvalidArgument("pose_area_threshold must be in (0, 1] when present")


_LEVEL_TABLE = {
    0: CompressionLevel(0, None, None, None),
    1: CompressionLevel(1, 10, 1 / 5, 128),
    2: CompressionLevel(2, 20, 1 / 8, 96),
    3: CompressionLevel(3, 30, 1 / 10, 64),
}


def level_preset(level_id: int) -> CompressionLevel:
    """Return the preset for one compression level (0..3)."""
    if level_id not in _LEVEL_TABLE:
        raise InvalidArgument(f"level_id must be in 0..3, got {level_id}")
    return _LEVEL_TABLE[level_id]


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a splitmix64 generator once; returns (output, next_state)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31), state


def make_dropout_plan(seed: int, ratio: float, clip_count: int) -> list[ConditionFlags]:
    """Deterministic per-clip dropout flags.

    Consumes one splitmix64 output per modality, clip-major then in
    (seg, motion, flow) order; a modality is dropped iff u / 2^64 < ratio.
    """
    if not 0.0 <= ratio <= 1.0:
        raise InvalidArgument(f"dropout ratio must be in [0, 1], got {ratio}")
    if clip_count < 0:
        raise InvalidArgument("clip_count must be non-negative")
    state = seed & _MASK64
    plan = []
    for _ in range(clip_count):
        roles = []
        for _ in MODALITIES:
            u, state = splitmix64(state)
            dropped = (u / 2**64) < ratio
            roles.append(ModalityRole.DROPPED_OUT if dropped else ModalityRole.PRESENT)
        plan.append(ConditionFlags(*roles))
    return plan
