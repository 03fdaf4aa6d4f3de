"""Clip-package container, bfloat16 scalar codec, and the bitrate model.

Wire layout of one clip package (all integers little-endian):

    magic "CVC1" (4B), version u8 = 1,
    height u16, width u16, fps u16,
    start u32, end u32, level u8, flags u8,
    flow stride u16, contour budget u16, curve order u8,
    first keyframe blob (u32 length + bytes),
    last keyframe blob (u32 length + bytes),
    caption (u16 length + UTF-8 bytes),
    then for every intermediate frame (start+1 .. end-1), in order:
        seg block    (only when seg is present):    u16 curve count,
                     budget*(order+1)*2 bfloat16 values, zero-padded past
                     the actual curves so the block size is constant
        motion block (only when motion is present): u8 person count,
                     count*21*2 bfloat16 values
        flow block   (only when flow is present):   (H//l)*(W//l)*2
                     bfloat16 values, row-major, (u, v) interleaved

A stream file (.cvc) is the magic "CVCS" (4B) and a u16 clip count followed
by that many packages back to back.

Keyframe blobs are opaque: any image codec may fill them, and a raw PNG
passthrough is what the test fixtures use. Count fields are container
overhead outside the rate formula and are reported separately by the audit.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .clips import Clip
from .core import ConditionFlags, ModalityRole, VideoMeta
from .errors import FormatError, InvalidArgument
from .flow import FlowGrid
from .motion import JOINT_COUNT, MAX_PEOPLE, PoseFrame
from .segmentation import BezierCurve, SegFrameCode

PACKAGE_MAGIC = b"CVC1"
STREAM_MAGIC = b"CVCS"
VERSION = 1

_FIXED_HEADER = struct.Struct("<4sBHHHIIBBHHB")
_AUDIT_TOLERANCE = 1e-9

# ---------------------------------------------------------------------------
# bfloat16


def bf16_encode(value: float) -> bytes:
    """Truncate a float32 to its top 16 bits with round-to-nearest-even."""
    if not math.isfinite(value):
        raise InvalidArgument(f"cannot encode non-finite value {value!r} as bfloat16")
    bits = int(np.float32(value).view(np.uint32))
    bits = (bits + 0x7FFF + ((bits >> 16) & 1)) >> 16
    return struct.pack("<H", bits & 0xFFFF)


def bf16_decode(data: bytes) -> float:
    """Zero-extend a 2-byte pattern back to float32; accepts inf/NaN patterns."""
    if len(data) != 2:
        raise InvalidArgument(f"bfloat16 decode needs exactly 2 bytes, got {len(data)}")
    (half,) = struct.unpack("<H", data)
    return float(np.uint32(half << 16).view(np.float32))


def bf16_encode_array(values: np.ndarray) -> bytes:
    values = np.ascontiguousarray(values, dtype=np.float32)
    if not np.isfinite(values).all():
        raise InvalidArgument("cannot encode non-finite values as bfloat16")
    bits = values.view(np.uint32)
    rounded = (bits + np.uint32(0x7FFF) + ((bits >> np.uint32(16)) & np.uint32(1))) >> np.uint32(16)
    return rounded.astype("<u2").tobytes()


def bf16_decode_array(data: bytes) -> np.ndarray:
    if len(data) % 2:
        raise FormatError(f"bfloat16 payload has odd length {len(data)}", len(data) - 1)
    halves = np.frombuffer(data, dtype="<u2").astype(np.uint32)
    return (halves << np.uint32(16)).view(np.float32)


def bf16_round_array(values: np.ndarray) -> np.ndarray:
    """Quantize values to what they will be after a wire round trip."""
    return bf16_decode_array(bf16_encode_array(values)).reshape(np.shape(values))


# ---------------------------------------------------------------------------
# rate model


@dataclass(frozen=True)
class RateParams:
    """Inputs of the per-clip bitrate formula."""

    q_kb: float
    clip_frames: int
    fps: int
    people: int
    height: int
    width: int
    flow_stride: int
    n_contours: int
    curve_order: int = 8

    def __post_init__(self):
        if self.q_kb < 0:
            raise InvalidArgument("q_kb must be >= 0")
        if self.clip_frames < 2:
            raise InvalidArgument("clip_frames must be >= 2")
        if self.fps < 1:
            raise InvalidArgument("fps must be >= 1")
        if self.people < 0 or self.n_contours < 0:
            raise InvalidArgument("people and n_contours must be >= 0")
        if self.height < 1 or self.width < 1:
            raise InvalidArgument("frame dimensions must be positive")
        if not 1 <= self.flow_stride <= min(self.height, self.width):
            raise InvalidArgument(
                f"flow_stride {self.flow_stride} outside [1, {min(self.height, self.width)}]"
            )
        if self.curve_order < 1:
            raise InvalidArgument("curve_order must be >= 1")


def condition_numbers_per_frame(
    people: int, height: int, width: int, flow_stride: int, n_contours: int, curve_order: int
) -> int:
    """Count of bfloat16 numbers one frame's conditions occupy."""
    return (
        people * JOINT_COUNT * 2
        + 2 * (height // flow_stride) * (width // flow_stride)
        + 2 * n_contours * (curve_order + 1)
    )


def compute_rate(params: RateParams) -> float:
    """Per-clip compressed bitrate in KB per second."""
    numbers = condition_numbers_per_frame(
        params.people,
        params.height,
        params.width,
        params.flow_stride,
        params.n_contours,
        params.curve_order,
    )
    return params.q_kb * params.fps / params.clip_frames + (2.0 * params.fps / 1024.0) * numbers


def compute_bpp(rate_kbps: float, meta: VideoMeta) -> float:
    """Bits per pixel for a given bitrate and video geometry."""
    return rate_kbps * 1024.0 * 8.0 / (meta.fps * meta.height * meta.width)


# ---------------------------------------------------------------------------
# clip package


@dataclass
class ClipPackage:
    """Everything one clip transmits."""

    width: int
    height: int
    fps: int
    clip: Clip
    level_id: int
    flags: ConditionFlags
    first_kf: bytes
    last_kf: bytes
    caption: str
    flow_stride: int = 0
    n_contours: int = 0
    curve_order: int = 0
    seg_codes: list[SegFrameCode] = field(default_factory=list)
    motion_codes: list[PoseFrame] = field(default_factory=list)
    flow_codes: list[FlowGrid] = field(default_factory=list)

    @property
    def q_kb(self) -> float:
        """Keyframe blobs plus caption, in KB."""
        return (len(self.first_kf) + len(self.last_kf) + len(self.caption.encode())) / 1024.0

    def __eq__(self, other):
        if not isinstance(other, ClipPackage):
            return NotImplemented
        return (
            (self.width, self.height, self.fps, self.clip, self.level_id, self.flags)
            == (other.width, other.height, other.fps, other.clip, other.level_id, other.flags)
            and (self.first_kf, self.last_kf, self.caption)
            == (other.first_kf, other.last_kf, other.caption)
            and (self.flow_stride, self.n_contours, self.curve_order)
            == (other.flow_stride, other.n_contours, other.curve_order)
            and self.seg_codes == other.seg_codes
            and self.motion_codes == other.motion_codes
            and self.flow_codes == other.flow_codes
        )

    def validate(self) -> None:
        for name, value, limit in (
            ("width", self.width, 0xFFFF),
            ("height", self.height, 0xFFFF),
            ("fps", self.fps, 0xFFFF),
        ):
            if not 1 <= value <= limit:
                raise InvalidArgument(f"{name} {value} outside [1, {limit}]")
        if not 0 <= self.level_id <= 3:
            raise InvalidArgument(f"level_id {self.level_id} outside 0..3")
        if self.clip.end > 0xFFFFFFFF:
            raise InvalidArgument("clip bounds exceed u32")
        if len(self.first_kf) > 0xFFFFFFFF or len(self.last_kf) > 0xFFFFFFFF:
            raise InvalidArgument("keyframe blob exceeds u32 length")
        if len(self.caption.encode()) > 0xFFFF:
            raise InvalidArgument("caption exceeds u16 byte length")
        if not 0 <= self.flow_stride <= 0xFFFF or not 0 <= self.n_contours <= 0xFFFF:
            raise InvalidArgument("flow_stride and n_contours must fit u16")
        if not 0 <= self.curve_order <= 0xFF:
            raise InvalidArgument("curve_order must fit u8")
        n_frames = self.clip.intermediate_count
        for modality, codes in (
            ("seg", self.seg_codes),
            ("motion", self.motion_codes),
            ("flow", self.flow_codes),
        ):
            role = self.flags.role(modality)
            expected = n_frames if role is ModalityRole.PRESENT else 0
            if len(codes) != expected:
                raise InvalidArgument(
                    f"{modality} is {role.wire_name} and needs {expected} per-frame codes, "
                    f"got {len(codes)}"
                )
        if self.flags.seg is ModalityRole.PRESENT:
            if self.n_contours < 1 or self.curve_order < 1:
                raise InvalidArgument("present seg needs n_contours >= 1 and curve_order >= 1")
            for code in self.seg_codes:
                if code.n_contours != self.n_contours or code.order != self.curve_order:
                    raise InvalidArgument("seg frame code disagrees with package parameters")
        if self.flags.motion is ModalityRole.PRESENT:
            for pose_frame in self.motion_codes:
                if pose_frame.people > MAX_PEOPLE:
                    raise InvalidArgument(f"more than {MAX_PEOPLE} people in a frame")
        if self.flags.flow is ModalityRole.PRESENT:
            if not 1 <= self.flow_stride <= min(self.height, self.width):
                raise InvalidArgument(
                    f"present flow needs stride in [1, {min(self.height, self.width)}]"
                )
            rows, cols = self.height // self.flow_stride, self.width // self.flow_stride
            for grid in self.flow_codes:
                if grid.stride != self.flow_stride or grid.rows != rows or grid.cols != cols:
                    raise InvalidArgument("flow grid disagrees with package geometry")


def write_clip_package(pkg: ClipPackage) -> bytes:
    pkg.validate()
    caption = pkg.caption.encode()
    out = bytearray(
        _FIXED_HEADER.pack(
            PACKAGE_MAGIC,
            VERSION,
            pkg.height,
            pkg.width,
            pkg.fps,
            pkg.clip.start,
            pkg.clip.end,
            pkg.level_id,
            pkg.flags.to_byte(),
            pkg.flow_stride,
            pkg.n_contours,
            pkg.curve_order,
        )
    )
    out += struct.pack("<I", len(pkg.first_kf)) + pkg.first_kf
    out += struct.pack("<I", len(pkg.last_kf)) + pkg.last_kf
    out += struct.pack("<H", len(caption)) + caption
    for frame in range(pkg.clip.intermediate_count):
        if pkg.flags.seg is ModalityRole.PRESENT:
            code = pkg.seg_codes[frame]
            out += struct.pack("<H", len(code.curves))
            for curve in code.curves:
                out += bf16_encode_array(curve.control_points.reshape(-1))
            padding = (code.n_contours - len(code.curves)) * (code.order + 1) * 2 * 2
            out += bytes(padding)
        if pkg.flags.motion is ModalityRole.PRESENT:
            pose_frame = pkg.motion_codes[frame]
            out += struct.pack("<B", pose_frame.people)
            for pose in pose_frame.poses:
                out += bf16_encode_array(pose.reshape(-1))
        if pkg.flags.flow is ModalityRole.PRESENT:
            out += bf16_encode_array(pkg.flow_codes[frame].vectors.reshape(-1))
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes, offset: int = 0):
        self.data = data
        self.offset = offset

    def take(self, count: int, what: str) -> bytes:
        if count < 0 or self.offset + count > len(self.data):
            raise FormatError(
                f"truncated package: {what} needs {count} bytes past offset {self.offset}",
                self.offset,
            )
        chunk = self.data[self.offset : self.offset + count]
        self.offset += count
        return chunk

    def unpack(self, fmt: str, what: str):
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size, what))

    def finite_values(self, numbers: int, what: str) -> np.ndarray:
        start = self.offset
        values = bf16_decode_array(self.take(numbers * 2, what))
        if not np.isfinite(values).all():
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise FormatError(f"non-finite value in {what}", start + bad * 2)
        return values


def read_clip_package(data: bytes, offset: int = 0) -> tuple[ClipPackage, int]:
    """Parse one package starting at ``offset``; returns (package, next offset)."""
    r = _Reader(data, offset)
    header_off = r.offset
    (
        magic,
        version,
        height,
        width,
        fps,
        start,
        end,
        level_id,
        flag_byte,
        flow_stride,
        n_contours,
        curve_order,
    ) = r.unpack("<4sBHHHIIBBHHB", "fixed header")
    if magic != PACKAGE_MAGIC:
        raise FormatError(f"bad package magic {magic!r}", header_off)
    if version != VERSION:
        raise FormatError(f"unsupported package version {version}", header_off + 4)
    if min(height, width, fps) < 1:
        raise FormatError(f"bad geometry {height}x{width} @ {fps} fps", header_off + 5)
    if start > end:
        raise FormatError(f"clip start {start} > end {end}", header_off + 11)
    if level_id > 3:
        raise FormatError(f"level_id {level_id} outside 0..3", header_off + 19)
    flags = ConditionFlags.from_byte(flag_byte, header_off + 20)
    if flags.seg is ModalityRole.PRESENT and (n_contours < 1 or curve_order < 1):
        raise FormatError("present seg with zero contour budget or order", header_off + 23)
    if flags.flow is ModalityRole.PRESENT and not 1 <= flow_stride <= min(height, width):
        raise FormatError(f"present flow with invalid stride {flow_stride}", header_off + 21)

    (first_len,) = r.unpack("<I", "first keyframe length")
    first_kf = r.take(first_len, "first keyframe blob")
    (last_len,) = r.unpack("<I", "last keyframe length")
    last_kf = r.take(last_len, "last keyframe blob")
    (caption_len,) = r.unpack("<H", "caption length")
    caption_off = r.offset
    try:
        caption = r.take(caption_len, "caption").decode()
    except UnicodeDecodeError as exc:
        raise FormatError(f"caption is not valid UTF-8: {exc.reason}", caption_off + exc.start) from None

    clip = Clip(start, end)
    seg_codes: list[SegFrameCode] = []
    motion_codes: list[PoseFrame] = []
    flow_codes: list[FlowGrid] = []
    rows, cols = (height // flow_stride, width // flow_stride) if flow_stride else (0, 0)
    any_present = any(
        flags.role(m) is ModalityRole.PRESENT for m in ("seg", "motion", "flow")
    )
    for _ in range(clip.intermediate_count if any_present else 0):
        if flags.seg is ModalityRole.PRESENT:
            count_off = r.offset
            (curve_count,) = r.unpack("<H", "seg curve count")
            if curve_count > n_contours:
                raise FormatError(
                    f"seg curve count {curve_count} exceeds budget {n_contours}", count_off
                )
            values_off = r.offset
            values = r.finite_values(n_contours * (curve_order + 1) * 2, "seg control points")
            per_curve = (curve_order + 1) * 2
            curves = [
                BezierCurve(values[c * per_curve : (c + 1) * per_curve].reshape(-1, 2))
                for c in range(curve_count)
            ]
            if np.any(values[curve_count * per_curve :] != 0):
                raise FormatError(
                    "seg block padding is not zero", values_off + curve_count * per_curve * 2
                )
            seg_codes.append(SegFrameCode(curves, n_contours, curve_order))
        if flags.motion is ModalityRole.PRESENT:
            (people,) = r.unpack("<B", "motion person count")
            values = r.finite_values(people * JOINT_COUNT * 2, "motion coordinates")
            motion_codes.append(
                PoseFrame([values[p * 42 : (p + 1) * 42].reshape(JOINT_COUNT, 2) for p in range(people)])
            )
        if flags.flow is ModalityRole.PRESENT:
            values = r.finite_values(rows * cols * 2, "flow vectors")
            flow_codes.append(FlowGrid(flow_stride, values.reshape(rows, cols, 2)))

    pkg = ClipPackage(
        width=width,
        height=height,
        fps=fps,
        clip=clip,
        level_id=level_id,
        flags=flags,
        first_kf=first_kf,
        last_kf=last_kf,
        caption=caption,
        flow_stride=flow_stride,
        n_contours=n_contours,
        curve_order=curve_order,
        seg_codes=seg_codes,
        motion_codes=motion_codes,
        flow_codes=flow_codes,
    )
    return pkg, r.offset


def parse_clip_package(data: bytes) -> ClipPackage:
    """Parse a buffer holding exactly one package."""
    pkg, end = read_clip_package(data)
    if end != len(data):
        raise FormatError(f"{len(data) - end} trailing bytes after package", end)
    return pkg


def write_stream(packages: list[ClipPackage]) -> bytes:
    if len(packages) > 0xFFFF:
        raise InvalidArgument("stream supports at most 65535 clips")
    out = bytearray(STREAM_MAGIC + struct.pack("<H", len(packages)))
    for pkg in packages:
        out += write_clip_package(pkg)
    return bytes(out)


def read_stream(data: bytes) -> tuple[list[ClipPackage], list[int]]:
    """Parse a .cvc stream; returns packages and their byte offsets."""
    if len(data) < 6:
        raise FormatError("stream header truncated", len(data))
    if data[:4] != STREAM_MAGIC:
        raise FormatError(f"bad stream magic {data[:4]!r}", 0)
    (count,) = struct.unpack_from("<H", data, 4)
    packages = []
    offsets = []
    offset = 6
    for index in range(count):
        offsets.append(offset)
        try:
            pkg, offset = read_clip_package(data, offset)
        except FormatError as exc:
            raise FormatError(f"clip {index}: {exc.args[0]}", exc.offset) from None
        packages.append(pkg)
    if offset != len(data):
        raise FormatError(f"{len(data) - offset} trailing bytes after {count} clips", offset)
    return packages, offsets


# ---------------------------------------------------------------------------
# rate audit


@dataclass(frozen=True)
class RateAudit:
    """Formula-vs-container agreement for one package.

    ``match`` holds only for fully-present packages with a uniform person
    count and at least one condition-bearing frame; the measured side is the
    actual per-frame payload bytes scaled to a rate, so agreement certifies
    that the container's byte counts are exactly what the formula predicts.
    Count fields and headers are container overhead outside the formula and
    are reported separately.
    """

    r_formula: float
    r_measured: float
    match: bool
    q_kb: float
    people: int
    condition_frames: int
    condition_payload_bytes: int
    count_bytes: int
    header_bytes: int


def audit_rate(pkg: ClipPackage, meta: VideoMeta | None = None) -> RateAudit:
    if meta is not None and (meta.width, meta.height, meta.fps) != (pkg.width, pkg.height, pkg.fps):
        raise InvalidArgument(
            f"meta {meta.width}x{meta.height}@{meta.fps} disagrees with package "
            f"{pkg.width}x{pkg.height}@{pkg.fps}"
        )
    n_frames = pkg.clip.intermediate_count
    people = max((pf.people for pf in pkg.motion_codes), default=0)
    seg_present = pkg.flags.seg is ModalityRole.PRESENT
    flow_present = pkg.flags.flow is ModalityRole.PRESENT

    numbers = people * JOINT_COUNT * 2
    if flow_present and pkg.flow_stride >= 1:
        numbers += 2 * (pkg.height // pkg.flow_stride) * (pkg.width // pkg.flow_stride)
    if seg_present:
        numbers += 2 * pkg.n_contours * (pkg.curve_order + 1)
    q_kb = pkg.q_kb
    frames_total = pkg.clip.frames
    r_formula = q_kb * pkg.fps / frames_total + (2.0 * pkg.fps / 1024.0) * numbers

    payload = 0
    count_bytes = 0
    for code in pkg.seg_codes:
        payload += code.payload_bytes
        count_bytes += 2
    for pose_frame in pkg.motion_codes:
        payload += pose_frame.people * JOINT_COUNT * 2 * 2
        count_bytes += 1
    for grid in pkg.flow_codes:
        payload += grid.payload_bytes

    per_frame = payload / n_frames if n_frames else 0.0
    r_measured = q_kb * pkg.fps / frames_total + per_frame * pkg.fps / 1024.0

    uniform_people = len({pf.people for pf in pkg.motion_codes}) <= 1
    agree = abs(r_formula - r_measured) <= _AUDIT_TOLERANCE * max(1.0, abs(r_formula))
    match = pkg.flags.all_present and uniform_people and n_frames >= 1 and agree

    header_bytes = _FIXED_HEADER.size + 4 + 4 + 2
    return RateAudit(
        r_formula=r_formula,
        r_measured=r_measured,
        match=match,
        q_kb=q_kb,
        people=people,
        condition_frames=n_frames,
        condition_payload_bytes=payload,
        count_bytes=count_bytes,
        header_bytes=header_bytes,
    )
