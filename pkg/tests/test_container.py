import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cvcodec.bitstream import (
    ClipPackage,
    parse_clip_package,
    read_stream,
    write_clip_package,
    write_stream,
)
from cvcodec.clips import Clip
from cvcodec.core import ConditionFlags, ModalityRole
from cvcodec.errors import FormatError, InvalidArgument
from cvcodec.flow import FlowGrid
from cvcodec.motion import PoseFrame
from cvcodec.segmentation import BezierCurve, SegFrameCode

from util import bf16_clean, random_package


def minimal_package(**overrides) -> ClipPackage:
    fields = dict(
        width=64,
        height=48,
        fps=12,
        clip=Clip(0, 4),
        level_id=0,
        flags=ConditionFlags.all_of(ModalityRole.ABSENT),
        first_kf=b"first-blob",
        last_kf=b"last-blob",
        caption="",
    )
    fields.update(overrides)
    return ClipPackage(**fields)


def test_level_zero_package_is_headers_and_blobs_only():
    pkg = minimal_package()
    data = write_clip_package(pkg)
    expected = 26 + (4 + len(pkg.first_kf)) + (4 + len(pkg.last_kf)) + 2
    assert len(data) == expected
    assert parse_clip_package(data) == pkg


def test_per_frame_payload_matches_formula():
    rng = np.random.default_rng(40)
    people, n_contours, order, stride = 2, 3, 4, 16
    height, width = 48, 64
    rows, cols = height // stride, width // stride

    def build(intermediates):
        clip = Clip(10, 10 + intermediates + 1)
        return ClipPackage(
            width=width,
            height=height,
            fps=10,
            clip=clip,
            level_id=2,
            flags=ConditionFlags.all_of(ModalityRole.PRESENT),
            first_kf=b"",
            last_kf=b"",
            caption="",
            flow_stride=stride,
            n_contours=n_contours,
            curve_order=order,
            seg_codes=[
                SegFrameCode([BezierCurve(bf16_clean(rng, (order + 1, 2)))], n_contours, order)
                for _ in range(intermediates)
            ],
            motion_codes=[
                PoseFrame([bf16_clean(rng, (21, 2)) for _ in range(people)])
                for _ in range(intermediates)
            ],
            flow_codes=[FlowGrid(stride, bf16_clean(rng, (rows, cols, 2))) for _ in range(intermediates)],
        )

    bracket = people * 42 + 2 * rows * cols + 2 * n_contours * (order + 1)
    one = len(write_clip_package(build(1)))
    two = len(write_clip_package(build(2)))
    assert two - one == 2 * bracket + 3  # payload plus the u16 + u8 count bytes


def test_round_trip_mixed_roles():
    rng = np.random.default_rng(41)
    for _ in range(60):
        pkg = random_package(rng)
        data = write_clip_package(pkg)
        back = parse_clip_package(data)
        assert back == pkg
        assert write_clip_package(back) == data


def test_seg_padding_is_zeroed_and_checked():
    rng = np.random.default_rng(42)
    pkg = minimal_package(
        flags=ConditionFlags(ModalityRole.PRESENT, ModalityRole.ABSENT, ModalityRole.ABSENT),
        level_id=1,
        n_contours=3,
        curve_order=2,
        seg_codes=[SegFrameCode([BezierCurve(bf16_clean(rng, (3, 2)))], 3, 2) for _ in range(3)],
    )
    data = write_clip_package(pkg)
    assert parse_clip_package(data) == pkg
    # flip one byte inside the zero padding of the first seg block
    header = 26 + 4 + len(pkg.first_kf) + 4 + len(pkg.last_kf) + 2
    padding_offset = header + 2 + 1 * 3 * 2 * 2 + 4  # count + first curve + a few bytes
    corrupted = bytearray(data)
    corrupted[padding_offset] ^= 0xFF
    with pytest.raises(FormatError) as exc_info:
        parse_clip_package(bytes(corrupted))
    assert exc_info.value.offset is not None


def test_rejects_bad_magic_version_and_flags():
    pkg = minimal_package()
    data = bytearray(write_clip_package(pkg))
    bad_magic = bytes(b"X" + data[1:])
    with pytest.raises(FormatError) as exc_info:
        parse_clip_package(bad_magic)
    assert exc_info.value.offset == 0

    bad_version = bytearray(data)
    bad_version[4] = 9
    with pytest.raises(FormatError):
        parse_clip_package(bytes(bad_version))

    bad_flags = bytearray(data)
    bad_flags[20] = 0b11  # role value 3
    with pytest.raises(FormatError):
        parse_clip_package(bytes(bad_flags))


def test_rejects_trailing_and_truncated_bytes():
    data = write_clip_package(minimal_package())
    with pytest.raises(FormatError) as exc_info:
        parse_clip_package(data + b"\x00")
    assert exc_info.value.offset == len(data)
    for cut in (3, 12, 25, len(data) - 1):
        with pytest.raises(FormatError):
            parse_clip_package(data[:cut])


def test_rejects_invalid_utf8_caption():
    data = bytearray(write_clip_package(minimal_package(caption="abcd")))
    data[-2] = 0xFF  # inside the caption bytes
    with pytest.raises(FormatError) as exc_info:
        parse_clip_package(bytes(data))
    assert exc_info.value.offset is not None


def test_rejects_non_finite_payload():
    rng = np.random.default_rng(43)
    pkg = minimal_package(
        flags=ConditionFlags(ModalityRole.ABSENT, ModalityRole.ABSENT, ModalityRole.PRESENT),
        flow_stride=24,
        flow_codes=[FlowGrid(24, bf16_clean(rng, (2, 2, 2))) for _ in range(3)],
    )
    data = bytearray(write_clip_package(pkg))
    # overwrite the first flow vector with +inf (0x7F80 little-endian)
    offset = len(data) - 3 * 2 * 2 * 2 * 2
    data[offset : offset + 2] = struct.pack("<H", 0x7F80)
    with pytest.raises(FormatError) as exc_info:
        parse_clip_package(bytes(data))
    assert exc_info.value.offset == offset


def test_rejects_curve_count_over_budget():
    rng = np.random.default_rng(44)
    pkg = minimal_package(
        flags=ConditionFlags(ModalityRole.PRESENT, ModalityRole.ABSENT, ModalityRole.ABSENT),
        n_contours=2,
        curve_order=1,
        seg_codes=[SegFrameCode([BezierCurve(bf16_clean(rng, (2, 2)))], 2, 1) for _ in range(3)],
    )
    data = bytearray(write_clip_package(pkg))
    count_offset = 26 + 4 + len(pkg.first_kf) + 4 + len(pkg.last_kf) + 2
    struct.pack_into("<H", data, count_offset, 7)
    with pytest.raises(FormatError) as exc_info:
        parse_clip_package(bytes(data))
    assert exc_info.value.offset == count_offset


def test_write_validates_structure():
    rng = np.random.default_rng(45)
    with pytest.raises(InvalidArgument):
        write_clip_package(minimal_package(width=0))
    with pytest.raises(InvalidArgument):
        write_clip_package(minimal_package(level_id=5))
    # present modality without per-frame codes
    with pytest.raises(InvalidArgument):
        write_clip_package(
            minimal_package(flags=ConditionFlags.all_of(ModalityRole.PRESENT), flow_stride=8)
        )
    # flow grid geometry mismatch
    with pytest.raises(InvalidArgument):
        write_clip_package(
            minimal_package(
                flags=ConditionFlags(ModalityRole.ABSENT, ModalityRole.ABSENT, ModalityRole.PRESENT),
                flow_stride=16,
                flow_codes=[FlowGrid(16, bf16_clean(rng, (1, 1, 2)))] * 3,
            )
        )


def test_stream_round_trip_and_errors():
    rng = np.random.default_rng(46)
    packages = [random_package(rng) for _ in range(5)]
    stream = write_stream(packages)
    back, offsets = read_stream(stream)
    assert back == packages
    assert offsets[0] == 6
    assert write_stream(back) == stream

    with pytest.raises(FormatError):
        read_stream(b"CVCX\x00\x00")
    with pytest.raises(FormatError):
        read_stream(stream + b"\x00")
    truncated = stream[: offsets[2] + 5]
    with pytest.raises(FormatError) as exc_info:
        read_stream(truncated)
    assert "clip 2" in str(exc_info.value)

    empty = write_stream([])
    assert read_stream(empty) == ([], [])


def test_single_byte_corruption_never_panics():
    rng = np.random.default_rng(47)
    packages = [random_package(rng) for _ in range(4)]
    for pkg in packages:
        data = write_clip_package(pkg)
        positions = rng.choice(len(data), size=min(len(data), 120), replace=False)
        for position in positions:
            corrupted = bytearray(data)
            corrupted[position] ^= int(rng.integers(1, 256))
            try:
                parse_clip_package(bytes(corrupted))
            except FormatError as exc:
                assert exc.offset is not None and 0 <= exc.offset <= len(corrupted)


@st.composite
def package_strategy(draw):
    seed = draw(st.integers(min_value=0, max_value=2**31 - 1))
    rng = np.random.default_rng(seed)
    return random_package(rng)


@settings(max_examples=60, deadline=None)
@given(package_strategy())
def test_round_trip_property(pkg):
    data = write_clip_package(pkg)
    back = parse_clip_package(data)
    assert back == pkg
    assert write_clip_package(back) == data
