"""Condition codec for generative video compression.

Segments a video into keyframe-anchored clips, compresses segmentation
contours, human poses, and optical flow into compact numeric conditions,
packs everything into a bit-exact clip container with rate accounting, and
renders the dense modality videos a generative decoder consumes.
"""

__version__ = "0.1.0"

from .bitstream import (
    ClipPackage,
    RateAudit,
    RateParams,
    audit_rate,
    bf16_decode,
    bf16_encode,
    compute_bpp,
    compute_rate,
    condition_numbers_per_frame,
    parse_clip_package,
    read_clip_package,
    read_stream,
    write_clip_package,
    write_stream,
)
from .clips import Clip, KeyframeMark, MarkKind, read_shot_probs, segment_clips, select_keyframes
from .core import (
    CompressionLevel,
    ConditionFlags,
    ModalityRole,
    VideoMeta,
    level_preset,
    make_dropout_plan,
)
from .errors import CodecError, FormatError, InputError, InvalidArgument
from .flow import FlowGrid, decode_flow_grid, encode_flow_grid, read_flo, render_flow_arrows, sample_flow_grid, write_flo
from .motion import (
    Joints3D,
    PoseFrame,
    decode_motion_frame,
    encode_motion_frame,
    filter_poses,
    project_joints,
    render_motion_frame,
)
from .pipeline import DecodedVideo, EncodeManifest, decode_video, dump_decoded, encode_video, inspect_stream
from .segmentation import (
    BezierCurve,
    Contour,
    SegFrameCode,
    encode_seg_frame,
    fit_bezier,
    render_seg_frame,
    trace_external_contours,
)

__all__ = [
    "__version__",
    "BezierCurve",
    "Clip",
    "ClipPackage",
    "CodecError",
    "CompressionLevel",
    "ConditionFlags",
    "Contour",
    "DecodedVideo",
    "EncodeManifest",
    "FlowGrid",
    "FormatError",
    "InputError",
    "InvalidArgument",
    "Joints3D",
    "KeyframeMark",
    "MarkKind",
    "ModalityRole",
    "PoseFrame",
    "RateAudit",
    "RateParams",
    "SegFrameCode",
    "VideoMeta",
    "audit_rate",
    "bf16_decode",
    "bf16_encode",
    "compute_bpp",
    "compute_rate",
    "condition_numbers_per_frame",
    "decode_flow_grid",
    "decode_motion_frame",
    "decode_video",
    "dump_decoded",
    "encode_flow_grid",
    "encode_motion_frame",
    "encode_seg_frame",
    "encode_video",
    "filter_poses",
    "fit_bezier",
    "inspect_stream",
    "level_preset",
    "make_dropout_plan",
    "parse_clip_package",
    "project_joints",
    "read_clip_package",
    "read_flo",
    "read_shot_probs",
    "read_stream",
    "render_flow_arrows",
    "render_motion_frame",
    "render_seg_frame",
    "sample_flow_grid",
    "segment_clips",
    "select_keyframes",
    "trace_external_contours",
    "write_clip_package",
    "write_flo",
    "write_stream",
]
