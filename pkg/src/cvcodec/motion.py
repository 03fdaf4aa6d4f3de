"""Human motion condition codec: 21-joint 2D poses per frame.

3D joints arrive in camera coordinates and are pinhole-projected to image
coordinates; poses whose joint bounding box covers too small a fraction of
the image are filtered out before transmission. The wire form is a person
count followed by bfloat16 coordinate pairs; the decoder rasterizes a fixed
20-edge skeleton.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, InputError, InvalidArgument
from .raster import blank, draw_disc, draw_segment

JOINT_COUNT = 21

JOINT_NAMES = (
    "pelvis",
    "left_hip",
    "right_hip",
    "spine1",
    "left_knee",
    "right_knee",
    "spine2",
    "left_ankle",
    "right_ankle",
    "spine3",
    "left_foot",
    "right_foot",
    "neck",
    "head",
    "left_shoulder",
    "right_shoulder",
    "left_elbow",
    "right_elbow",
    "left_wrist",
    "right_wrist",
    "chest",
)

_J = {name: i for i, name in enumerate(JOINT_NAMES)}

# 20-edge kinematic tree over the 21 joints above.
SKELETON_EDGES = (
    (_J["pelvis"], _J["left_hip"]),
    (_J["pelvis"], _J["right_hip"]),
    (_J["pelvis"], _J["spine1"]),
    (_J["left_hip"], _J["left_knee"]),
    (_J["right_hip"], _J["right_knee"]),
    (_J["spine1"], _J["spine2"]),
    (_J["left_knee"], _J["left_ankle"]),
    (_J["right_knee"], _J["right_ankle"]),
    (_J["spine2"], _J["spine3"]),
    (_J["left_ankle"], _J["left_foot"]),
    (_J["right_ankle"], _J["right_foot"]),
    (_J["spine3"], _J["chest"]),
    (_J["chest"], _J["neck"]),
    (_J["neck"], _J["head"]),
    (_J["chest"], _J["left_shoulder"]),
    (_J["chest"], _J["right_shoulder"]),
    (_J["left_shoulder"], _J["left_elbow"]),
    (_J["right_shoulder"], _J["right_elbow"]),
    (_J["left_elbow"], _J["left_wrist"]),
    (_J["right_elbow"], _J["right_wrist"]),
)

# One color per edge: torso warm, head yellow, left limbs green, right limbs blue.
EDGE_COLORS = (
    (0, 170, 0),
    (0, 85, 255),
    (255, 85, 0),
    (0, 255, 0),
    (0, 0, 255),
    (255, 170, 0),
    (85, 255, 0),
    (85, 0, 255),
    (255, 255, 0),
    (170, 255, 0),
    (170, 0, 255),
    (255, 0, 0),
    (255, 0, 85),
    (255, 255, 85),
    (0, 255, 85),
    (0, 170, 255),
    (0, 255, 170),
    (85, 170, 255),
    (0, 255, 255),
    (170, 170, 255),
)

JOINT_COLOR = (255, 255, 255)
JOINT_RADIUS = 3

MAX_PEOPLE = 255


@dataclass
class Joints3D:
    """Per-person 21x3 camera-space joints plus pinhole intrinsics."""

    people: list[np.ndarray]
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        people = []
        for p, joints in enumerate(self.people):
            arr = np.asarray(joints, dtype=float)
            if arr.shape != (JOINT_COUNT, 3):
                raise InvalidArgument(f"person {p}: joints must be {JOINT_COUNT}x3, got {arr.shape}")
            people.append(arr)
        self.people = people


@dataclass
class PoseFrame:
    """Per-person 21x2 image-coordinate joints; threshold records the
    area-fraction filter that produced the frame, when one was applied."""

    poses: list[np.ndarray] = field(default_factory=list)
    threshold: float | None = None

    def __post_init__(self):
        poses = []
        for p, pose in enumerate(self.poses):
            arr = np.asarray(pose, dtype=np.float32)
            if arr.shape != (JOINT_COUNT, 2):
                raise InvalidArgument(f"person {p}: pose must be {JOINT_COUNT}x2, got {arr.shape}")
            poses.append(arr)
        self.poses = poses

    @property
    def people(self) -> int:
        return len(self.poses)

    def __eq__(self, other):
        if not isinstance(other, PoseFrame):
            return NotImplemented
        return len(self.poses) == len(other.poses) and all(
            np.array_equal(a, b) for a, b in zip(self.poses, other.poses)
        )


def project_joints(joints: Joints3D) -> PoseFrame:
    """Pinhole projection x = fx*X/Z + cx, y = fy*Y/Z + cy."""
    poses = []
    for p, person in enumerate(joints.people):
        z = person[:, 2]
        bad = np.flatnonzero(z <= 0)
        if bad.size:
            j = int(bad[0])
            raise InvalidArgument(
                f"person {p} joint {JOINT_NAMES[j]!r} has non-positive depth Z={z[j]}"
            )
        x = joints.fx * person[:, 0] / z + joints.cx
        y = joints.fy * person[:, 1] / z + joints.cy
        poses.append(np.stack([x, y], axis=1))
    return PoseFrame(poses)


def pose_area_fraction(pose: np.ndarray, height: int, width: int) -> float:
    """Fraction of the image covered by the joints' bounding box, clipped."""
    pose = np.asarray(pose, dtype=float)
    x0 = np.clip(pose[:, 0].min(), 0.0, width)
    x1 = np.clip(pose[:, 0].max(), 0.0, width)
    y0 = np.clip(pose[:, 1].min(), 0.0, height)
    y1 = np.clip(pose[:, 1].max(), 0.0, height)
    return (x1 - x0) * (y1 - y0) / (height * width)


def filter_poses(frame: PoseFrame, threshold: float, height: int, width: int) -> PoseFrame:
    """Keep poses whose clipped bounding-box area fraction is >= threshold."""
    if not 0.0 < threshold <= 1.0:
        raise InvalidArgument(f"area threshold must be in (0, 1], got {threshold}")
    kept = [p for p in frame.poses if pose_area_fraction(p, height, width) >= threshold]
    return PoseFrame(kept, threshold=threshold)


def encode_motion_frame(frame: PoseFrame) -> bytes:
    """Wire form: person count (u8) then people*21 (x, y) bfloat16 pairs."""
    from .bitstream import bf16_encode_array

    if frame.people > MAX_PEOPLE:
        raise InvalidArgument(f"at most {MAX_PEOPLE} people per frame, got {frame.people}")
    out = bytearray(struct.pack("<B", frame.people))
    for pose in frame.poses:
        out += bf16_encode_array(pose.reshape(-1))
    return bytes(out)


def decode_motion_frame(data: bytes) -> PoseFrame:
    from .bitstream import bf16_decode_array

    if len(data) < 1:
        raise FormatError("motion block truncated: missing person count", 0)
    people = data[0]
    expected = 1 + people * JOINT_COUNT * 2 * 2
    if len(data) < expected:
        raise FormatError(
            f"motion block truncated: {people} people need {expected} bytes, got {len(data)}",
            len(data),
        )
    if len(data) > expected:
        raise FormatError(f"motion block has {len(data) - expected} trailing bytes", expected)
    coords = bf16_decode_array(data[1:expected])
    poses = [coords[p * 42 : (p + 1) * 42].reshape(JOINT_COUNT, 2) for p in range(people)]
    return PoseFrame(poses)


def render_motion_frame(frame: PoseFrame, height: int, width: int) -> np.ndarray:
    """Rasterize the skeleton edges and joint discs on black."""
    img = blank(height, width)
    for pose in frame.poses:
        for edge_index, (a, b) in enumerate(SKELETON_EDGES):
            draw_segment(img, pose[a], pose[b], EDGE_COLORS[edge_index])
        for x, y in pose:
            draw_disc(img, float(x), float(y), JOINT_RADIUS, JOINT_COLOR)
    return img


def read_joint_frames(path: str | Path) -> list[PoseFrame]:
    """Parse a JSON-lines joint file into per-frame image-space poses.

    Each line is an object holding either pre-projected ``people_2d``
    (21x2 arrays) or camera-space ``people`` (21x3 arrays) plus ``camera``
    intrinsics {fx, fy, cx, cy}. Empty lines are not allowed; an object with
    no people yields an empty frame.
    """
    frames = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.strip()
        if not text:
            raise InputError(f"{path}:{lineno}: blank line in joint stream")
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}:{lineno}: invalid JSON: {exc}") from None
        if "people_2d" in obj:
            try:
                frames.append(PoseFrame([np.asarray(p, dtype=float) for p in obj["people_2d"]]))
            except InvalidArgument as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
        elif "people" in obj:
            camera = obj.get("camera")
            if not camera:
                raise InputError(f"{path}:{lineno}: 3-D joints need camera intrinsics")
            try:
                joints = Joints3D(
                    [np.asarray(p, dtype=float) for p in obj["people"]],
                    fx=float(camera["fx"]),
                    fy=float(camera["fy"]),
                    cx=float(camera["cx"]),
                    cy=float(camera["cy"]),
                )
                frames.append(project_joints(joints))
            except (KeyError, TypeError, InvalidArgument) as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
        else:
            frames.append(PoseFrame([]))
    return frames
