"""Deterministic synthetic input corpus for tests and demos.

Generates a small video's worth of extractor outputs: segment-id maps with
moving shapes, smooth flow fields, three articulated figures of different
sizes (so the pose area filter bites differently per level), a shot spike,
keyframe blobs, and a manifest tying them together. Everything is a pure
function of the arguments, so two runs produce byte-identical files.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .imageio import write_pgm, write_png
from .motion import JOINT_COUNT

# Normalized skeleton template, x right / y down, roughly in [-0.25, 0.25] x [-0.45, 0.45].
_TEMPLATE = np.array(
    [
        (0.00, 0.05),  # pelvis
        (-0.08, 0.05),  # left_hip
        (0.08, 0.05),  # right_hip
        (0.00, -0.05),  # spine1
        (-0.10, 0.22),  # left_knee
        (0.10, 0.22),  # right_knee
        (0.00, -0.15),  # spine2
        (-0.11, 0.38),  # left_ankle
        (0.11, 0.38),  # right_ankle
        (0.00, -0.22),  # spine3
        (-0.15, 0.42),  # left_foot
        (0.15, 0.42),  # right_foot
        (0.00, -0.32),  # neck
        (0.00, -0.42),  # head
        (-0.14, -0.28),  # left_shoulder
        (0.14, -0.28),  # right_shoulder
        (-0.20, -0.12),  # left_elbow
        (0.20, -0.12),  # right_elbow
        (-0.24, 0.02),  # left_wrist
        (0.24, 0.02),  # right_wrist
        (0.00, -0.26),  # chest
    ]
)
assert _TEMPLATE.shape == (JOINT_COUNT, 2)


def _labels_frame(height: int, width: int, frame: int) -> np.ndarray:
    yy, xx = np.mgrid[0:height, 0:width]
    labels = np.zeros((height, width), dtype=np.uint16)
    ecx, ecy = 60 + 2 * frame, int(height * 0.27)
    ellipse = ((xx - ecx) / 40.0) ** 2 + ((yy - ecy) / 26.0) ** 2 <= 1.0
    labels[ellipse] = 1
    rx0, ry0 = int(width * 0.52), int(height * 0.62)
    labels[ry0 : ry0 + 40, rx0 : rx0 + 60] = 2
    bcx, bcy = int(width * 0.83), 50 + frame
    blob = (xx - bcx) ** 2 + (yy - bcy) ** 2 <= 5**2
    labels[blob] = 3
    return labels


def _flow_frame(height: int, width: int, frame: int) -> np.ndarray:
    yy, xx = np.mgrid[0:height, 0:width]
    u = 6.0 * np.sin(2.0 * np.pi * yy / height + 0.3 * frame)
    v = 4.0 * np.cos(2.0 * np.pi * xx / width - 0.2 * frame)
    return np.stack([u, v], axis=-1).astype(np.float32)


def _person(scale: float, center_x: float, center_y: float, frame: int, phase: float):
    sway_x = 2.0 * math.sin(0.4 * frame + phase)
    sway_y = 1.5 * math.cos(0.4 * frame + phase)
    pose = _TEMPLATE * scale + np.array([center_x + sway_x, center_y + sway_y])
    return pose


def _joints_lines(height: int, width: int, frames: int) -> list[str]:
    fx = fy = 500.0
    cx, cy = width / 2.0, height / 2.0
    depth = 4.0
    # scales chosen so clipped bbox fractions sit at ~0.30, ~0.15, and ~0.01
    figures = [
        (math.sqrt(0.30 * height * width / 0.4032), width * 0.31, height * 0.5, 0.0),
        (math.sqrt(0.15 * height * width / 0.4032), width * 0.68, height * 0.5, 1.3),
        (math.sqrt(0.01 * height * width / 0.4032), width * 0.885, height * 0.31, 2.1),
    ]
    lines = []
    for frame in range(frames):
        people = []
        for scale, px, py, phase in figures:
            pose = _person(scale, px, py, frame, phase)
            x3 = (pose[:, 0] - cx) * depth / fx
            y3 = (pose[:, 1] - cy) * depth / fy
            z3 = np.full(JOINT_COUNT, depth)
            people.append(np.stack([x3, y3, z3], axis=1).tolist())
        lines.append(
            json.dumps(
                {"camera": {"fx": fx, "fy": fy, "cx": cx, "cy": cy}, "people": people},
                sort_keys=True,
            )
        )
    return lines


def generate_fixture_corpus(
    root: str | Path,
    *,
    width: int = 384,
    height: int = 256,
    fps: int = 8,
    frame_count: int = 12,
    level: int = 1,
    interval: int = 32,
    shot_frame: int | None = 7,
) -> Path:
    """Write a complete synthetic input corpus under root; returns the
    manifest path. Frames run 0..frame_count inclusive."""
    root = Path(root)
    frames = frame_count + 1
    for sub in ("labels", "flow", "keyframes"):
        (root / sub).mkdir(parents=True, exist_ok=True)

    for frame in range(frames):
        write_pgm(root / "labels" / f"frame_{frame:04d}.pgm", _labels_frame(height, width, frame))
        field = _flow_frame(height, width, frame)
        from .flow import write_flo

        write_flo(root / "flow" / f"frame_{frame:04d}.flo", field)
        color = np.zeros((8, 8, 3), dtype=np.uint8)
        color[:, :] = ((37 * frame) % 256, (61 * frame) % 256, (13 * frame + 40) % 256)
        write_png(root / "keyframes" / f"frame_{frame:04d}.png", color)

    probs = ["0.0"] * frame_count
    if shot_frame is not None and 1 <= shot_frame <= frame_count:
        probs[shot_frame - 1] = "0.9"
    (root / "probs.txt").write_text("\n".join(probs) + "\n")

    (root / "joints.jsonl").write_text("\n".join(_joints_lines(height, width, frames)) + "\n")
    (root / "caption.txt").write_text("moving ellipse and box with three figures\n")

    manifest = {
        "video": {"width": width, "height": height, "fps": fps, "frame_count": frame_count},
        "level": level,
        "interval": interval,
        "shot_probs": "probs.txt",
        "label_maps": "labels/frame_{index:04d}.pgm",
        "flows": "flow/frame_{index:04d}.flo",
        "joints": "joints.jsonl",
        "keyframes": "keyframes/frame_{index:04d}.png",
        "caption": "caption.txt",
    }
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest_path
