"""Shared test helpers: independent oracles and random-instance builders."""
from __future__ import annotations

import numpy as np

from cvcodec.bitstream import ClipPackage, bf16_decode_array
from cvcodec.clips import Clip
from cvcodec.core import ConditionFlags, ModalityRole
from cvcodec.flow import FlowGrid
from cvcodec.motion import PoseFrame
from cvcodec.segmentation import BezierCurve, SegFrameCode


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two point sets, by brute force."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def nonzero_points(img: np.ndarray) -> np.ndarray:
    """(x, y) coordinates of non-black pixels."""
    ys, xs = np.nonzero(img.any(axis=2))
    return np.stack([xs, ys], axis=1)


def bf16_clean(rng: np.random.Generator, shape) -> np.ndarray:
    """Random finite float32 values that are exactly bfloat16-representable."""
    n = int(np.prod(shape))
    out = np.empty(n, dtype=np.uint16)
    filled = 0
    while filled < n:
        candidates = rng.integers(0, 1 << 16, size=n - filled + 8, dtype=np.uint32).astype(np.uint16)
        finite = candidates[(candidates & 0x7F80) != 0x7F80]
        take = finite[: n - filled]
        out[filled : filled + take.size] = take
        filled += take.size
    return bf16_decode_array(out.astype("<u2").tobytes()).reshape(shape)


def ellipse_labels(height: int, width: int, cx: float, cy: float, a: float, b: float, angle: float = 0.0) -> np.ndarray:
    """Filled rotated ellipse as a single-id label map (always convex)."""
    yy, xx = np.mgrid[0:height, 0:width]
    dx, dy = xx - cx, yy - cy
    c, s = np.cos(angle), np.sin(angle)
    u = (c * dx + s * dy) / a
    v = (-s * dx + c * dy) / b
    return ((u**2 + v**2) <= 1.0).astype(np.uint16)


def random_ellipse_labels(rng: np.random.Generator, size: int = 80) -> np.ndarray:
    """Random convex shape whose boundary stays comfortably inside the map."""
    a = rng.uniform(8, 26)
    b = rng.uniform(8, 26)
    cx = rng.uniform(a + 2, size - a - 2)
    cy = rng.uniform(b + 2, size - b - 2)
    return ellipse_labels(size, size, cx, cy, a, b, rng.uniform(0, np.pi))


def random_package(
    rng: np.random.Generator,
    *,
    all_present: bool = False,
    uniform_people: bool = True,
    min_intermediates: int = 0,
) -> ClipPackage:
    """Random structurally-valid package with bfloat16-clean payloads."""
    height = int(rng.integers(16, 256))
    width = int(rng.integers(16, 256))
    fps = int(rng.integers(1, 61))
    start = int(rng.integers(0, 500))
    intermediates = int(rng.integers(min_intermediates, 6))
    end = start + intermediates + 1
    level_id = int(rng.integers(0, 4))

    def pick_role():
        if all_present:
            return ModalityRole.PRESENT
        return ModalityRole(int(rng.integers(0, 3)))

    flags = ConditionFlags(pick_role(), pick_role(), pick_role())

    n_contours = int(rng.integers(1, 7))
    curve_order = int(rng.integers(1, 7))
    low_stride = max(1, min(height, width) // 6)
    flow_stride = int(rng.integers(low_stride, min(height, width) + 1))
    rows, cols = height // flow_stride, width // flow_stride

    seg_codes = []
    motion_codes = []
    flow_codes = []
    people = int(rng.integers(0, 5))
    if flags.seg is ModalityRole.PRESENT:
        for _ in range(intermediates):
            count = int(rng.integers(0, n_contours + 1))
            curves = [BezierCurve(bf16_clean(rng, (curve_order + 1, 2))) for _ in range(count)]
            seg_codes.append(SegFrameCode(curves, n_contours, curve_order))
    if flags.motion is ModalityRole.PRESENT:
        for _ in range(intermediates):
            k = people if uniform_people else int(rng.integers(0, 5))
            motion_codes.append(PoseFrame([bf16_clean(rng, (21, 2)) for _ in range(k)]))
    if flags.flow is ModalityRole.PRESENT:
        for _ in range(intermediates):
            flow_codes.append(FlowGrid(flow_stride, bf16_clean(rng, (rows, cols, 2))))

    captions = ["", "a", "two figures crossing a plaza", "café ☕ на улице", "x" * 40]
    return ClipPackage(
        width=width,
        height=height,
        fps=fps,
        clip=Clip(start, end),
        level_id=level_id,
        flags=flags,
        first_kf=rng.bytes(int(rng.integers(0, 64))),
        last_kf=rng.bytes(int(rng.integers(0, 64))),
        caption=captions[int(rng.integers(0, len(captions)))],
        flow_stride=flow_stride,
        n_contours=n_contours,
        curve_order=curve_order,
        seg_codes=seg_codes,
        motion_codes=motion_codes,
        flow_codes=flow_codes,
    )
