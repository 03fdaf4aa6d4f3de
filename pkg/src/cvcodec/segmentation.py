"""Segmentation condition codec.

Per-frame segment-id maps are compressed to the N longest external contours,
each approximated by one fixed-order Bezier curve whose control points go on
the wire as bfloat16 pairs. Decoding rasterizes the curves as white boundary
polylines on black, which is the dense visual form handed to a downstream
generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .core import CompressionLevel
from .errors import InvalidArgument
from .raster import WHITE, blank, draw_polyline

DEFAULT_CURVE_ORDER = 8

# Moore neighborhood in clockwise order starting west; consecutive ring
# entries are 4-adjacent to each other, which keeps every traced pixel
# 4-adjacent to a background pixel.
_RING = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))
_RING_INDEX = {off: i for i, off in enumerate(_RING)}


@dataclass
class Contour:
    """External boundary of one connected component, as (x, y) pixel coords."""

    segment_id: int
    points: np.ndarray
    closed: bool = True

    def __eq__(self, other):
        if not isinstance(other, Contour):
            return NotImplemented
        return (
            self.segment_id == other.segment_id
            and self.closed == other.closed
            and np.array_equal(self.points, other.points)
        )


@dataclass
class BezierCurve:
    """Control polygon of one Bezier curve; order = len(control_points) - 1."""

    control_points: np.ndarray

    def __post_init__(self):
        cps = np.asarray(self.control_points, dtype=np.float64)
        if cps.ndim != 2 or cps.shape[1] != 2 or cps.shape[0] < 2:
            raise InvalidArgument("control points must be an (n+1, 2) array with n >= 1")
        self.control_points = cps

    @property
    def order(self) -> int:
        return len(self.control_points) - 1

    def __eq__(self, other):
        if not isinstance(other, BezierCurve):
            return NotImplemented
        return np.array_equal(self.control_points, other.control_points)


@dataclass
class SegFrameCode:
    """Up to n_contours curves of a single frame, all at the same order."""

    curves: list[BezierCurve] = field(default_factory=list)
    n_contours: int = 0
    order: int = DEFAULT_CURVE_ORDER

    def __post_init__(self):
        if self.n_contours < 0 or self.order < 1:
            raise InvalidArgument("n_contours must be >= 0 and order >= 1")
        if len(self.curves) > self.n_contours:
            raise InvalidArgument(
                f"{len(self.curves)} curves exceed the n_contours budget {self.n_contours}"
            )
        for curve in self.curves:
            if curve.order != self.order:
                raise InvalidArgument(f"curve order {curve.order} != frame order {self.order}")

    @property
    def payload_bytes(self) -> int:
        """Wire size of the zero-padded coordinate block (count field excluded)."""
        return 2 * self.n_contours * (self.order + 1) * 2

    def __eq__(self, other):
        if not isinstance(other, SegFrameCode):
            return NotImplemented
        return (
            self.n_contours == other.n_contours
            and self.order == other.order
            and self.curves == other.curves
        )


def _trace_component(mask: np.ndarray, start: tuple[int, int]) -> list[tuple[int, int]]:
    """Moore-neighbor walk around one component, starting at its raster-first
    pixel (whose west neighbor is guaranteed background).

    The walk is a deterministic map on (pixel, backtrack) states, so it stops
    at the first repeated state. Usually that repeat is the start state
    itself (one clean loop); for components whose start pixel is reachable
    only diagonally the orbit can bypass the virtual initial state, and the
    first-repeat rule still terminates after covering the boundary once.
    """
    h, w = mask.shape
    points = [start]
    cur = start
    back = 0  # ring index of the backtrack pixel relative to cur; west initially
    seen = {(start, 0)}
    while True:
        moved = False
        for step in range(1, 9):
            idx = (back + step) % 8
            dr, dc = _RING[idx]
            nr, nc = cur[0] + dr, cur[1] + dc
            if 0 <= nr < h and 0 <= nc < w and mask[nr, nc]:
                pr, pc = _RING[(idx - 1) % 8]
                backtrack = (cur[0] + pr, cur[1] + pc)
                cur = (nr, nc)
                back = _RING_INDEX[(backtrack[0] - nr, backtrack[1] - nc)]
                moved = True
                break
        if not moved:
            return points  # isolated pixel
        state = (cur, back)
        if state in seen:
            if len(points) > 1 and points[-1] == points[0]:
                points.pop()
            return points
        seen.add(state)
        points.append(cur)


def trace_external_contours(labels: np.ndarray) -> list[Contour]:
    """External contour of every connected component of every non-zero id.

    Components use 8-connectivity; holes are ignored. Contours come out in
    discovery order: ascending segment id, then raster order of each
    component's first pixel.
    """
    labels = np.asarray(labels)
    if labels.ndim != 2 or labels.size == 0:
        raise InvalidArgument("label map must be a non-empty 2-D array")
    contours = []
    eight = np.ones((3, 3), dtype=int)
    for segment_id in np.unique(labels):
        if segment_id == 0:
            continue
        mask = labels == segment_id
        components, count = ndimage.label(mask, structure=eight)
        if count == 0:
            continue
        flat = components.ravel()
        nonzero = np.flatnonzero(flat)
        _, first_positions = np.unique(flat[nonzero], return_index=True)
        for flat_start in nonzero[first_positions]:
            start = (int(flat_start) // labels.shape[1], int(flat_start) % labels.shape[1])
            path = _trace_component(mask, start)
            points = np.array([(c, r) for r, c in path], dtype=np.int32)
            contours.append(Contour(int(segment_id), points, closed=True))
    return contours


def chord_length_params(points: np.ndarray) -> np.ndarray:
    """Normalized cumulative chord length in [0, 1]; uniform if degenerate."""
    pts = np.asarray(points, dtype=float)
    deltas = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    total = deltas.sum()
    if total == 0.0:
        return np.linspace(0.0, 1.0, len(pts))
    t = np.concatenate([[0.0], np.cumsum(deltas)]) / total
    t[-1] = 1.0
    return t


def bernstein_matrix(t: np.ndarray, order: int) -> np.ndarray:
    """Rows of Bernstein basis values: M[j, i] = C(n,i) (1-t_j)^(n-i) t_j^i."""
    t = np.asarray(t, dtype=float)
    i = np.arange(order + 1)
    coeff = np.array([math.comb(order, k) for k in i], dtype=float)
    return coeff * np.power.outer(1.0 - t, order - i) * np.power.outer(t, i)


def evaluate_bezier(control_points: np.ndarray, t: np.ndarray) -> np.ndarray:
    cps = np.asarray(control_points, dtype=float)
    return bernstein_matrix(t, len(cps) - 1) @ cps


def fit_bezier(points: np.ndarray, order: int) -> tuple[BezierCurve, float]:
    """Least-squares Bezier fit with chord-length parameters and pinned ends.

    First and last control points are fixed to the first and last input
    points; the interior solves the linear least-squares problem. When the
    input has fewer points than order + 1 the effective order drops to
    len(points) - 1, visible on the returned curve. Returns the curve and
    the RMS point-to-curve residual at the fit parameters.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidArgument("contour points must be an (m, 2) array")
    if len(pts) < 2:
        raise InvalidArgument(f"need >= 2 points to fit a curve, got {len(pts)}")
    if order < 1:
        raise InvalidArgument(f"curve order must be >= 1, got {order}")
    n = min(order, len(pts) - 1)
    t = chord_length_params(pts)
    basis = bernstein_matrix(t, n)
    cps = np.empty((n + 1, 2))
    cps[0] = pts[0]
    cps[n] = pts[-1]
    if n > 1:
        rhs = pts - np.outer(basis[:, 0], pts[0]) - np.outer(basis[:, n], pts[-1])
        interior, *_ = np.linalg.lstsq(basis[:, 1:n], rhs, rcond=None)
        cps[1:n] = interior
    residuals = basis @ cps - pts
    rms = float(np.sqrt(np.mean(np.sum(residuals**2, axis=1))))
    return BezierCurve(cps), rms


def elevate_degree(control_points: np.ndarray, target_order: int) -> np.ndarray:
    """Raise a curve's order without changing its trace (exact identity)."""
    cps = np.asarray(control_points, dtype=float)
    order = len(cps) - 1
    if target_order < order:
        raise InvalidArgument(f"cannot lower order {order} to {target_order}")
    while order < target_order:
        raised = np.empty((order + 2, 2))
        raised[0] = cps[0]
        raised[-1] = cps[-1]
        for i in range(1, order + 1):
            a = i / (order + 1)
            raised[i] = a * cps[i - 1] + (1.0 - a) * cps[i]
        cps = raised
        order += 1
    return cps


def encode_seg_frame(
    labels: np.ndarray,
    level: CompressionLevel,
    order: int = DEFAULT_CURVE_ORDER,
) -> SegFrameCode:
    """Trace, rank, and fit the longest contours of one frame.

    Contours are ranked by boundary point count (ties broken by smaller
    segment id, then discovery order), the top n_contours are fitted at the
    wire order, shorter fits are degree-elevated back up, and control points
    are quantized to their bfloat16 wire values so encode and decode render
    the same pixels.
    """
    from .bitstream import bf16_round_array

    if level.n_contours is None:
        raise InvalidArgument(
            f"level {level.level_id} carries no segmentation; skip the modality instead"
        )
    contours = trace_external_contours(labels)
    order_key = {id(c): pos for pos, c in enumerate(contours)}
    ranked = sorted(contours, key=lambda c: (-len(c.points), c.segment_id, order_key[id(c)]))
    curves = []
    for contour in ranked[: level.n_contours]:
        pts = contour.points.astype(float)
        if contour.closed and len(pts) >= 1:
            pts = np.vstack([pts, pts[:1]])
        curve, _ = fit_bezier(pts, order)
        cps = elevate_degree(curve.control_points, order)
        curves.append(BezierCurve(bf16_round_array(cps)))
    return SegFrameCode(curves=curves, n_contours=level.n_contours, order=order)


def render_seg_frame(code: SegFrameCode, height: int, width: int) -> np.ndarray:
    """Rasterize decoded curves as white polylines on black."""
    img = blank(height, width)
    samples = max(64, 4 * (code.order + 1))
    t = np.linspace(0.0, 1.0, samples)
    for curve in code.curves:
        draw_polyline(img, evaluate_bezier(curve.control_points, t), WHITE)
    return img
