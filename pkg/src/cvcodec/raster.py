"""Deterministic software rasterization primitives.

All drawing clips per pixel against the canvas, so callers may pass
out-of-bounds geometry freely. Canvases are uint8 arrays of shape (H, W, 3).
"""
from __future__ import annotations

import math

import numpy as np

WHITE = (255, 255, 255)


def blank(height: int, width: int) -> np.ndarray:
    return np.zeros((height, width, 3), dtype=np.uint8)


def _px(value: float) -> int:
    # floor(x + 0.5) rounds .5 consistently toward +inf, unlike round()
    return int(math.floor(value + 0.5))


def put_pixel(img: np.ndarray, x: int, y: int, color) -> None:
    h, w = img.shape[:2]
    if 0 <= x < w and 0 <= y < h:
        img[y, x] = color


def draw_line(img: np.ndarray, x0: int, y0: int, x1: int, y1: int, color) -> None:
    """Bresenham line between integer endpoints, inclusive."""
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    x, y = x0, y0
    while True:
        put_pixel(img, x, y, color)
        if x == x1 and y == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x += sx
        if e2 <= dx:
            err += dx
            y += sy


def _clip_segment(x0, y0, x1, y1, xmax, ymax):
    """Liang-Barsky clip to [0, xmax] x [0, ymax]; None when fully outside."""
    dx, dy = x1 - x0, y1 - y0
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, x0), (dx, xmax - x0), (-dy, y0), (dy, ymax - y0)):
        if p == 0:
            if q < 0:
                return None
            continue
        t = q / p
        if p < 0:
            if t > t1:
                return None
            t0 = max(t0, t)
        else:
            if t < t0:
                return None
            t1 = min(t1, t)
    return (x0 + t0 * dx, y0 + t0 * dy, x0 + t1 * dx, y0 + t1 * dy)


def draw_segment(img: np.ndarray, p0, p1, color) -> None:
    """Line between float endpoints, clipped to the canvas; skipped when
    either end is non-finite."""
    coords = (float(p0[0]), float(p0[1]), float(p1[0]), float(p1[1]))
    if not all(math.isfinite(c) for c in coords):
        return
    h, w = img.shape[:2]
    clipped = _clip_segment(*coords, xmax=w - 1.0, ymax=h - 1.0)
    if clipped is None:
        return
    draw_line(img, _px(clipped[0]), _px(clipped[1]), _px(clipped[2]), _px(clipped[3]), color)


def draw_polyline(img: np.ndarray, points: np.ndarray, color) -> None:
    pts = np.asarray(points, dtype=float)
    if len(pts) == 1:
        draw_segment(img, pts[0], pts[0], color)
        return
    for a, b in zip(pts[:-1], pts[1:]):
        draw_segment(img, a, b, color)


def draw_disc(img: np.ndarray, cx: float, cy: float, radius: int, color) -> None:
    if not (math.isfinite(cx) and math.isfinite(cy)):
        return
    x0, y0 = _px(cx), _px(cy)
    r2 = radius * radius
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            if dx * dx + dy * dy <= r2:
                put_pixel(img, x0 + dx, y0 + dy, color)


def hsv_to_rgb(hue: float, saturation: float, value: float) -> tuple[int, int, int]:
    """Hue in [0, 1); standard HSV cone, returns 8-bit RGB."""
    h = (hue % 1.0) * 6.0
    i = int(h)
    f = h - i
    p = value * (1.0 - saturation)
    q = value * (1.0 - saturation * f)
    t = value * (1.0 - saturation * (1.0 - f))
    r, g, b = (
        (value, t, p),
        (q, value, p),
        (p, value, t),
        (p, q, value),
        (t, p, value),
        (value, p, q),
    )[i % 6]
    return (int(round(r * 255)), int(round(g * 255)), int(round(b * 255)))


def direction_color(u: float, v: float) -> tuple[int, int, int]:
    """Full-saturation color wheel keyed by the direction of (u, v)."""
    hue = (math.atan2(v, u) % (2.0 * math.pi)) / (2.0 * math.pi)
    return hsv_to_rgb(hue, 1.0, 1.0)
