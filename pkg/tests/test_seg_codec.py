import numpy as np
import pytest

from cvcodec.bitstream import bf16_round_array
from cvcodec.core import level_preset
from cvcodec.errors import InvalidArgument
from cvcodec.segmentation import (
    BezierCurve,
    SegFrameCode,
    encode_seg_frame,
    render_seg_frame,
    trace_external_contours,
)

from util import hausdorff, nonzero_points, random_ellipse_labels


def _rect(labels, y0, x0, h, w, value):
    labels[y0 : y0 + h, x0 : x0 + w] = value


def test_rank_and_truncate_keeps_longest():
    labels = np.zeros((40, 60), dtype=np.uint16)
    _rect(labels, 2, 2, 12, 10, 1)  # boundary 2*(12+10)-4 = 40
    _rect(labels, 20, 6, 7, 5, 2)  # boundary 20
    _rect(labels, 30, 30, 3, 3, 3)  # boundary 8
    contours = trace_external_contours(labels)
    by_id = {c.segment_id: c for c in contours}
    assert {cid: len(c.points) for cid, c in by_id.items()} == {1: 40, 2: 20, 3: 8}

    level = level_preset(1)
    code = encode_seg_frame(labels, level.__class__(1, 2, level.pose_area_threshold, level.flow_stride), 8)
    assert len(code.curves) == 2
    # pinned first control point identifies which contour each curve came from
    starts = [tuple(np.asarray(c.control_points[0], dtype=int)) for c in code.curves]
    assert starts[0] == tuple(by_id[1].points[0])
    assert starts[1] == tuple(by_id[2].points[0])


def test_tie_break_smaller_id_first():
    labels = np.zeros((20, 40), dtype=np.uint16)
    _rect(labels, 2, 2, 4, 4, 5)
    _rect(labels, 10, 20, 4, 4, 3)  # same perimeter, smaller id, later in raster order
    level = level_preset(1)
    code = encode_seg_frame(labels, level.__class__(1, 1, None, None), 4)
    assert len(code.curves) == 1
    assert tuple(np.asarray(code.curves[0].control_points[0], dtype=int)) == (20, 10)


def test_empty_map_gives_padded_frame():
    code = encode_seg_frame(np.zeros((16, 16), dtype=np.uint16), level_preset(1), 8)
    assert code.curves == []
    assert code.n_contours == 10
    assert code.payload_bytes == 360


def test_payload_size_formula():
    assert SegFrameCode([], 10, 8).payload_bytes == 360
    assert SegFrameCode([], 30, 8).payload_bytes == 1080
    assert SegFrameCode([], 1, 1).payload_bytes == 8


def test_level_zero_is_rejected():
    with pytest.raises(InvalidArgument):
        encode_seg_frame(np.zeros((8, 8), dtype=np.uint16), level_preset(0), 8)


def test_short_contours_are_elevated_to_wire_order():
    labels = np.zeros((10, 10), dtype=np.uint16)
    labels[4, 4] = 1  # single pixel: 1-point contour
    code = encode_seg_frame(labels, level_preset(1), 8)
    assert len(code.curves) == 1
    assert code.curves[0].order == 8
    assert np.allclose(code.curves[0].control_points, [4.0, 4.0])


def test_control_points_are_wire_exact():
    rng = np.random.default_rng(2)
    labels = random_ellipse_labels(rng)
    code = encode_seg_frame(labels, level_preset(1), 8)
    for curve in code.curves:
        assert np.array_equal(curve.control_points, bf16_round_array(curve.control_points))


def test_render_no_curves_is_black():
    img = render_seg_frame(SegFrameCode([], 10, 8), 24, 32)
    assert img.shape == (24, 32, 3)
    assert not img.any()


def test_render_degree_one_diagonal():
    code = SegFrameCode([BezierCurve(np.array([[0.0, 0.0], [9.0, 9.0]], dtype=np.float32))], 1, 1)
    img = render_seg_frame(code, 10, 10)
    points = {tuple(p) for p in nonzero_points(img)}
    assert points == {(i, i) for i in range(10)}
    assert np.all(img[np.arange(10), np.arange(10)] == 255)


def test_render_clips_out_of_bounds():
    curve = BezierCurve(np.array([[-20.0, 5.0], [40.0, 5.0]], dtype=np.float32))
    img = render_seg_frame(SegFrameCode([curve], 1, 1), 10, 10)
    points = nonzero_points(img)
    assert len(points) == 10
    assert np.all(points[:, 1] == 5)


def test_round_trip_hausdorff_convex_shapes():
    rng = np.random.default_rng(33)
    checked = 0
    while checked < 12:
        labels = random_ellipse_labels(rng)
        (contour,) = trace_external_contours(labels)
        if len(contour.points) > 200:  # keep to modest perimeters
            continue
        code = encode_seg_frame(labels, level_preset(1), 8)
        rendered = nonzero_points(render_seg_frame(code, *labels.shape))
        assert hausdorff(rendered, contour.points) <= 3.0
        checked += 1


def test_render_is_deterministic():
    rng = np.random.default_rng(8)
    labels = random_ellipse_labels(rng)
    code = encode_seg_frame(labels, level_preset(2), 8)
    first = render_seg_frame(code, *labels.shape)
    second = render_seg_frame(code, *labels.shape)
    assert np.array_equal(first, second)
