import numpy as np
import pytest
from hypothesis import given, strategies as st

from cvcodec.clips import (
    Clip,
    KeyframeMark,
    MarkKind,
    read_shot_probs,
    segment_clips,
    select_keyframes,
)
from cvcodec.errors import InputError, InvalidArgument


def kinds(marks):
    return [(m.index, m.kind) for m in marks]


def test_interval_only_trace():
    marks = select_keyframes([0.0] * 10, 4)
    assert kinds(marks) == [
        (0, MarkKind.INITIAL),
        (4, MarkKind.INTERVAL),
        (8, MarkKind.INTERVAL),
        (10, MarkKind.TERMINAL),
    ]


def test_shot_trace():
    probs = [0.0] * 10
    probs[5] = 0.9  # p_6
    marks = select_keyframes(probs, 4)
    assert [m.index for m in marks] == [0, 4, 6, 10]
    assert marks[2].kind is MarkKind.SHOT
    # frame 10 fires the interval criterion before the terminal append
    assert marks[3].kind is MarkKind.INTERVAL


def test_no_criterion_before_terminal():
    marks = select_keyframes([0.0] * 3, 100)
    assert kinds(marks) == [(0, MarkKind.INITIAL), (3, MarkKind.TERMINAL)]


def test_interval_wins_when_both_fire():
    probs = [0.0] * 8
    probs[3] = 1.0  # p_4, same frame the interval fires on
    marks = select_keyframes(probs, 4)
    assert marks[1] == KeyframeMark(4, MarkKind.INTERVAL)


def test_threshold_is_strict():
    probs = [0.5] * 5  # exactly at the default threshold: not a shot
    marks = select_keyframes(probs, 100)
    assert [m.index for m in marks] == [0, 5]
    marks = select_keyframes(probs, 100, threshold=0.4)
    assert marks[1] == KeyframeMark(1, MarkKind.SHOT)


def test_select_rejects_bad_inputs():
    with pytest.raises(InvalidArgument):
        select_keyframes([0.0] * 5, 0)
    with pytest.raises(InvalidArgument):
        select_keyframes([], 4)
    with pytest.raises(InvalidArgument):
        select_keyframes([1.5], 4)


def test_segment_clips_no_shot():
    marks = select_keyframes([0.0] * 10, 4)
    assert [(c.start, c.end) for c in segment_clips(marks)] == [(0, 4), (4, 8), (8, 10)]


def test_segment_clips_shot_offset():
    probs = [0.0] * 10
    probs[5] = 0.9
    clips = segment_clips(select_keyframes(probs, 4))
    assert [(c.start, c.end) for c in clips] == [(0, 4), (4, 6), (7, 10)]


def test_segment_clips_degenerate_partition():
    marks = [KeyframeMark(0, MarkKind.INITIAL), KeyframeMark(7, MarkKind.TERMINAL)]
    assert [(c.start, c.end) for c in segment_clips(marks)] == [(0, 7)]


def test_segment_clips_validates_marks():
    with pytest.raises(InvalidArgument):
        segment_clips([KeyframeMark(0, MarkKind.INITIAL)])
    with pytest.raises(InvalidArgument):
        segment_clips([KeyframeMark(1, MarkKind.INITIAL), KeyframeMark(2, MarkKind.TERMINAL)])
    with pytest.raises(InvalidArgument):
        segment_clips([KeyframeMark(0, MarkKind.INITIAL), KeyframeMark(0, MarkKind.TERMINAL)])


def test_clip_helpers():
    clip = Clip(4, 8)
    assert clip.frames == 5
    assert clip.intermediate_count == 3
    assert list(clip.intermediate_indices()) == [5, 6, 7]
    assert Clip(3, 3).intermediate_count == 0
    with pytest.raises(InvalidArgument):
        Clip(5, 4)


def _random_case(rng):
    t = int(rng.integers(2, 60))
    w = int(rng.integers(1, 20))
    probs = np.where(rng.random(t) < 0.15, rng.uniform(0.6, 1.0, t), rng.uniform(0.0, 0.5, t))
    return probs.tolist(), w


def test_gap_bound_and_coverage_random():
    rng = np.random.default_rng(7)
    for _ in range(500):
        probs, w = _random_case(rng)
        marks = select_keyframes(probs, w)
        indices = [m.index for m in marks]
        assert indices[0] == 0 and indices[-1] == len(probs)
        assert all(b - a <= w for a, b in zip(indices, indices[1:]))
        clips = segment_clips(marks)
        covered = set()
        for clip in clips:
            covered.update(range(clip.start, clip.end + 1))
        assert covered == set(range(len(probs) + 1))


def test_determinism():
    rng = np.random.default_rng(3)
    probs, w = _random_case(rng)
    assert select_keyframes(probs, w) == select_keyframes(probs, w)


def test_interval_density_monotone_without_shots():
    # smaller w never yields fewer keyframes on shot-free input
    probs = [0.0] * 48
    counts = [len(select_keyframes(probs, w)) for w in range(1, 20)]
    assert all(a >= b for a, b in zip(counts, counts[1:]))


@given(
    st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=80),
    st.integers(min_value=1, max_value=30),
)
def test_mark_invariants_property(probs, w):
    marks = select_keyframes(probs, w)
    indices = [m.index for m in marks]
    assert indices == sorted(set(indices))
    assert indices[0] == 0
    assert indices[-1] == len(probs)
    assert marks[0].kind is MarkKind.INITIAL
    assert all(b - a <= w for a, b in zip(indices, indices[1:]))


def test_read_shot_probs(tmp_path):
    path = tmp_path / "probs.txt"
    path.write_text("0.0\n0.9\n0.25\n")
    assert read_shot_probs(path) == [0.0, 0.9, 0.25]
    bad = tmp_path / "bad.txt"
    bad.write_text("0.1\nnope\n")
    with pytest.raises(InputError):
        read_shot_probs(bad)
    out_of_range = tmp_path / "range.txt"
    out_of_range.write_text("1.5\n")
    with pytest.raises(InputError):
        read_shot_probs(out_of_range)
