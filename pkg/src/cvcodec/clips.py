"""Dual-criterion keyframe selection and clip segmentation.

Frame 0 is always the first keyframe. Walking frames 1..T, frame i becomes a
keyframe when the fixed interval since the previous keyframe is reached or
its shot-transition probability exceeds the threshold; the interval criterion
wins when both fire at once. The final frame T closes the mark list, and
consecutive marks become inclusive clips, with a clip that starts at a shot
keyframe shifted one frame right so the new scene starts clean.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

from .errors import InputError, InvalidArgument

DEFAULT_SHOT_THRESHOLD = 0.5


class MarkKind(Enum):
    INITIAL = "initial"
    INTERVAL = "interval"
    SHOT = "shot"
    TERMINAL = "terminal"


@dataclass(frozen=True)
class KeyframeMark:
    index: int
    kind: MarkKind


@dataclass(frozen=True)
class Clip:
    """Inclusive frame range [start, end]."""

    start: int
    end: int

    def __post_init__(self):
        if self.start > self.end:
            raise InvalidArgument(f"clip start {self.start} > end {self.end}")

    @property
    def frames(self) -> int:
        return self.end - self.start + 1

    @property
    def intermediate_count(self) -> int:
        return max(0, self.end - self.start - 1)

    def intermediate_indices(self) -> range:
        return range(self.start + 1, self.end)


def select_keyframes(
    probs: Sequence[float],
    w: int,
    threshold: float = DEFAULT_SHOT_THRESHOLD,
) -> list[KeyframeMark]:
    """Mark keyframes over shot probabilities ``probs[i-1] = p_i`` for frames 1..T."""
    if w < 1:
        raise InvalidArgument(f"keyframe interval w must be >= 1, got {w}")
    if len(probs) == 0:
        raise InvalidArgument("shot probability series is empty")
    marks = [KeyframeMark(0, MarkKind.INITIAL)]
    last_key = 0
    for i in range(1, len(probs) + 1):
        p = float(probs[i - 1])
        if not 0.0 <= p <= 1.0:
            raise InvalidArgument(f"shot probability p_{i} = {p} outside [0, 1]")
        if i - last_key >= w:
            marks.append(KeyframeMark(i, MarkKind.INTERVAL))
            last_key = i
        elif p > threshold:
            marks.append(KeyframeMark(i, MarkKind.SHOT))
            last_key = i
    terminal = len(probs)
    if marks[-1].index != terminal:
        marks.append(KeyframeMark(terminal, MarkKind.TERMINAL))
    return marks


def segment_clips(marks: Sequence[KeyframeMark]) -> list[Clip]:
    """Turn consecutive keyframe marks into inclusive clips.

    A clip whose left mark is a shot keyframe starts one frame later; the
    shot frame itself still ends the preceding clip, so no frame is lost.
    """
    if len(marks) < 2:
        raise InvalidArgument("need at least 2 keyframe marks to form clips")
    indices = [m.index for m in marks]
    if indices[0] != 0:
        raise InvalidArgument(f"first mark must be frame 0, got {indices[0]}")
    if any(b <= a for a, b in zip(indices, indices[1:])):
        raise InvalidArgument("mark indices must be strictly increasing")
    clips = []
    for left, right in zip(marks, marks[1:]):
        start = left.index + 1 if left.kind is MarkKind.SHOT else left.index
        clips.append(Clip(start, right.index))
    return clips


def read_shot_probs(path: str | Path) -> list[float]:
    """Read one shot probability per line; line i holds p_i for frame i."""
    probs = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        text = line.strip()
        if not text:
            continue
        try:
            value = float(text)
        except ValueError:
            raise InputError(f"{path}:{lineno}: not a number: {text!r}") from None
        if not 0.0 <= value <= 1.0:
            raise InputError(f"{path}:{lineno}: probability {value} outside [0, 1]")
        probs.append(value)
    if not probs:
        raise InputError(f"{path}: no probabilities found")
    return probs
