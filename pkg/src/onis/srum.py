"""Semantic Representative Uniqueness Metric (SRUM).

Scores an automated sample against a human-picked sample. Every human frame
looks for the best automated frame that shares a semantic label with it; a
match contributes a semantic score of 1 weighted by ``srum_alpha`` plus a
temporal representative score weighted by ``1 - srum_alpha``. Scoring runs
from the human-frame perspective, so many human frames may match one
automated frame but duplicated automated frames cannot inflate the result.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Tuple

from .errors import MalformedInputError, MissingLabelError

#: Explicit "nothing relevant visible" sentinel. A frame carrying this label
#: is legally labeled but never matches anything, unlike an unlabeled frame,
#: which is an error.
NONE_LABEL = "none"


@dataclass(frozen=True)
class SrumParams:
    """``srum_alpha`` weights the semantic score; ``1 - srum_alpha`` weights
    the representative (temporal proximity) score."""

    srum_alpha: float
    fps: float

    def __post_init__(self):
        if not (0.0 <= self.srum_alpha <= 1.0):
            raise MalformedInputError(
                f"srum_alpha must be in [0, 1], got {self.srum_alpha}"
            )
        if not (math.isfinite(self.fps) and self.fps > 0.0):
            raise MalformedInputError(f"fps must be positive, got {self.fps}")


class LabelMap:
    """Frame index -> semantic labels (lowercased, trimmed, non-empty)."""

    def __init__(self, entries: Mapping[int, Sequence[str]]):
        cleaned = {}
        for frame, labels in entries.items():
            frame = int(frame)
            normalized = tuple(str(l).strip().lower() for l in labels)
            if not normalized or any(not l for l in normalized):
                raise MalformedInputError(
                    f"label list for frame {frame} must be non-empty strings; "
                    f"use ['{NONE_LABEL}'] for frames with nothing relevant visible"
                )
            cleaned[frame] = normalized
        self._entries = cleaned

    @classmethod
    def from_json_file(cls, path) -> "LabelMap":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise MalformedInputError(f"label file {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise MalformedInputError(f"label file {path} must hold a JSON object")
        return cls(data)

    def labels_for(self, frame_index: int) -> Tuple[str, ...]:
        try:
            return self._entries[frame_index]
        except KeyError:
            raise MissingLabelError(frame_index) from None

    def __contains__(self, frame_index: int) -> bool:
        return frame_index in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def frames(self) -> Iterable[int]:
        return self._entries.keys()


@dataclass(frozen=True)
class FrameMatch:
    """Best automated match for one human frame (None when nothing matched)."""

    human_frame: int
    auto_frame: Optional[int]
    score: float


@dataclass(frozen=True)
class SrumReport:
    per_human_frame: Tuple[FrameMatch, ...]
    score: float
    params: SrumParams


def representative_score(h: int, a: int, fps: float) -> float:
    """Temporal proximity score min(1, exp(-|a - h| / fps + 2)).

    Exactly 1.0 while the frames are at most two seconds apart, then decays
    exponentially. Symmetric in its frame arguments.
    """
    if not (math.isfinite(fps) and fps > 0.0):
        raise MalformedInputError(f"fps must be positive, got {fps}")
    return min(1.0, math.exp(-abs(a - h) / fps + 2.0))


def srum(
    auto_frames: Sequence[int],
    human_frames: Sequence[int],
    labels: LabelMap,
    params: SrumParams,
) -> SrumReport:
    """Score one automated sample against one human sample.

    Each human frame takes the maximum over all (automated frame, label)
    pairs whose label appears in the human frame's label list, of
    ``srum_alpha + (1 - srum_alpha) * representative_score``; human frames
    with no label match anywhere score 0. The report score is the mean over
    human frames. Ties between automated frames break toward the earliest
    one in the given order.
    """
    if len(human_frames) == 0:
        raise MalformedInputError("human sample is empty")
    for f in list(auto_frames) + list(human_frames):
        labels.labels_for(f)

    matches = []
    total = 0.0
    for h in human_frames:
        human_labels = set(labels.labels_for(h))
        best_score: Optional[float] = None
        best_frame: Optional[int] = None
        for a in auto_frames:
            for label in labels.labels_for(a):
                if label == NONE_LABEL:
                    continue
                if label in human_labels:
                    score = params.srum_alpha + (
                        1.0 - params.srum_alpha
                    ) * representative_score(h, a, params.fps)
                    if best_score is None or score > best_score:
                        best_score = score
                        best_frame = a
        final = best_score if best_score is not None else 0.0
        matches.append(FrameMatch(h, best_frame, final))
        total += final
    return SrumReport(
        per_human_frame=tuple(matches),
        score=total / len(human_frames),
        params=params,
    )


def srum_average(
    auto_frames: Sequence[int],
    human_samples: Sequence[Sequence[int]],
    labels: LabelMap,
    params: SrumParams,
) -> float:
    """Mean SRUM score of one automated sample across all human samples."""
    if len(human_samples) == 0:
        raise MalformedInputError("at least one human sample is required")
    scores = [srum(auto_frames, h, labels, params).score for h in human_samples]
    return sum(scores) / len(scores)


def human_benchmark(
    human_samples: Sequence[Sequence[int]],
    labels: LabelMap,
    params: SrumParams,
) -> float:
    """Leave-one-out mean: each human sample is scored as if automated
    against the remaining samples, and those averages are averaged."""
    if len(human_samples) < 2:
        raise MalformedInputError(
            f"human benchmark requires at least 2 samples, got {len(human_samples)}"
        )
    totals = []
    for i, sample in enumerate(human_samples):
        rest = [s for j, s in enumerate(human_samples) if j != i]
        totals.append(srum_average(sample, rest, labels, params))
    return sum(totals) / len(totals)


def percent_of_human(auto_score: float, benchmark: float) -> float:
    """Automated score as a percentage of the human benchmark, reported to
    one decimal place."""
    if not benchmark > 0.0:
        raise MalformedInputError(f"benchmark must be positive, got {benchmark}")
    return round(100.0 * auto_score / benchmark, 1)


#: Published scores from the six-annotator dive-video study this metric was
#: introduced with: average SRUM of the ROST and SON-IS automated samples
#: against all human samples, the leave-one-out human benchmark, and the
#: percent-of-human table derived from them. Kept as a numeric fixture; the
#: underlying video and annotations are not redistributable.
REFERENCE_STUDY_SCORES = {
    0.5: {"rost": 0.261, "son_is": 0.460, "human": 0.525},
    0.75: {"rost": 0.297, "son_is": 0.535, "human": 0.601},
    1.0: {"rost": 0.333, "son_is": 0.611, "human": 0.677},
}

REFERENCE_STUDY_PERCENTAGES = {
    0.5: {"rost": 49.7, "son_is": 87.6},
    0.75: {"rost": 49.4, "son_is": 89.1},
    1.0: {"rost": 49.2, "son_is": 90.2},
}
