"""Clip segmentation and real/fake scoring of clips and whole videos.

A test video is cut into overlapping fixed-length clips. Every unit
occurrence whose padded window lies fully inside a clip contributes one
classifier score; the clip score is the geometric mean of those scores.
Clips containing no trained unit abstain rather than defaulting to 0.5,
and abstentions are reported separately by the evaluation layer.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from wordmotion.classifier import ModelBank, score
from wordmotion.errors import EmptySequence, ModeMismatch
from wordmotion.features import (
    GestureFeature,
    UnitLexicon,
    extract_for_mode,
    padded_span,
    DEFAULT_PADDING,
)
from wordmotion.ingest import FrameFeatureSeries, WordOccurrence

log = logging.getLogger(__name__)

#: Scores are clamped into [EPSILON, 1 - EPSILON] before taking logs.
EPSILON = 1e-8

DEFAULT_CLIP_SECONDS = 10.0
DEFAULT_SHIFT_SECONDS = 2.0


@dataclass(frozen=True)
class ClipSpec:
    video_id: str
    start_frame: int
    end_frame: int
    clip_length_s: float = DEFAULT_CLIP_SECONDS
    shift_s: float = DEFAULT_SHIFT_SECONDS

    def __post_init__(self) -> None:
        if self.end_frame <= self.start_frame:
            raise ValueError("clip must span at least two frames")


@dataclass(frozen=True)
class ClipScore:
    clip: ClipSpec | None
    score: float | None  # None means the clip abstained
    n_scored_units: int
    n_discarded_units: int
    per_unit: tuple[tuple[str, float], ...]

    @property
    def abstained(self) -> bool:
        return self.score is None


def segment_clips(
    series: FrameFeatureSeries,
    clip_length_s: float = DEFAULT_CLIP_SECONDS,
    shift_s: float = DEFAULT_SHIFT_SECONDS,
) -> list[ClipSpec]:
    """Overlapping clips starting every shift_s; only full clips are kept."""
    if clip_length_s <= 0 or shift_s <= 0:
        raise ValueError("clip_length_s and shift_s must be positive")
    total = len(series)
    clip_len = int(round(clip_length_s * series.fps))
    shift = max(1, int(round(shift_s * series.fps)))
    if total < clip_len:
        log.warning(
            "video %s is shorter than one clip (%d < %d frames); no clips",
            series.video_id,
            total,
            clip_len,
        )
        return []
    clips = []
    start = 0
    while start + clip_len <= total:
        clips.append(
            ClipSpec(
                video_id=series.video_id,
                start_frame=start,
                end_frame=start + clip_len - 1,
                clip_length_s=clip_length_s,
                shift_s=shift_s,
            )
        )
        start += shift
    return clips


def geometric_mean(scores: Sequence[float]) -> float:
    """exp(mean(log s)) with scores clamped away from 0 and 1 first.

    Logs are summed in sorted order, which makes the result exactly
    invariant to the order of the inputs.
    """
    arr = np.asarray(scores, dtype=np.float64)
    if arr.size == 0:
        raise EmptySequence("geometric_mean of no scores")
    clamped = np.clip(arr, EPSILON, 1.0 - EPSILON)
    return float(np.exp(np.sort(np.log(clamped)).sum() / arr.size))


def features_in_clip(
    features: Sequence[GestureFeature],
    clip: ClipSpec,
    padding_t: int,
    total_frames: int,
) -> list[GestureFeature]:
    """Features whose padded window lies fully inside the clip.

    Windows straddling a clip boundary are left to the neighbouring clip,
    so a unit's window is never truncated.
    """
    out = []
    for f in features:
        occ = WordOccurrence(f.token, f.span[0], f.span[1])
        pad = 0 if f.mode == "fixed_window" else padding_t
        lo, hi = padded_span(occ, pad, total_frames)
        if lo >= clip.start_frame and hi <= clip.end_frame:
            out.append(f)
    return out


def score_clip(
    bank: ModelBank,
    features: Sequence[GestureFeature],
    clip: ClipSpec | None = None,
) -> ClipScore:
    """Score one clip from the features assigned to it.

    Units without a trained classifier are discarded and counted; the clip
    abstains when nothing scorable remains.
    """
    per_unit: list[tuple[str, float]] = []
    discarded = 0
    for f in features:
        if f.mode != bank.mode.kind:
            raise ModeMismatch(
                f"scoring {f.mode!r} features with a {bank.mode.kind!r} bank"
            )
        clf = bank.lookup(f.token)
        if clf is None:
            discarded += 1
            continue
        per_unit.append((f.token, score(clf, f.vector)))
    if not per_unit:
        return ClipScore(clip, None, 0, discarded, ())
    return ClipScore(
        clip=clip,
        score=geometric_mean([s for _, s in per_unit]),
        n_scored_units=len(per_unit),
        n_discarded_units=discarded,
        per_unit=tuple(per_unit),
    )


def score_video(
    bank: ModelBank,
    series: FrameFeatureSeries,
    occurrences: Sequence[WordOccurrence],
    padding_t: int = DEFAULT_PADDING,
    lexicon: UnitLexicon | None = None,
) -> float | None:
    """Geometric mean over every trained unit in the whole video.

    Returns None (abstain) when no occurrence maps to a trained unit.
    """
    features, _ = extract_for_mode(series, occurrences, bank.mode, padding_t, lexicon)
    result = score_clip(bank, features)
    return result.score
