"""Gesture features: per-unit range-of-motion vectors over frame windows.

For each spoken unit the 25 motion components are reduced to max minus min
over the unit's (padded) frame window, giving a fixed-size vector that is
insensitive to how fast the unit was spoken. Conditioning variants cover
per-word units, per-phoneme units, pooled word windows, and fixed-length
windows that ignore the transcript entirely.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from wordmotion import _kernels
from wordmotion.errors import EmptyLexicon, MalformedRecord, SpanOutOfRange
from wordmotion.ingest import FrameFeatureSeries, WordOccurrence, normalize_token

log = logging.getLogger(__name__)

#: Default padding, in frames, around a unit's aligned span.
DEFAULT_PADDING = 3
#: Default fixed-window length in frames (~1 s at 30 fps).
DEFAULT_WINDOW_LEN = 30

#: Sentinel token for transcript-free fixed windows.
WINDOW_TOKEN = "_window_"
#: Sentinel token for the single pooled classifier of word-window mode.
POOLED_TOKEN = "_pooled_"

MODE_KINDS = ("word", "phoneme", "fixed_window", "word_window")


@dataclass(frozen=True)
class ConditioningMode:
    """How frame windows are chosen and keyed: per word, per phoneme,
    pooled word windows, or fixed-length windows."""

    kind: str
    window_len: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in MODE_KINDS:
            raise ValueError(f"unknown conditioning mode {self.kind!r}")
        if self.kind == "fixed_window":
            if self.window_len is None or self.window_len < 1:
                raise ValueError("fixed_window requires window_len >= 1")
        elif self.window_len is not None:
            raise ValueError(f"{self.kind} takes no window_len")

    def label(self) -> str:
        if self.kind == "fixed_window":
            return f"fixed_window:{self.window_len}"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "ConditioningMode":
        name, _, arg = text.strip().replace("-", "_").partition(":")
        if name == "fixed_window":
            return cls("fixed_window", int(arg) if arg else DEFAULT_WINDOW_LEN)
        return cls(name)


WORD_MODE = ConditioningMode("word")
PHONEME_MODE = ConditioningMode("phoneme")
WORD_WINDOW_MODE = ConditioningMode("word_window")


def fixed_window_mode(window_len: int = DEFAULT_WINDOW_LEN) -> ConditioningMode:
    return ConditioningMode("fixed_window", window_len)


@dataclass(frozen=True)
class GestureFeature:
    """Range-of-motion vector for one unit occurrence."""

    token: str
    vector: np.ndarray  # (25,) float64, nonnegative
    person_id: str
    video_id: str
    span: tuple[int, int]  # aligned (start, end) frames, before padding
    mode: str  # ConditioningMode kind


@dataclass(frozen=True)
class DropRecord:
    """An occurrence skipped during extraction, with the reason."""

    occurrence: WordOccurrence
    reason: str  # "empty_window" | "invalid_frames" | "nonfinite"


def padded_span(occ: WordOccurrence, padding_t: int, total_frames: int) -> tuple[int, int]:
    """Clamped [lo, hi] frame window for an occurrence."""
    lo = max(0, occ.start_frame - padding_t)
    hi = min(total_frames - 1, occ.end_frame + padding_t)
    return lo, hi


def _spans_for(
    series: FrameFeatureSeries, occurrences: Sequence[WordOccurrence], padding_t: int
) -> np.ndarray:
    total = len(series)
    spans = np.empty((len(occurrences), 2), dtype=np.int64)
    for i, occ in enumerate(occurrences):
        if occ.end_frame >= total:
            raise SpanOutOfRange(
                f"occurrence {occ.token!r} ends at frame {occ.end_frame}, "
                f"series has {total}"
            )
        spans[i] = padded_span(occ, padding_t, total)
    return spans


def _build_features(
    series: FrameFeatureSeries,
    occurrences: Sequence[WordOccurrence],
    spans: np.ndarray,
    mode_kind: str,
) -> tuple[list[GestureFeature], list[DropRecord]]:
    deltas, n_valid = _kernels.window_deltas(series.values, series.success, spans)
    features: list[GestureFeature] = []
    drops: list[DropRecord] = []
    for i, occ in enumerate(occurrences):
        total = int(spans[i, 1] - spans[i, 0] + 1)
        valid = int(n_valid[i])
        if valid == 0:
            drops.append(DropRecord(occ, "empty_window"))
            continue
        if (total - valid) * 2 > total:
            drops.append(DropRecord(occ, "invalid_frames"))
            continue
        vec = deltas[i]
        if not np.isfinite(vec).all():
            drops.append(DropRecord(occ, "nonfinite"))
            continue
        features.append(
            GestureFeature(
                token=occ.token,
                vector=vec.copy(),
                person_id=series.person_id,
                video_id=series.video_id,
                span=(occ.start_frame, occ.end_frame),
                mode=mode_kind,
            )
        )
    return features, drops


def extract_word_feature(
    series: FrameFeatureSeries,
    occ: WordOccurrence,
    padding_t: int = DEFAULT_PADDING,
) -> GestureFeature | DropRecord:
    """Range-of-motion vector over the occurrence's padded window.

    Frames flagged as tracking failures are excluded; the occurrence is
    dropped when more than half of the window is invalid or nothing valid
    remains.
    """
    spans = _spans_for(series, [occ], padding_t)
    features, drops = _build_features(series, [occ], spans, "word")
    return features[0] if features else drops[0]


def extract_all(
    series: FrameFeatureSeries,
    occurrences: Sequence[WordOccurrence],
    padding_t: int = DEFAULT_PADDING,
    mode_kind: str = "word",
) -> tuple[list[GestureFeature], list[DropRecord]]:
    """Extract every occurrence in order; drops are recorded, never raised."""
    if not occurrences:
        return [], []
    spans = _spans_for(series, occurrences, padding_t)
    features, drops = _build_features(series, occurrences, spans, mode_kind)
    for d in drops:
        log.debug(
            "dropped %r [%d, %d] in %s: %s",
            d.occurrence.token,
            d.occurrence.start_frame,
            d.occurrence.end_frame,
            series.video_id,
            d.reason,
        )
    return features, drops


def extract_fixed_windows(
    series: FrameFeatureSeries, window_len: int = DEFAULT_WINDOW_LEN
) -> tuple[list[GestureFeature], list[DropRecord]]:
    """Tile the series into non-overlapping windows and extract each one.

    A trailing partial window is kept only when it is at least half the
    window length. No padding is applied and all windows share the
    sentinel token.
    """
    if window_len < 1:
        raise ValueError("window_len must a positive frame count")
    total = len(series)
    starts = list(range(0, total - window_len + 1, window_len))
    tail_start = len(starts) * window_len
    tail_len = total - tail_start
    occurrences = [
        WordOccurrence(WINDOW_TOKEN, s, s + window_len - 1) for s in starts
    ]
    if tail_len * 2 >= window_len and tail_len > 0:
        occurrences.append(WordOccurrence(WINDOW_TOKEN, tail_start, total - 1))
    spans = _spans_for(series, occurrences, 0)
    return _build_features(series, occurrences, spans, "fixed_window")


def words_to_phoneme_occurrences(
    occurrences: Sequence[WordOccurrence], lexicon: "UnitLexicon"
) -> tuple[list[WordOccurrence], list[WordOccurrence]]:
    """Subdivide each word span uniformly across its phonemes.

    Sub-spans share boundary frames and exactly tile the word span. Words
    missing from the lexicon are returned in the dropped list.
    """
    if not lexicon.pronunciations:
        raise EmptyLexicon("lexicon has no entries")
    out: list[WordOccurrence] = []
    dropped: list[WordOccurrence] = []
    for occ in occurrences:
        phonemes = lexicon.pronunciations.get(occ.token)
        if phonemes is None:
            dropped.append(occ)
            continue
        k = len(phonemes)
        d = occ.end_frame - occ.start_frame
        bounds = [occ.start_frame + (2 * j * d + k) // (2 * k) for j in range(k + 1)]
        for j, ph in enumerate(phonemes):
            out.append(WordOccurrence(ph, bounds[j], bounds[j + 1]))
    if dropped:
        log.debug("dropped %d occurrences of out-of-lexicon words", len(dropped))
    return out, dropped


def extract_for_mode(
    series: FrameFeatureSeries,
    occurrences: Sequence[WordOccurrence],
    mode: ConditioningMode,
    padding_t: int = DEFAULT_PADDING,
    lexicon: "UnitLexicon | None" = None,
) -> tuple[list[GestureFeature], list[DropRecord]]:
    """Occurrence-to-feature extraction for any conditioning mode."""
    if mode.kind == "fixed_window":
        return extract_fixed_windows(series, mode.window_len or DEFAULT_WINDOW_LEN)
    if mode.kind == "phoneme":
        if lexicon is None:
            raise EmptyLexicon("phoneme mode requires a lexicon")
        units, _ = words_to_phoneme_occurrences(occurrences, lexicon)
        return extract_all(series, units, padding_t, "phoneme")
    return extract_all(series, occurrences, padding_t, mode.kind)


def select_trainable_units(
    occurrence_counts: Mapping[str, int], training_hours: float
) -> set[str]:
    """Units frequent enough to model: count >= max(1, floor(hours))."""
    if training_hours <= 0:
        raise ValueError("training_hours must be positive")
    threshold = max(1, math.floor(training_hours))
    return {t for t, c in occurrence_counts.items() if c >= threshold}


_ALT_PRONUNCIATION = re.compile(r"\(\d+\)$")


@dataclass(frozen=True)
class UnitLexicon:
    """Word-to-phoneme pronunciations over a fixed phoneme alphabet."""

    pronunciations: dict[str, tuple[str, ...]]
    alphabet: frozenset[str]

    def __len__(self) -> int:
        return len(self.pronunciations)


def parse_lexicon(path: str | Path, alphabet: Iterable[str] | None = None) -> UnitLexicon:
    """Parse 'WORD PH1 PH2 ...' lines; later alternates of a word are ignored."""
    allowed = frozenset(alphabet) if alphabet is not None else None
    prons: dict[str, tuple[str, ...]] = {}
    seen: set[str] = set()
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#") or text.startswith(";;;"):
                continue
            parts = text.split()
            word = normalize_token(_ALT_PRONUNCIATION.sub("", parts[0]))
            if not word or len(parts) < 2:
                raise MalformedRecord(line_no, text[:120])
            phonemes = tuple(parts[1:])
            if allowed is not None:
                for ph in phonemes:
                    if ph not in allowed:
                        raise MalformedRecord(line_no, f"phoneme {ph!r} not in alphabet")
            if word in seen:
                continue
            seen.add(word)
            prons[word] = phonemes
    return UnitLexicon(
        pronunciations=prons,
        alphabet=allowed if allowed is not None else frozenset(
            ph for pron in prons.values() for ph in pron
        ),
    )


def write_lexicon(lexicon: UnitLexicon, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for word in sorted(lexicon.pronunciations):
            fh.write(word + " " + " ".join(lexicon.pronunciations[word]) + "\n")


def write_feature_cache(features: Iterable[GestureFeature], path: str | Path) -> None:
    """Persist extracted features as JSON lines for reuse across runs."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for f in features:
            rec = {
                "token": f.token,
                "person_id": f.person_id,
                "video_id": f.video_id,
                "s": f.span[0],
                "n": f.span[1],
                "values": [float(v) for v in f.vector],
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_feature_cache(path: str | Path, mode_kind: str = "word") -> list[GestureFeature]:
    out: list[GestureFeature] = []
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                rec = json.loads(text)
                out.append(
                    GestureFeature(
                        token=rec["token"],
                        vector=np.asarray(rec["values"], dtype=np.float64),
                        person_id=rec["person_id"],
                        video_id=rec["video_id"],
                        span=(int(rec["s"]), int(rec["n"])),
                        mode=mode_kind,
                    )
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                raise MalformedRecord(line_no, text[:120]) from None
    return out
