"""Parsing and writing of frame-feature files, word alignments, and manifests.

A frame-feature file is UTF-8 CSV with a header and one row per video frame
carrying the 25 motion components (17 action-unit intensities, 3 head
rotations, 3 head translations, horizontal and vertical lip distances). Lip
distances may be given directly or derived from four 3-D mouth landmarks.
An alignment file has one spoken word per line with start/end seconds. A
manifest is JSON-lines, one video entry per line.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from wordmotion.errors import (
    EmptyFile,
    MalformedRecord,
    MissingColumn,
    MissingFile,
    NegativeDuration,
    NonFiniteCoordinate,
    NonMonotonicFrames,
    UnknownScenario,
)

log = logging.getLogger(__name__)

AU_COLUMNS = (
    "AU01_r", "AU02_r", "AU04_r", "AU05_r", "AU06_r", "AU07_r", "AU09_r",
    "AU10_r", "AU12_r", "AU14_r", "AU15_r", "AU17_r", "AU20_r", "AU23_r",
    "AU25_r", "AU26_r", "AU45_r",
)
ROTATION_COLUMNS = ("pose_Rx", "pose_Ry", "pose_Rz")
TRANSLATION_COLUMNS = ("pose_Tx", "pose_Ty", "pose_Tz")
LIP_COLUMNS = ("lip_hor", "lip_ver")

#: Canonical order of the 25 motion components used everywhere downstream.
COMPONENT_NAMES = AU_COLUMNS + ROTATION_COLUMNS + TRANSLATION_COLUMNS + LIP_COLUMNS
N_COMPONENTS = len(COMPONENT_NAMES)

# 68-point scheme: 48/54 are the mouth corners, 51/57 the outer upper/lower lip.
_LANDMARK_POINTS = (48, 54, 51, 57)
LANDMARK_COLUMNS = tuple(
    f"{axis}_{idx}" for idx in _LANDMARK_POINTS for axis in ("X", "Y", "Z")
)

SCENARIOS = ("real", "dubbing", "lipsync", "impersonator", "faceswap", "synthetic")
#: Fake scenarios that may appear in a training split; the rest are test-only.
TRAINABLE_FAKE_SCENARIOS = ("dubbing", "lipsync")


@dataclass(frozen=True)
class FrameRecord:
    """One tracked frame: 25 motion components plus bookkeeping."""

    frame_index: int
    timestamp: float
    success: bool
    au_intensities: tuple[float, ...]
    head_rotation: tuple[float, float, float]
    head_translation: tuple[float, float, float]
    lip_hor: float
    lip_ver: float

    def as_vector(self) -> np.ndarray:
        return np.array(
            self.au_intensities
            + self.head_rotation
            + self.head_translation
            + (self.lip_hor, self.lip_ver)
        )


@dataclass(eq=False)
class FrameFeatureSeries:
    """Per-frame motion track of one video, stored as column arrays."""

    person_id: str
    video_id: str
    fps: float
    frame_index: np.ndarray  # (T,) int64, strictly increasing
    timestamp: np.ndarray  # (T,) float64, nondecreasing
    success: np.ndarray  # (T,) bool
    values: np.ndarray  # (T, 25) float64 in COMPONENT_NAMES order

    def __post_init__(self) -> None:
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if len(self.frame_index) == 0:
            raise EmptyFile(f"empty series for video {self.video_id!r}")
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.frame_index), N_COMPONENTS):
            raise ValueError(f"values must be (T, {N_COMPONENTS})")

    def __len__(self) -> int:
        return len(self.frame_index)

    def frame(self, i: int) -> FrameRecord:
        v = self.values[i]
        return FrameRecord(
            frame_index=int(self.frame_index[i]),
            timestamp=float(self.timestamp[i]),
            success=bool(self.success[i]),
            au_intensities=tuple(v[0:17]),
            head_rotation=tuple(v[17:20]),
            head_translation=tuple(v[20:23]),
            lip_hor=float(v[23]),
            lip_ver=float(v[24]),
        )

    @property
    def frames(self) -> Iterator[FrameRecord]:
        return (self.frame(i) for i in range(len(self)))

    def duration_seconds(self) -> float:
        return len(self) / self.fps

    def truncated(self, n_frames: int) -> "FrameFeatureSeries":
        """First ``n_frames`` frames as a new series (views, not copies)."""
        if not 1 <= n_frames <= len(self):
            raise ValueError(f"n_frames must be in [1, {len(self)}]")
        return FrameFeatureSeries(
            person_id=self.person_id,
            video_id=self.video_id,
            fps=self.fps,
            frame_index=self.frame_index[:n_frames],
            timestamp=self.timestamp[:n_frames],
            success=self.success[:n_frames],
            values=self.values[:n_frames],
        )


@dataclass(frozen=True, order=True)
class WordOccurrence:
    """A spoken unit (word or phoneme) with its inclusive frame span."""

    token: str
    start_frame: int
    end_frame: int

    def __post_init__(self) -> None:
        if not self.token:
            raise ValueError("token must be nonempty")
        if self.end_frame < self.start_frame or self.start_frame < 0:
            raise ValueError(
                f"bad span [{self.start_frame}, {self.end_frame}] for {self.token!r}"
            )

    @property
    def duration(self) -> int:
        return self.end_frame - self.start_frame


def normalize_token(word: str) -> str:
    """Lowercase and strip surrounding non-alphanumerics; inner marks stay."""
    w = word.strip().lower()
    start, end = 0, len(w)
    while start < end and not w[start].isalnum():
        start += 1
    while end > start and not w[end - 1].isalnum():
        end -= 1
    return w[start:end]


def derive_lip_features(
    mouth_corner_left: Sequence[float],
    mouth_corner_right: Sequence[float],
    upper_lip: Sequence[float],
    lower_lip: Sequence[float],
) -> tuple[float, float]:
    """Horizontal corner-to-corner and vertical lip distances, in mm."""
    points = np.array(
        [mouth_corner_left, mouth_corner_right, upper_lip, lower_lip], dtype=float
    )
    if points.shape != (4, 3) or not np.isfinite(points).all():
        raise NonFiniteCoordinate("lip landmarks must be four finite 3-D points")
    lip_hor = float(np.linalg.norm(points[0] - points[1]))
    lip_ver = float(np.linalg.norm(points[2] - points[3]))
    return lip_hor, lip_ver


def _resolve_lip_source(header: dict[str, int]) -> tuple[str, tuple[int, ...]]:
    """Pick lip columns: precomputed distances win over raw landmarks."""
    if all(c in header for c in LIP_COLUMNS):
        return "direct", tuple(header[c] for c in LIP_COLUMNS)
    if all(c in header for c in LANDMARK_COLUMNS):
        return "landmarks", tuple(header[c] for c in LANDMARK_COLUMNS)
    raise MissingColumn("lip_hor/lip_ver (or landmark columns X_48..Z_57)")


def parse_frame_features(
    path: str | Path,
    fps: float,
    person_id: str = "",
    video_id: str | None = None,
) -> FrameFeatureSeries:
    """Parse a frame-feature CSV into a series.

    Rows with success=0 are kept but flagged so downstream extraction can
    skip them. Raises MissingColumn, NonMonotonicFrames, EmptyFile, or
    MalformedRecord for unusable files.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            raw_header = next(reader)
        except StopIteration:
            raise EmptyFile(str(path)) from None
        header = {name.strip(): i for i, name in enumerate(raw_header)}
        for col in ("frame", "timestamp", "success") + AU_COLUMNS + ROTATION_COLUMNS + TRANSLATION_COLUMNS:
            if col not in header:
                raise MissingColumn(col)
        lip_mode, lip_idx = _resolve_lip_source(header)
        base_idx = [
            header[c] for c in AU_COLUMNS + ROTATION_COLUMNS + TRANSLATION_COLUMNS
        ]
        i_frame, i_time, i_succ = header["frame"], header["timestamp"], header["success"]

        frames: list[int] = []
        times: list[float] = []
        success: list[bool] = []
        rows: list[list[float]] = []
        for line_no, row in enumerate(reader):
            if not row:
                continue
            try:
                fi = int(float(row[i_frame]))
                ts = float(row[i_time])
                ok = float(row[i_succ]) > 0
                vals = [float(row[j]) for j in base_idx]
                if lip_mode == "direct":
                    vals.append(float(row[lip_idx[0]]))
                    vals.append(float(row[lip_idx[1]]))
                else:
                    coords = [float(row[j]) for j in lip_idx]
                    lip_hor, lip_ver = derive_lip_features(
                        coords[0:3], coords[3:6], coords[6:9], coords[9:12]
                    )
                    vals.append(lip_hor)
                    vals.append(lip_ver)
            except (ValueError, IndexError):
                raise MalformedRecord(line_no + 1, ",".join(row)[:120]) from None
            k = len(frames)
            if k and fi <= frames[-1]:
                raise NonMonotonicFrames(k)
            if k and ts < times[-1]:
                raise NonMonotonicFrames(k, detail="timestamp decreased")
            frames.append(fi)
            times.append(ts)
            success.append(ok)
            rows.append(vals)

    if not frames:
        raise EmptyFile(str(path))
    return FrameFeatureSeries(
        person_id=person_id,
        video_id=video_id if video_id is not None else path.stem,
        fps=fps,
        frame_index=np.asarray(frames, dtype=np.int64),
        timestamp=np.asarray(times, dtype=np.float64),
        success=np.asarray(success, dtype=bool),
        values=np.asarray(rows, dtype=np.float64),
    )


def write_frame_features(series: FrameFeatureSeries, path: str | Path) -> None:
    """Write the canonical frame-feature CSV (lip distances precomputed).

    Feature values are serialized with 6 significant digits, timestamps with
    9; re-parsing a written file reproduces the written values exactly.
    """
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write("frame,timestamp,success," + ",".join(COMPONENT_NAMES) + "\n")
        for i in range(len(series)):
            vals = ",".join(f"{v:.6g}" for v in series.values[i])
            fh.write(
                f"{int(series.frame_index[i])},{series.timestamp[i]:.9g},"
                f"{int(series.success[i])},{vals}\n"
            )


def parse_alignments(
    path: str | Path, fps: float, total_frames: int
) -> list[WordOccurrence]:
    """Parse word/start/end alignment lines into frame-indexed occurrences.

    Frame spans use floor(start*fps)..ceil(end*fps) so every frame the word
    could touch is covered, then get clamped into [0, total_frames-1].
    Tokens are normalized; lines starting with '#' are ignored, as are
    records whose token normalizes to nothing.
    """
    if fps <= 0 or total_frames <= 0:
        raise ValueError("fps and total_frames must be positive")
    out: list[WordOccurrence] = []
    with Path(path).open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split("\t") if "\t" in text else text.split(",")
            if len(parts) != 3:
                raise MalformedRecord(line_no, text[:120])
            word, raw_start, raw_end = (p.strip() for p in parts)
            try:
                start_s, end_s = float(raw_start), float(raw_end)
            except ValueError:
                raise MalformedRecord(line_no, text[:120]) from None
            if start_s < 0 or not math.isfinite(start_s) or not math.isfinite(end_s):
                raise MalformedRecord(line_no, text[:120])
            if end_s < start_s:
                raise NegativeDuration(f"line {line_no}: end {end_s} < start {start_s}")
            token = normalize_token(word)
            if not token:
                log.debug("dropping unnormalizable word %r at line %d", word, line_no)
                continue
            s = min(max(math.floor(start_s * fps), 0), total_frames - 1)
            n = min(max(math.ceil(end_s * fps), 0), total_frames - 1)
            out.append(WordOccurrence(token, s, n))
    return out


def write_alignments(
    occurrences: Sequence[WordOccurrence], path: str | Path, fps: float
) -> None:
    """Write occurrences so that re-parsing reproduces the same frame spans.

    Start/end times are placed half a frame inside the span boundaries,
    which makes the floor/ceil conversion in :func:`parse_alignments` exact
    regardless of float rounding. Spans must be at least two frames long.
    """
    with Path(path).open("w", encoding="utf-8") as fh:
        for occ in occurrences:
            if occ.end_frame <= occ.start_frame:
                raise ValueError(
                    f"cannot encode single-frame span for {occ.token!r}"
                )
            start = (occ.start_frame + 0.5) / fps
            end = (occ.end_frame - 0.5) / fps
            fh.write(f"{occ.token}\t{start:.9f}\t{end:.9f}\n")


@dataclass(frozen=True)
class ManifestEntry:
    person_id: str
    video_id: str
    label: str  # "real" | "fake"
    scenario: str  # one of SCENARIOS
    feature_path: Path
    alignment_path: Path
    duration_hours: float


@dataclass
class DatasetManifest:
    """Validated video inventory with per-person per-scenario hour totals."""

    entries: list[ManifestEntry]
    root: Path
    hour_totals: dict[tuple[str, str], float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.hour_totals:
            for e in self.entries:
                key = (e.person_id, e.scenario)
                self.hour_totals[key] = self.hour_totals.get(key, 0.0) + e.duration_hours

    def persons(self) -> list[str]:
        return sorted({e.person_id for e in self.entries})

    def select(
        self,
        person_id: str | None = None,
        scenario: str | None = None,
        label: str | None = None,
    ) -> list[ManifestEntry]:
        return [
            e
            for e in self.entries
            if (person_id is None or e.person_id == person_id)
            and (scenario is None or e.scenario == scenario)
            and (label is None or e.label == label)
        ]

    def hours(self, person_id: str, scenario: str) -> float:
        return self.hour_totals.get((person_id, scenario), 0.0)


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load and validate a JSON-lines manifest; paths resolve relative to it."""
    path = Path(path)
    root = path.parent
    entries: list[ManifestEntry] = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                rec = json.loads(text)
                entry = ManifestEntry(
                    person_id=str(rec["person_id"]),
                    video_id=str(rec["video_id"]),
                    label=str(rec["label"]),
                    scenario=str(rec["scenario"]),
                    feature_path=root / rec["feature_path"],
                    alignment_path=root / rec["alignment_path"],
                    duration_hours=float(rec["duration_hours"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                raise MalformedRecord(line_no, text[:120]) from None
            if entry.scenario not in SCENARIOS:
                raise UnknownScenario(entry.scenario)
            if entry.label not in ("real", "fake"):
                raise MalformedRecord(line_no, f"bad label {entry.label!r}")
            if (entry.scenario == "real") != (entry.label == "real"):
                raise MalformedRecord(
                    line_no, f"label {entry.label!r} inconsistent with {entry.scenario!r}"
                )
            if entry.duration_hours <= 0:
                raise MalformedRecord(line_no, "duration_hours must be > 0")
            for p in (entry.feature_path, entry.alignment_path):
                if not p.exists():
                    raise MissingFile(str(p))
            entries.append(entry)
    if not entries:
        raise EmptyFile(str(path))
    return DatasetManifest(entries=entries, root=root)


def write_manifest(entries: Sequence[ManifestEntry], path: str | Path) -> None:
    """Write entries as JSON lines with paths relative to the manifest."""
    path = Path(path)
    root = path.parent
    with path.open("w", encoding="utf-8") as fh:
        for e in entries:
            rec = {
                "person_id": e.person_id,
                "video_id": e.video_id,
                "label": e.label,
                "scenario": e.scenario,
                "feature_path": str(Path(e.feature_path).relative_to(root)),
                "alignment_path": str(Path(e.alignment_path).relative_to(root)),
                "duration_hours": e.duration_hours,
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
