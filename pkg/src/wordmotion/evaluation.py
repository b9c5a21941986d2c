"""Experiment harness: dataset splits, AUC, ablations, transfer, reports.

Clip-level AUC pairs real test clips against one fake scenario at a time.
Abstaining clips are excluded from AUC and reported as a separate rate.
All randomness is derived from the split seed, and per-person runs are
independent, so results are reproducible bit-for-bit under a fixed seed.
"""

from __future__ import annotations

import logging
import math
import zlib
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from wordmotion.classifier import (
    ModelBank,
    TrainConfig,
    score,
    train_bank,
)
from wordmotion.errors import EmptyClass, EmptyLexicon, InsufficientVideos
from wordmotion.features import (
    DEFAULT_PADDING,
    DEFAULT_WINDOW_LEN,
    POOLED_TOKEN,
    WINDOW_TOKEN,
    ConditioningMode,
    GestureFeature,
    UnitLexicon,
    extract_for_mode,
    parse_lexicon,
    select_trainable_units,
    words_to_phoneme_occurrences,
)
from wordmotion.ingest import (
    TRAINABLE_FAKE_SCENARIOS,
    DatasetManifest,
    FrameFeatureSeries,
    ManifestEntry,
    parse_alignments,
    parse_frame_features,
)
from wordmotion.scoring import ClipScore, features_in_clip, score_clip, segment_clips

log = logging.getLogger(__name__)


# --------------------------------------------------------------------------
# AUC
# --------------------------------------------------------------------------


def auc(pos_scores: Sequence[float], neg_scores: Sequence[float]) -> float:
    """Probability a random positive outscores a random negative.

    Rank-based Mann-Whitney statistic with 0.5 credit for ties; identical
    to the pairwise count but O(n log n).
    """
    pos = np.asarray(pos_scores, dtype=np.float64)
    neg = np.asarray(neg_scores, dtype=np.float64)
    if pos.size == 0 or neg.size == 0:
        raise EmptyClass("AUC needs at least one score in each class")
    combined = np.concatenate([pos, neg])
    order = np.argsort(combined, kind="stable")
    sorted_v = combined[order]
    ranks = np.empty(combined.size, dtype=np.float64)
    i = 0
    while i < combined.size:
        j = i
        while j + 1 < combined.size and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    rank_sum = float(ranks[: pos.size].sum())
    return (rank_sum - pos.size * (pos.size + 1) / 2.0) / (pos.size * neg.size)


# --------------------------------------------------------------------------
# Splits and configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SplitSpec:
    """Video-level train/test split; held-out scenarios go entirely to test."""

    train_fraction: float = 0.9
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")


@dataclass(frozen=True)
class ExperimentConfig:
    train: TrainConfig = TrainConfig()
    split: SplitSpec = SplitSpec()
    fps: float = 30.0
    padding_t: int = DEFAULT_PADDING
    clip_length_s: float = 10.0
    shift_s: float = 2.0
    window_len: int = DEFAULT_WINDOW_LEN
    lexicon_path: Path | None = None


def _stream(seed: int, *names: str) -> np.random.Generator:
    key = tuple(zlib.crc32(n.encode("utf-8")) for n in names)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _split_group(
    videos: list[ManifestEntry], spec: SplitSpec, person: str, scenario: str
) -> dict[str, bool]:
    """video_id -> goes-to-train for one person/scenario group."""
    if len(videos) < 2:
        raise InsufficientVideos(
            f"{person}/{scenario}: need >= 2 videos to split, got {len(videos)}"
        )
    n_train = min(
        max(int(math.floor(len(videos) * spec.train_fraction)), 1),
        len(videos) - 1,
    )
    perm = _stream(spec.seed, "split", person, scenario).permutation(len(videos))
    chosen = set(perm[:n_train].tolist())
    return {e.video_id: i in chosen for i, e in enumerate(videos)}


def split_dataset(
    manifest: DatasetManifest, spec: SplitSpec
) -> tuple[DatasetManifest, DatasetManifest]:
    """Deterministic per-person split at video granularity.

    Real and trainable-fake scenarios split train_fraction/rest; scenarios
    that must stay unseen during training (impersonator, faceswap,
    synthetic) go entirely to test. A fake entry that reuses a real
    entry's motion track (same feature file, as simulated dubbing does)
    follows that real video's side, so a held-out track can never appear
    in training under the fake label.
    """
    split_scenarios = ("real",) + TRAINABLE_FAKE_SCENARIOS
    train: list[ManifestEntry] = []
    test: list[ManifestEntry] = []
    for person in manifest.persons():
        real_videos = sorted(
            manifest.select(person_id=person, scenario="real"),
            key=lambda e: e.video_id,
        )
        track_to_train: dict[Path, bool] = {}
        if real_videos:
            side = _split_group(real_videos, spec, person, "real")
            for entry in real_videos:
                (train if side[entry.video_id] else test).append(entry)
                track_to_train[entry.feature_path] = side[entry.video_id]
        for scenario in TRAINABLE_FAKE_SCENARIOS:
            videos = sorted(
                manifest.select(person_id=person, scenario=scenario),
                key=lambda e: e.video_id,
            )
            if not videos:
                continue
            unlinked = [e for e in videos if e.feature_path not in track_to_train]
            for entry in videos:
                if entry.feature_path in track_to_train:
                    dest = train if track_to_train[entry.feature_path] else test
                    dest.append(entry)
            if unlinked:
                side = _split_group(unlinked, spec, person, scenario)
                for entry in unlinked:
                    (train if side[entry.video_id] else test).append(entry)
        for entry in manifest.entries:
            if entry.person_id == person and entry.scenario not in split_scenarios:
                test.append(entry)
    return (
        DatasetManifest(entries=train, root=manifest.root),
        DatasetManifest(entries=test, root=manifest.root),
    )


# --------------------------------------------------------------------------
# Per-person training and scoring
# --------------------------------------------------------------------------


class _CorpusLoader:
    """Parses and caches feature files; dubbed entries share the real track."""

    def __init__(self, fps: float):
        self.fps = fps
        self._series: dict[Path, FrameFeatureSeries] = {}

    def series(self, entry: ManifestEntry) -> FrameFeatureSeries:
        cached = self._series.get(entry.feature_path)
        if cached is None:
            cached = parse_frame_features(entry.feature_path, self.fps)
            self._series[entry.feature_path] = cached
        return replace(
            cached, person_id=entry.person_id, video_id=entry.video_id
        )

    def occurrences(self, entry: ManifestEntry, total_frames: int):
        return parse_alignments(entry.alignment_path, self.fps, total_frames)


def _load_lexicon(mode: ConditioningMode, config: ExperimentConfig) -> UnitLexicon | None:
    if mode.kind != "phoneme":
        return None
    if config.lexicon_path is None:
        raise EmptyLexicon("phoneme mode requires config.lexicon_path")
    return parse_lexicon(config.lexicon_path)


def _sorted_entries(entries: Iterable[ManifestEntry]) -> list[ManifestEntry]:
    return sorted(entries, key=lambda e: (e.scenario, e.video_id))


@dataclass
class TrainSummary:
    n_unique_units: int
    n_models: int
    training_hours: float
    unit_threshold: int


def train_person_bank(
    train_manifest: DatasetManifest,
    person: str,
    mode: ConditioningMode,
    config: ExperimentConfig,
    lexicon: UnitLexicon | None = None,
    loader: _CorpusLoader | None = None,
    metadata: dict | None = None,
    series_overrides: dict[str, tuple[FrameFeatureSeries, list]] | None = None,
) -> tuple[ModelBank, TrainSummary]:
    """Extract training features for one person and train their bank.

    ``series_overrides`` maps video_id to a pre-truncated (series,
    occurrences) pair; the training-size sweep uses it to shorten videos
    without rewriting files.
    """
    loader = loader or _CorpusLoader(config.fps)
    if lexicon is None:
        lexicon = _load_lexicon(mode, config)
    labeled: list[tuple[GestureFeature, int]] = []
    counts: Counter[str] = Counter()
    hours = 0.0
    entries = _sorted_entries(train_manifest.select(person_id=person))
    for entry in entries:
        if entry.scenario not in ("real",) + TRAINABLE_FAKE_SCENARIOS:
            continue
        if series_overrides is not None and entry.video_id in series_overrides:
            series, occs = series_overrides[entry.video_id]
            hours += len(series) / config.fps / 3600.0
        else:
            series = loader.series(entry)
            occs = loader.occurrences(entry, len(series))
            hours += entry.duration_hours
        label = 1 if entry.label == "real" else 0
        if mode.kind == "phoneme":
            units, _ = words_to_phoneme_occurrences(occs, lexicon)
            counts.update(u.token for u in units)
        elif mode.kind == "fixed_window":
            counts[WINDOW_TOKEN] += max(1, len(series) // (mode.window_len or 1))
        else:
            counts.update(o.token for o in occs)
        feats, _ = extract_for_mode(series, occs, mode, config.padding_t, lexicon)
        labeled.extend((f, label) for f in feats)

    if hours <= 0:
        raise InsufficientVideos(f"no training data for {person!r}")
    if mode.kind in ("fixed_window", "word_window"):
        unit_set = {WINDOW_TOKEN if mode.kind == "fixed_window" else POOLED_TOKEN}
        threshold = 1
    else:
        unit_set = select_trainable_units(counts, hours)
        threshold = max(1, math.floor(hours))
    meta = dict(metadata or {})
    meta.update(
        {
            "person_id": person,
            "mode": mode.label(),
            "training_hours": hours,
            "unit_threshold": threshold,
            "n_unique_units": len(counts),
        }
    )
    bank = train_bank(
        labeled, unit_set, config.train, person_id=person, mode=mode, metadata=meta
    )
    summary = TrainSummary(
        n_unique_units=len(counts),
        n_models=len(bank),
        training_hours=hours,
        unit_threshold=threshold,
    )
    return bank, summary


@dataclass(frozen=True)
class ClipRecord:
    person_id: str
    video_id: str
    scenario: str
    start_frame: int
    start_s: float
    result: ClipScore


def collect_clip_scores(
    bank: ModelBank,
    test_manifest: DatasetManifest,
    person: str,
    config: ExperimentConfig,
    lexicon: UnitLexicon | None = None,
    loader: _CorpusLoader | None = None,
) -> list[ClipRecord]:
    """Segment and score every test clip of one person with one bank."""
    loader = loader or _CorpusLoader(config.fps)
    if lexicon is None:
        lexicon = _load_lexicon(bank.mode, config)
    records: list[ClipRecord] = []
    for entry in _sorted_entries(test_manifest.select(person_id=person)):
        series = loader.series(entry)
        occs = loader.occurrences(entry, len(series))
        features, _ = extract_for_mode(
            series, occs, bank.mode, config.padding_t, lexicon
        )
        for clip in segment_clips(series, config.clip_length_s, config.shift_s):
            feats_in = features_in_clip(features, clip, config.padding_t, len(series))
            records.append(
                ClipRecord(
                    person_id=person,
                    video_id=entry.video_id,
                    scenario=entry.scenario,
                    start_frame=clip.start_frame,
                    start_s=clip.start_frame / config.fps,
                    result=score_clip(bank, feats_in, clip),
                )
            )
    return records


# --------------------------------------------------------------------------
# Experiments
# --------------------------------------------------------------------------


@dataclass
class ExperimentResult:
    person_id: str
    mode: str
    auc: dict[str, float] = field(default_factory=dict)  # fake scenario -> AUC
    abstention: dict[str, float] = field(default_factory=dict)
    n_clips: dict[str, int] = field(default_factory=dict)
    n_units_tested: dict[str, int] = field(default_factory=dict)
    n_models: int = 0
    training_hours: float = 0.0
    unit_threshold: int = 1


def summarize_clip_records(
    person: str, mode_label: str, records: Sequence[ClipRecord]
) -> ExperimentResult:
    """Per-scenario AUC (real vs each fake scenario) and abstention rates."""
    result = ExperimentResult(person_id=person, mode=mode_label)
    by_scenario: dict[str, list[ClipRecord]] = {}
    for r in records:
        by_scenario.setdefault(r.scenario, []).append(r)
    scores: dict[str, list[float]] = {}
    for scenario, recs in sorted(by_scenario.items()):
        kept = [r.result.score for r in recs if not r.result.abstained]
        scores[scenario] = kept
        result.n_clips[scenario] = len(recs)
        result.abstention[scenario] = 1.0 - len(kept) / len(recs) if recs else 0.0
        tokens = {t for r in recs for t, _ in r.result.per_unit}
        result.n_units_tested[scenario] = len(tokens)
    real = scores.get("real", [])
    for scenario, kept in sorted(scores.items()):
        if scenario == "real":
            continue
        if real and kept:
            result.auc[scenario] = auc(real, kept)
    return result


@dataclass
class PersonEvaluation:
    result: ExperimentResult
    bank: ModelBank
    summary: TrainSummary
    clip_records: list[ClipRecord]


def evaluate_manifest(
    manifest: DatasetManifest,
    mode: ConditioningMode,
    config: ExperimentConfig,
) -> dict[str, PersonEvaluation]:
    """Full train-and-score pass: one bank and result table row per person."""
    train_m, test_m = split_dataset(manifest, config.split)
    lexicon = _load_lexicon(mode, config)
    loader = _CorpusLoader(config.fps)
    out: dict[str, PersonEvaluation] = {}
    for person in manifest.persons():
        bank, summary = train_person_bank(
            train_m, person, mode, config, lexicon=lexicon, loader=loader
        )
        records = collect_clip_scores(
            bank, test_m, person, config, lexicon=lexicon, loader=loader
        )
        result = summarize_clip_records(person, mode.label(), records)
        result.n_models = summary.n_models
        result.training_hours = summary.training_hours
        result.unit_threshold = summary.unit_threshold
        out[person] = PersonEvaluation(result, bank, summary, records)
    return out


def run_experiment(
    manifest: DatasetManifest, mode: ConditioningMode, config: ExperimentConfig
) -> dict[str, ExperimentResult]:
    return {p: ev.result for p, ev in evaluate_manifest(manifest, mode, config).items()}


def run_ablations(
    manifest: DatasetManifest, config: ExperimentConfig
) -> dict[str, dict[str, ExperimentResult]]:
    """Word-specific vs pooled word windows vs transcript-free fixed windows,
    sharing the same split and seed."""
    modes = [
        ConditioningMode("fixed_window", config.window_len),
        ConditioningMode("word_window"),
        ConditioningMode("word"),
    ]
    return {m.label(): run_experiment(manifest, m, config) for m in modes}


@dataclass
class TransferResult:
    person_id: str
    self_auc: dict[str, float]
    transfer_auc: dict[str, float]  # mean over other persons' banks
    per_trainer: dict[str, dict[str, float]]  # trainer -> scenario -> AUC
    n_shared_tokens: dict[str, int]


def _restrict_bank(bank: ModelBank, tokens: set[str]) -> ModelBank | None:
    units = {t: c for t, c in bank.units.items() if t in tokens}
    if not units:
        return None
    return ModelBank(
        person_id=bank.person_id, mode=bank.mode, units=units, metadata=bank.metadata
    )


def run_transfer(
    manifest: DatasetManifest,
    config: ExperimentConfig,
    mode: ConditioningMode = ConditioningMode("word"),
) -> dict[str, TransferResult]:
    """Score each person's test clips with every other person's bank.

    Only units present in both banks are used, so self and transferred
    scores cover the same vocabulary. Per-person transfer AUC averages the
    per-trainer AUCs.
    """
    persons = manifest.persons()
    if len(persons) < 2:
        raise InsufficientVideos("transfer experiment needs at least two persons")
    evals = evaluate_manifest(manifest, mode, config)
    _, test_m = split_dataset(manifest, config.split)
    lexicon = _load_lexicon(mode, config)
    loader = _CorpusLoader(config.fps)
    out: dict[str, TransferResult] = {}
    for person in persons:
        own_tokens = set(evals[person].bank.units)
        per_trainer: dict[str, dict[str, float]] = {}
        shared_counts: dict[str, int] = {}
        for trainer in persons:
            if trainer == person:
                continue
            shared = own_tokens & set(evals[trainer].bank.units)
            shared_counts[trainer] = len(shared)
            restricted = _restrict_bank(evals[trainer].bank, shared)
            if restricted is None:
                log.warning(
                    "no shared vocabulary between %s and trainer %s", person, trainer
                )
                per_trainer[trainer] = {}
                continue
            records = collect_clip_scores(
                restricted, test_m, person, config, lexicon=lexicon, loader=loader
            )
            per_trainer[trainer] = summarize_clip_records(
                person, mode.label(), records
            ).auc
        transfer_auc: dict[str, float] = {}
        for scenario in sorted(evals[person].result.auc):
            got = [t[scenario] for t in per_trainer.values() if scenario in t]
            if got:
                transfer_auc[scenario] = float(np.mean(got))
        out[person] = TransferResult(
            person_id=person,
            self_auc=dict(evals[person].result.auc),
            transfer_auc=transfer_auc,
            per_trainer=per_trainer,
            n_shared_tokens=shared_counts,
        )
    return out


@dataclass
class SweepPoint:
    person_id: str
    hours_requested: float
    hours_used: float
    n_models: int
    auc: dict[str, float]


def _subsample_training(
    train_m: DatasetManifest,
    person: str,
    budget_hours: float,
    config: ExperimentConfig,
    loader: _CorpusLoader,
) -> tuple[list[ManifestEntry], dict[str, tuple[FrameFeatureSeries, list]], float]:
    """Pick whole training videos per scenario until the budget is met,
    truncating the last one; returns kept entries plus truncation overrides."""
    kept: list[ManifestEntry] = []
    overrides: dict[str, tuple[FrameFeatureSeries, list]] = {}
    hours_used = 0.0
    for scenario in ("real",) + TRAINABLE_FAKE_SCENARIOS:
        entries = sorted(
            train_m.select(person_id=person, scenario=scenario),
            key=lambda e: e.video_id,
        )
        if not entries:
            continue
        order = _stream(config.split.seed, "sweep", person, scenario).permutation(
            len(entries)
        )
        acc = 0.0
        chosen: list[ManifestEntry] = []
        for idx in order:
            entry = entries[int(idx)]
            if acc >= budget_hours:
                break
            remaining = budget_hours - acc
            if entry.duration_hours <= remaining + 1e-12:
                chosen.append(entry)
                acc += entry.duration_hours
            else:
                n_frames = int(round(remaining * 3600.0 * config.fps))
                if n_frames < 2:
                    break
                series = loader.series(entry).truncated(n_frames)
                occs = [
                    o
                    for o in loader.occurrences(entry, len(loader.series(entry)))
                    if o.end_frame < n_frames
                ]
                overrides[entry.video_id] = (series, occs)
                chosen.append(entry)
                acc += n_frames / config.fps / 3600.0
                break
        hours_used += acc
        kept.extend(chosen)
    return sorted(kept, key=lambda e: (e.scenario, e.video_id)), overrides, hours_used


def run_size_sweep(
    manifest: DatasetManifest,
    hours_grid: Sequence[float],
    config: ExperimentConfig,
    mode: ConditioningMode = ConditioningMode("word"),
) -> dict[str, list[SweepPoint]]:
    """Retrain at increasing training-hour budgets against a fixed test set."""
    if not hours_grid or any(h <= 0 for h in hours_grid):
        raise ValueError("hours_grid must be positive and nonempty")
    train_m, test_m = split_dataset(manifest, config.split)
    lexicon = _load_lexicon(mode, config)
    loader = _CorpusLoader(config.fps)
    out: dict[str, list[SweepPoint]] = {}
    for person in manifest.persons():
        points: list[SweepPoint] = []
        for budget in hours_grid:
            kept, overrides, hours_used = _subsample_training(
                train_m, person, budget, config, loader
            )
            sub_manifest = DatasetManifest(entries=kept, root=train_m.root)
            bank, summary = train_person_bank(
                sub_manifest,
                person,
                mode,
                config,
                lexicon=lexicon,
                loader=loader,
                series_overrides=overrides or None,
            )
            records = collect_clip_scores(
                bank, test_m, person, config, lexicon=lexicon, loader=loader
            )
            result = summarize_clip_records(person, mode.label(), records)
            points.append(
                SweepPoint(
                    person_id=person,
                    hours_requested=float(budget),
                    hours_used=hours_used / max(1, len({e.scenario for e in kept})),
                    n_models=summary.n_models,
                    auc=result.auc,
                )
            )
        out[person] = points
    return out


# --------------------------------------------------------------------------
# Interpretability reports
# --------------------------------------------------------------------------


@dataclass
class WordReport:
    token: str
    auc: float
    n_real: int
    n_fake: int
    component_stats: dict  # component name -> means/stds/histogram
    train_real_score_mean: float
    train_real_score_std: float


@dataclass
class TimelinePoint:
    video_id: str
    time_s: float
    token: str
    score: float
    train_mean: float
    train_std: float


@dataclass
class WordReportSet:
    reports: dict[str, WordReport]
    ranking: list[tuple[str, float]]  # by word-level AUC, best first
    timelines: dict[str, list[TimelinePoint]]


def build_word_report(
    bank: ModelBank,
    labeled_features: Sequence[tuple[GestureFeature, int]],
    fps: float,
    n_bins: int = 32,
) -> WordReportSet:
    """Per-word AUC ranking, component distributions, and score timelines.

    Histograms use ``n_bins`` uniform bins over the pooled real+fake range
    of each component. Words missing a class in the supplied features are
    excluded from the ranking.
    """
    from wordmotion.ingest import COMPONENT_NAMES

    by_token: dict[str, list[tuple[GestureFeature, int]]] = {}
    timelines: dict[str, list[TimelinePoint]] = {}
    for feat, label in labeled_features:
        clf = bank.lookup(feat.token)
        if clf is None:
            continue
        by_token.setdefault(feat.token, []).append((feat, label))
        timelines.setdefault(feat.video_id, []).append(
            TimelinePoint(
                video_id=feat.video_id,
                time_s=feat.span[0] / fps,
                token=feat.token,
                score=score(clf, feat.vector),
                train_mean=clf.train_real_score_mean,
                train_std=clf.train_real_score_std,
            )
        )
    for points in timelines.values():
        points.sort(key=lambda p: (p.time_s, p.token))

    reports: dict[str, WordReport] = {}
    for token in sorted(by_token):
        clf = bank.lookup(token)
        real = np.asarray([f.vector for f, lab in by_token[token] if lab == 1])
        fake = np.asarray([f.vector for f, lab in by_token[token] if lab == 0])
        if len(real) == 0 or len(fake) == 0:
            continue
        pos = [score(clf, v) for v in real]
        neg = [score(clf, v) for v in fake]
        stats = {}
        for c, name in enumerate(COMPONENT_NAMES):
            pooled_lo = float(min(real[:, c].min(), fake[:, c].min()))
            pooled_hi = float(max(real[:, c].max(), fake[:, c].max()))
            if pooled_hi <= pooled_lo:
                pooled_hi = pooled_lo + 1e-9
            edges = np.linspace(pooled_lo, pooled_hi, n_bins + 1)
            stats[name] = {
                "real_mean": float(real[:, c].mean()),
                "real_std": float(real[:, c].std()),
                "fake_mean": float(fake[:, c].mean()),
                "fake_std": float(fake[:, c].std()),
                "edges": edges.tolist(),
                "real_counts": np.histogram(real[:, c], bins=edges)[0].tolist(),
                "fake_counts": np.histogram(fake[:, c], bins=edges)[0].tolist(),
            }
        reports[token] = WordReport(
            token=token,
            auc=auc(pos, neg),
            n_real=len(real),
            n_fake=len(fake),
            component_stats=stats,
            train_real_score_mean=clf.train_real_score_mean,
            train_real_score_std=clf.train_real_score_std,
        )
    ranking = sorted(reports, key=lambda t: (-reports[t].auc, t))
    return WordReportSet(
        reports=reports,
        ranking=[(t, reports[t].auc) for t in ranking],
        timelines=timelines,
    )


def collect_labeled_test_features(
    test_manifest: DatasetManifest,
    person: str,
    mode: ConditioningMode,
    config: ExperimentConfig,
    lexicon: UnitLexicon | None = None,
) -> list[tuple[GestureFeature, int]]:
    """Extract (feature, label) pairs from a person's test videos."""
    loader = _CorpusLoader(config.fps)
    if lexicon is None:
        lexicon = _load_lexicon(mode, config)
    out: list[tuple[GestureFeature, int]] = []
    for entry in _sorted_entries(test_manifest.select(person_id=person)):
        series = loader.series(entry)
        occs = loader.occurrences(entry, len(series))
        feats, _ = extract_for_mode(series, occs, mode, config.padding_t, lexicon)
        label = 1 if entry.label == "real" else 0
        out.extend((f, label) for f in feats)
    return out
