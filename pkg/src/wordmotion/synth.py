"""Seeded synthetic persona corpora with known word-gesture signatures.

Videos are Gaussian motion noise around per-component baselines, plus two
kinds of planted bumps:

* person-specific signatures: selected words (or phonemes) carry a
  triangular bump of known amplitude on a few components whenever spoken;
* a person-agnostic articulation channel: every phoneme bumps a fixed set
  of mouth-related components during its sub-span, identically for every
  persona (impersonators articulate too, they just lack the signatures).

Dubbing fakes pair a real motion track with another video's transcript;
impersonator fakes are generated with a different persona's signature map.
Everything derives from one corpus seed through per-video child streams,
and the emitted files use the exact formats the ingest module defines.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from wordmotion.errors import LengthMismatch
from wordmotion.features import UnitLexicon, words_to_phoneme_occurrences, write_lexicon
from wordmotion.ingest import (
    DatasetManifest,
    FrameFeatureSeries,
    ManifestEntry,
    WordOccurrence,
    load_manifest,
    write_alignments,
    write_frame_features,
    write_manifest,
)

log = logging.getLogger(__name__)

#: Synthetic phoneme alphabet (70 symbols, matching common dictionary size).
PHONEME_ALPHABET = tuple(f"p{i:02d}" for i in range(70))

#: Mouth-related components carrying the articulation channel.
ARTICULATION_COMPONENTS = (7, 8, 9, 12, 13, 14, 15, 23, 24)
#: Components available for person-specific signatures (the rest).
SIGNATURE_COMPONENT_POOL = tuple(
    i for i in range(25) if i not in ARTICULATION_COMPONENTS
)

# Resting values per component: AU intensities sit mid-range, head pose at
# zero, lips at plausible millimetre distances.
_BASELINE = np.array([1.5] * 17 + [0.0] * 6 + [50.0, 10.0])

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"


@dataclass(frozen=True)
class Signature:
    """A planted gesture: which components bump, and how high."""

    components: tuple[int, ...]
    amplitude: float

    def __post_init__(self) -> None:
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")
        if not self.components or any(not 0 <= c < 25 for c in self.components):
            raise ValueError("components must be indices into [0, 25)")


@dataclass(frozen=True)
class PersonaSpec:
    person_id: str
    vocabulary: tuple[str, ...]
    weights: tuple[float, ...] | None  # None means uniform sampling
    signatures: dict[str, Signature]  # keyed by word or phoneme token
    signature_level: str = "word"  # "word" | "phoneme"
    noise_std: float = 0.5
    words_per_minute: float = 75.0
    speech_density: float = 0.35  # fraction of the timeline covered by words
    fps: float = 30.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.signature_level not in ("word", "phoneme"):
            raise ValueError(f"bad signature_level {self.signature_level!r}")
        if self.noise_std < 0 or self.words_per_minute <= 0 or self.fps <= 0:
            raise ValueError("noise_std >= 0, words_per_minute > 0, fps > 0 required")
        if not 0.1 <= self.speech_density <= 0.8:
            raise ValueError("speech_density must be in [0.1, 0.8]")
        if self.weights is not None and len(self.weights) != len(self.vocabulary):
            raise ValueError("weights must match vocabulary length")


@dataclass
class SyntheticCorpus:
    manifest: DatasetManifest
    manifest_path: Path
    lexicon_path: Path
    ground_truth: dict = field(default_factory=dict)


def _child_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def make_vocabulary(size: int, seed: int = 0) -> tuple[str, ...]:
    """Pronounceable pseudo-words, unique and normalization-stable."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(101,)))
    words: list[str] = []
    seen: set[str] = set()
    while len(words) < size:
        n_syl = int(rng.integers(2, 4))
        word = "".join(
            _CONSONANTS[int(rng.integers(len(_CONSONANTS)))]
            + _VOWELS[int(rng.integers(len(_VOWELS)))]
            for _ in range(n_syl)
        )
        if word not in seen:
            seen.add(word)
            words.append(word)
    return tuple(words)


def make_lexicon(
    vocabulary: Sequence[str],
    seed: int = 0,
    active_phonemes: int = 16,
    min_len: int = 2,
    max_len: int = 4,
) -> UnitLexicon:
    """Random pronunciations over a small active subset of the alphabet,
    so that phonemes are shared across many words."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(102,)))
    active = [
        PHONEME_ALPHABET[i]
        for i in sorted(rng.choice(len(PHONEME_ALPHABET), active_phonemes, replace=False))
    ]
    prons = {
        word: tuple(
            active[int(j)]
            for j in rng.integers(len(active), size=int(rng.integers(min_len, max_len + 1)))
        )
        for word in vocabulary
    }
    return UnitLexicon(pronunciations=prons, alphabet=frozenset(PHONEME_ALPHABET))


def make_articulation_map(
    lexicon: UnitLexicon, amplitude: float, seed: int = 0
) -> dict[str, Signature]:
    """Phoneme-to-mouth-movement map shared by all personas."""
    if amplitude <= 0:
        return {}
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(103,)))
    used = sorted({ph for pron in lexicon.pronunciations.values() for ph in pron})
    out = {}
    for ph in used:
        k = int(rng.integers(1, 3))
        comps = rng.choice(ARTICULATION_COMPONENTS, size=k, replace=False)
        out[ph] = Signature(tuple(int(c) for c in sorted(comps)), amplitude)
    return out


def make_persona_specs(
    n_personas: int,
    vocab_size: int = 40,
    n_signature_words: int = 12,
    amplitude: float = 2.0,
    noise_std: float = 0.5,
    words_per_minute: float = 75.0,
    speech_density: float = 0.35,
    fps: float = 30.0,
    seed: int = 0,
    components_per_word: int = 2,
    palette: str = "disjoint",
) -> list[PersonaSpec]:
    """Personas over a shared vocabulary, each with their own signature words.

    Signature word sets never overlap across personas. With the "disjoint"
    palette every persona also bumps their own slice of the component pool
    (no component is shared between personas); with "shared" all personas
    draw from the full pool, so only the word-to-component assignment is
    person-specific.
    """
    if n_personas < 1:
        raise ValueError("need at least one persona")
    if palette not in ("disjoint", "shared"):
        raise ValueError(f"palette must be 'disjoint' or 'shared', got {palette!r}")
    if n_signature_words * n_personas > vocab_size:
        raise ValueError("not enough vocabulary for disjoint signature words")
    pool = SIGNATURE_COMPONENT_POOL
    slice_len = len(pool) // n_personas
    if palette == "disjoint" and slice_len < components_per_word:
        raise ValueError("component pool too small for this many personas")
    vocabulary = make_vocabulary(vocab_size, seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(104,)))
    word_order = [vocabulary[int(i)] for i in rng.permutation(vocab_size)]
    specs = []
    for p in range(n_personas):
        if palette == "disjoint":
            persona_pool = pool[p * slice_len : (p + 1) * slice_len]
        else:
            persona_pool = pool
        sig_words = word_order[p * n_signature_words : (p + 1) * n_signature_words]
        signatures = {}
        for w in sig_words:
            comps = rng.choice(len(persona_pool), size=components_per_word, replace=False)
            signatures[w] = Signature(
                tuple(sorted(persona_pool[int(c)] for c in comps)), amplitude
            )
        specs.append(
            PersonaSpec(
                person_id=f"persona{p}",
                vocabulary=vocabulary,
                weights=None,
                signatures=signatures,
                signature_level="word",
                noise_std=noise_std,
                words_per_minute=words_per_minute,
                speech_density=speech_density,
                fps=fps,
                seed=seed + p,
            )
        )
    return specs


def _schedule_words(
    spec: PersonaSpec, total_frames: int, rng: np.random.Generator
) -> list[WordOccurrence]:
    """One word per speech cycle, with jittered placement and gaps wide
    enough that padded extraction windows never cover a neighbour's bump.

    Word duration targets speech_density * cycle, so low densities leave
    wide silences and word positions decorrelate across videos.
    """
    cycle = max(8, int(round(spec.fps * 60.0 / spec.words_per_minute)))
    dur_mid = spec.speech_density * cycle
    dur_lo = max(2, int(round(0.7 * dur_mid)))
    dur_hi = max(dur_lo, min(cycle - 5, int(round(1.3 * dur_mid))))
    weights = None
    if spec.weights is not None:
        w = np.asarray(spec.weights, dtype=float)
        weights = w / w.sum()
    out = []
    for k in range(total_frames // cycle):
        dur = int(rng.integers(dur_lo, dur_hi + 1))
        jitter_max = cycle - dur - 4
        jitter = int(rng.integers(0, jitter_max + 1)) if jitter_max > 0 else 0
        start = k * cycle + jitter
        token = str(
            spec.vocabulary[int(rng.choice(len(spec.vocabulary), p=weights))]
        )
        out.append(WordOccurrence(token, start, start + dur - 1))
    return out


def _add_bump(values: np.ndarray, lo: int, hi: int, sig: Signature) -> None:
    """Trapezoidal bump over [lo, hi]: zero at the ends, an exact plateau of
    sig.amplitude across the middle half (single peak frame when too short).

    The plateau makes the max-min range of the window robust to per-frame
    noise; the zero endpoints keep it exactly sig.amplitude when noise-free.
    """
    length = hi - lo + 1
    idx = np.arange(lo, hi + 1)
    if length < 3:
        shape = np.zeros(length)
        shape[(length - 1) // 2] = sig.amplitude
    else:
        ramp = max(1, length // 4)
        up = (idx - lo) / ramp
        down = (hi - idx) / ramp
        shape = sig.amplitude * np.minimum(1.0, np.minimum(up, down))
    for c in sig.components:
        values[lo : hi + 1, c] += shape


def generate_video(
    spec: PersonaSpec,
    duration_s: float,
    rng: np.random.Generator,
    video_id: str = "v000",
    lexicon: UnitLexicon | None = None,
    articulation: dict[str, Signature] | None = None,
) -> tuple[FrameFeatureSeries, list[WordOccurrence]]:
    """One synthetic video: noisy baseline plus signature/articulation bumps.

    The returned alignments exactly match the generated word windows.
    """
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    total = int(round(duration_s * spec.fps))
    occurrences = _schedule_words(spec, total, rng)

    values = np.tile(_BASELINE, (total, 1))
    if spec.noise_std > 0:
        values = values + rng.normal(0.0, spec.noise_std, size=(total, 25))

    needs_lexicon = articulation or spec.signature_level == "phoneme"
    if needs_lexicon and lexicon is None:
        raise ValueError("phoneme-level generation requires a lexicon")

    for occ in occurrences:
        if spec.signature_level == "word":
            sig = spec.signatures.get(occ.token)
            if sig is not None:
                _add_bump(values, occ.start_frame, occ.end_frame, sig)
        if articulation:
            # Articulation covers the whole word with the union of its
            # phonemes' components; every speaker produces it identically.
            prons = lexicon.pronunciations.get(occ.token, ())
            comps = sorted(
                {c for ph in prons if ph in articulation for c in articulation[ph].components}
            )
            if comps:
                amp = articulation[next(ph for ph in prons if ph in articulation)].amplitude
                _add_bump(values, occ.start_frame, occ.end_frame, Signature(tuple(comps), amp))
    if spec.signature_level == "phoneme":
        phoneme_occs, _ = words_to_phoneme_occurrences(occurrences, lexicon)
        for sub in phoneme_occs:
            sig = spec.signatures.get(sub.token)
            if sig is not None:
                _add_bump(values, sub.start_frame, sub.end_frame, sig)

    # Keep emitted files physically plausible: AU intensities in [0, 5],
    # lip distances nonnegative.
    np.clip(values[:, :17], 0.0, 5.0, out=values[:, :17])
    np.clip(values[:, 23:], 0.0, None, out=values[:, 23:])

    series = FrameFeatureSeries(
        person_id=spec.person_id,
        video_id=video_id,
        fps=spec.fps,
        frame_index=np.arange(total, dtype=np.int64),
        timestamp=np.arange(total, dtype=np.float64) / spec.fps,
        success=np.ones(total, dtype=bool),
        values=values,
    )
    return series, occurrences


def simulate_dubbing(
    series: FrameFeatureSeries,
    donor_occurrences: Sequence[WordOccurrence],
    donor_duration_s: float,
) -> list[WordOccurrence]:
    """Pair a real motion track with another video's transcript.

    Donor and target durations must agree within 5%; donor words reaching
    past the target's end are trimmed off. The result is the alignment
    list for a dubbed (fake, visually unmanipulated) entry.
    """
    target_s = series.duration_seconds()
    if abs(target_s - donor_duration_s) > 0.05 * max(target_s, donor_duration_s):
        raise LengthMismatch(
            f"donor {donor_duration_s:.2f}s vs target {target_s:.2f}s exceeds 5%"
        )
    total = len(series)
    return [occ for occ in donor_occurrences if occ.end_frame < total]


def generate_corpus(
    specs: Sequence[PersonaSpec],
    hours_per_persona: float,
    fake_ratio: float = 1.0,
    seed: int = 0,
    out_dir: str | Path = "corpus",
    video_seconds: float = 120.0,
    articulation_amplitude: float = 1.0,
    impersonator_hours: float = 0.0,
    lexicon: UnitLexicon | None = None,
    active_phonemes: int = 16,
) -> SyntheticCorpus:
    """Write a full corpus: real videos, dubbed fakes, optional impersonators.

    Dubbed entries reuse the real video's feature file with a different
    video's alignments. Impersonator entries are fresh videos generated with
    the next persona's signature map (articulation stays shared). All
    randomness flows from ``seed`` through per-video child streams.
    """
    if not specs:
        raise ValueError("need at least one persona spec")
    if hours_per_persona <= 0 or video_seconds <= 0:
        raise ValueError("hours_per_persona and video_seconds must be positive")
    if impersonator_hours > 0 and len(specs) < 2:
        raise ValueError("impersonator entries need at least two personas")

    out = Path(out_dir)
    (out / "features").mkdir(parents=True, exist_ok=True)
    (out / "alignments").mkdir(parents=True, exist_ok=True)

    if lexicon is None:
        vocab = sorted({w for s in specs for w in s.vocabulary})
        lexicon = make_lexicon(vocab, seed=seed, active_phonemes=active_phonemes)
    articulation = make_articulation_map(lexicon, articulation_amplitude, seed=seed)

    n_real = int(round(hours_per_persona * 3600.0 / video_seconds))
    if n_real < 2:
        raise ValueError("corpus needs at least two real videos per persona")
    n_dub = int(round(fake_ratio * n_real))
    n_imp = int(round(impersonator_hours * 3600.0 / video_seconds))

    entries: list[ManifestEntry] = []
    hours_each = video_seconds / 3600.0

    def _write(person: str, scenario: str, idx: int, series, occurrences, feature_path=None):
        stem = f"{person}_{scenario}_{idx:03d}"
        if feature_path is None:
            feature_path = out / "features" / f"{stem}.csv"
            write_frame_features(series, feature_path)
        alignment_path = out / "alignments" / f"{stem}.txt"
        write_alignments(occurrences, alignment_path, series.fps)
        entries.append(
            ManifestEntry(
                person_id=person,
                video_id=stem,
                label="real" if scenario == "real" else "fake",
                scenario=scenario,
                feature_path=feature_path,
                alignment_path=alignment_path,
                duration_hours=hours_each,
            )
        )
        return feature_path

    for p, spec in enumerate(specs):
        real_videos = []
        for i in range(n_real):
            rng = _child_rng(seed, spec.seed, 0, i)
            series, occs = generate_video(
                spec, video_seconds, rng, f"{spec.person_id}_real_{i:03d}",
                lexicon=lexicon, articulation=articulation,
            )
            fpath = _write(spec.person_id, "real", i, series, occs)
            real_videos.append((series, occs, fpath))

        for i in range(n_dub):
            rng = _child_rng(seed, spec.seed, 1, i)
            target = i % n_real
            donor = (target + 1 + int(rng.integers(n_real - 1))) % n_real
            dubbed = simulate_dubbing(
                real_videos[target][0], real_videos[donor][1], video_seconds
            )
            _write(
                spec.person_id, "dubbing", i,
                real_videos[target][0], dubbed,
                feature_path=real_videos[target][2],
            )

        if n_imp > 0:
            peer = specs[(p + 1) % len(specs)]
            swapped = replace(spec, signatures=peer.signatures, signature_level=peer.signature_level)
            for i in range(n_imp):
                rng = _child_rng(seed, spec.seed, 2, i)
                series, occs = generate_video(
                    swapped, video_seconds, rng,
                    f"{spec.person_id}_impersonator_{i:03d}",
                    lexicon=lexicon, articulation=articulation,
                )
                _write(spec.person_id, "impersonator", i, series, occs)

    lexicon_path = out / "lexicon.txt"
    write_lexicon(lexicon, lexicon_path)
    manifest_path = out / "manifest.jsonl"
    write_manifest(entries, manifest_path)

    ground_truth = {
        "seed": seed,
        "hours_per_persona": hours_per_persona,
        "fake_ratio": fake_ratio,
        "video_seconds": video_seconds,
        "articulation_amplitude": articulation_amplitude,
        "impersonator_hours": impersonator_hours,
        "personas": {
            s.person_id: {
                "vocabulary": list(s.vocabulary),
                "signature_level": s.signature_level,
                "noise_std": s.noise_std,
                "words_per_minute": s.words_per_minute,
                "speech_density": s.speech_density,
                "fps": s.fps,
                "signatures": {
                    t: {"components": list(sig.components), "amplitude": sig.amplitude}
                    for t, sig in sorted(s.signatures.items())
                },
            }
            for s in specs
        },
    }
    with (out / "ground_truth.json").open("w", encoding="utf-8") as fh:
        json.dump(ground_truth, fh, sort_keys=True, indent=1)
        fh.write("\n")

    return SyntheticCorpus(
        manifest=load_manifest(manifest_path),
        manifest_path=manifest_path,
        lexicon_path=lexicon_path,
        ground_truth=ground_truth,
    )
