"""Synthetic corpus generation: determinism and ground-truth recoverability."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from wordmotion.errors import LengthMismatch
from wordmotion.features import DropRecord, extract_word_feature, extract_all
from wordmotion.synth import (
    PHONEME_ALPHABET,
    PersonaSpec,
    Signature,
    generate_corpus,
    generate_video,
    make_articulation_map,
    make_lexicon,
    make_persona_specs,
    make_vocabulary,
    simulate_dubbing,
)


def _noise_free_spec(**kw):
    defaults = dict(
        person_id="p0",
        vocabulary=("solo", "filler"),
        weights=(1.0, 3.0),
        signatures={"solo": Signature((18,), 2.0)},
        noise_std=0.0,
        words_per_minute=60.0,
        speech_density=0.35,
        fps=30.0,
        seed=5,
    )
    defaults.update(kw)
    return PersonaSpec(**defaults)


def test_noise_free_signature_recovered_exactly():
    spec = _noise_free_spec()
    series, occs = generate_video(spec, 60.0, np.random.default_rng(0))
    solos = [o for o in occs if o.token == "solo"]
    assert solos, "sampling produced no signature word"
    for occ in solos:
        feat = extract_word_feature(series, occ, 3)
        assert feat.vector[18] == 2.0
        others = np.delete(feat.vector, 18)
        assert np.array_equal(others, np.zeros(24))


def test_generate_video_deterministic():
    spec = _noise_free_spec(noise_std=0.4)
    s1, o1 = generate_video(spec, 30.0, np.random.default_rng(42))
    s2, o2 = generate_video(spec, 30.0, np.random.default_rng(42))
    assert np.array_equal(s1.values, s2.values)
    assert o1 == o2


def test_word_rate():
    spec = _noise_free_spec(words_per_minute=120.0)
    _, occs = generate_video(spec, 60.0, np.random.default_rng(1))
    assert abs(len(occs) - 120) <= 1


def test_alignments_match_windows():
    spec = _noise_free_spec(noise_std=0.2)
    series, occs = generate_video(spec, 30.0, np.random.default_rng(3))
    for occ in occs:
        assert 0 <= occ.start_frame <= occ.end_frame < len(series)
        assert occ.duration >= 1
    feats, drops = extract_all(series, occs, 3)
    assert not drops
    assert len(feats) == len(occs)


def test_phoneme_level_signatures():
    lexicon = make_lexicon(["solo", "filler"], seed=1, active_phonemes=4)
    ph = lexicon.pronunciations["solo"][0]
    spec = _noise_free_spec(
        signatures={ph: Signature((20,), 1.5)}, signature_level="phoneme"
    )
    series, occs = generate_video(
        spec, 60.0, np.random.default_rng(0), lexicon=lexicon
    )
    hits = [o for o in occs if ph in lexicon.pronunciations[o.token]]
    assert hits
    feat = extract_word_feature(series, hits[0], 3)
    assert feat.vector[20] == 1.5


def test_simulate_dubbing_rules(rng):
    spec = _noise_free_spec(noise_std=0.3)
    series, occs = generate_video(spec, 60.0, np.random.default_rng(0))
    donor_series, donor_occs = generate_video(spec, 60.0, np.random.default_rng(1))

    same = simulate_dubbing(series, occs, 60.0)
    assert same == occs  # identity pairing accepted, nothing trimmed

    near = simulate_dubbing(series, donor_occs, 59.0)
    assert all(o.end_frame < len(series) for o in near)

    with pytest.raises(LengthMismatch):
        simulate_dubbing(series, donor_occs, 30.0)


def _dir_digest(root: Path) -> str:
    h = hashlib.sha256()
    for path in sorted(root.rglob("*")):
        if path.is_file() and path.name != "run.log":
            h.update(path.name.encode())
            h.update(path.read_bytes())
    return h.hexdigest()


def test_generate_corpus_structure_and_determinism(tmp_path):
    specs = make_persona_specs(
        2, vocab_size=10, n_signature_words=3, amplitude=2.0, noise_std=0.3, seed=9
    )
    c1 = generate_corpus(
        specs, hours_per_persona=4 / 60, fake_ratio=1.0, seed=9,
        out_dir=tmp_path / "a", video_seconds=60.0,
        articulation_amplitude=0.8, impersonator_hours=2 / 60,
    )
    groups = {(e.person_id, e.scenario) for e in c1.manifest.entries}
    assert groups == {
        (p, s)
        for p in ("persona0", "persona1")
        for s in ("real", "dubbing", "impersonator")
    }
    assert all(
        e.label == ("real" if e.scenario == "real" else "fake")
        for e in c1.manifest.entries
    )
    # dubbed entries reuse a real track
    real_paths = {e.feature_path for e in c1.manifest.select(scenario="real")}
    for e in c1.manifest.select(scenario="dubbing"):
        assert e.feature_path in real_paths

    c2 = generate_corpus(
        specs, hours_per_persona=4 / 60, fake_ratio=1.0, seed=9,
        out_dir=tmp_path / "b", video_seconds=60.0,
        articulation_amplitude=0.8, impersonator_hours=2 / 60,
    )
    assert _dir_digest(tmp_path / "a") == _dir_digest(tmp_path / "b")


def test_generate_corpus_four_groups_without_impersonator(tmp_path):
    specs = make_persona_specs(2, vocab_size=8, n_signature_words=2, seed=3)
    corpus = generate_corpus(
        specs, hours_per_persona=4 / 60, fake_ratio=1.0, seed=3,
        out_dir=tmp_path, video_seconds=60.0,
    )
    groups = {(e.person_id, e.scenario) for e in corpus.manifest.entries}
    assert len(groups) == 4


def test_dubbing_decorrelates_signature_components(tmp_path):
    """Signature components are markedly lower in dubbed windows of the
    same word, for amplitude >= 4 * noise."""
    specs = make_persona_specs(
        1, vocab_size=8, n_signature_words=3, amplitude=2.0, noise_std=0.5, seed=4
    )
    corpus = generate_corpus(
        specs, hours_per_persona=6 / 60, fake_ratio=1.0, seed=4,
        out_dir=tmp_path, video_seconds=60.0, articulation_amplitude=0.0,
    )
    from wordmotion.evaluation import _CorpusLoader

    loader = _CorpusLoader(30.0)
    sig = {
        t: rec["components"]
        for t, rec in corpus.ground_truth["personas"]["persona0"]["signatures"].items()
    }
    real_vals, dub_vals = [], []
    for e in corpus.manifest.entries:
        series = loader.series(e)
        occs = loader.occurrences(e, len(series))
        feats, _ = extract_all(series, occs, 3)
        for f in feats:
            if f.token in sig:
                vals = f.vector[list(sig[f.token])].mean()
                (real_vals if e.scenario == "real" else dub_vals).append(vals)
    assert np.mean(dub_vals) <= np.mean(real_vals) - 1.0  # amplitude / 2


def test_make_vocabulary_unique_and_stable():
    v1 = make_vocabulary(30, seed=2)
    v2 = make_vocabulary(30, seed=2)
    assert v1 == v2
    assert len(set(v1)) == 30
    from wordmotion.ingest import normalize_token

    assert all(normalize_token(w) == w for w in v1)


def test_make_lexicon_uses_alphabet_subset():
    lex = make_lexicon(["aa", "bb", "cc"], seed=0, active_phonemes=5)
    assert len(PHONEME_ALPHABET) == 70
    used = {p for pron in lex.pronunciations.values() for p in pron}
    assert used <= set(PHONEME_ALPHABET)
    assert len(used) <= 5


def test_make_articulation_map_covers_lexicon():
    lex = make_lexicon(["aa", "bb"], seed=0, active_phonemes=4)
    art = make_articulation_map(lex, 1.0, seed=0)
    used = {p for pron in lex.pronunciations.values() for p in pron}
    assert set(art) == used
    assert make_articulation_map(lex, 0.0, seed=0) == {}


def test_persona_specs_disjoint_palettes():
    specs = make_persona_specs(2, vocab_size=12, n_signature_words=4, seed=1)
    comps = [
        {c for s in spec.signatures.values() for c in s.components} for spec in specs
    ]
    assert not comps[0] & comps[1]
    words = [set(s.signatures) for s in specs]
    assert not words[0] & words[1]


def test_persona_specs_shared_palette_distinct_assignments():
    specs = make_persona_specs(
        2, vocab_size=12, n_signature_words=4, seed=1, palette="shared"
    )
    words = [set(s.signatures) for s in specs]
    assert not words[0] & words[1]  # word sets still disjoint


def test_generate_corpus_validation(tmp_path):
    specs = make_persona_specs(1, vocab_size=8, n_signature_words=2, seed=0)
    with pytest.raises(ValueError):
        generate_corpus(specs, hours_per_persona=0.0, out_dir=tmp_path)
    with pytest.raises(ValueError):
        generate_corpus(
            specs, hours_per_persona=0.1, impersonator_hours=0.1, out_dir=tmp_path
        )


def test_ground_truth_file_written(tmp_path):
    specs = make_persona_specs(1, vocab_size=8, n_signature_words=2, seed=0)
    corpus = generate_corpus(
        specs, hours_per_persona=4 / 60, out_dir=tmp_path, video_seconds=60.0
    )
    on_disk = json.loads((tmp_path / "ground_truth.json").read_text())
    assert on_disk == corpus.ground_truth
    assert corpus.lexicon_path.exists()
