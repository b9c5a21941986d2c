"""End-to-end command-line behavior: exit codes, outputs, determinism."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from wordmotion.cli import main

MICRO = [
    "--personas", "2", "--vocab-size", "10", "--signature-words", "3",
    "--hours", "0.1", "--video-seconds", "60", "--noise-std", "0.5",
    "--amplitude", "2.0", "--seed", "77",
]


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "corpus"
    assert main(["synth", "--out", str(out), *MICRO]) == 0
    return out


def test_synth_outputs(corpus_dir):
    assert (corpus_dir / "manifest.jsonl").exists()
    assert (corpus_dir / "lexicon.txt").exists()
    assert (corpus_dir / "ground_truth.json").exists()
    assert (corpus_dir / "config.json").exists()
    assert not (corpus_dir / ".lock").exists()
    config = json.loads((corpus_dir / "config.json").read_text())
    assert config["command"] == "synth"
    assert "out" not in config["config"]


def test_synth_refuses_nonempty_dir(corpus_dir, capsys):
    assert main(["synth", "--out", str(corpus_dir), *MICRO]) == 1
    assert "not empty" in capsys.readouterr().err


def test_train_and_score(corpus_dir, tmp_path, capsys):
    out = tmp_path / "train"
    rc = main([
        "train", "--manifest", str(corpus_dir / "manifest.jsonl"),
        "--out", str(out), "--seed", "77",
    ])
    assert rc == 0
    assert (out / "banks" / "persona0.json").exists()
    assert (out / "train_summary.json").exists()
    capsys.readouterr()

    # score a real test video with its own alignments: should lean real
    manifest = [
        json.loads(line)
        for line in (corpus_dir / "manifest.jsonl").read_text().splitlines()
    ]
    real = next(r for r in manifest if r["person_id"] == "persona0" and r["scenario"] == "real")
    dub = next(r for r in manifest if r["person_id"] == "persona0" and r["scenario"] == "dubbing")
    rc = main([
        "score", "--bank", str(out / "banks" / "persona0.json"),
        "--features", str(corpus_dir / real["feature_path"]),
        "--alignments", str(corpus_dir / real["alignment_path"]),
    ])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    video_line = [l for l in lines if l.startswith("video")][0]
    assert float(video_line.split("\t")[-1]) > 0.5

    rc = main([
        "score", "--bank", str(out / "banks" / "persona0.json"),
        "--features", str(corpus_dir / dub["feature_path"]),
        "--alignments", str(corpus_dir / dub["alignment_path"]),
    ])
    assert rc == 0
    video_line = [
        l for l in capsys.readouterr().out.strip().splitlines() if l.startswith("video")
    ][0]
    assert float(video_line.split("\t")[-1]) < 0.5


def test_score_abstains_on_unknown_words(corpus_dir, tmp_path, capsys):
    out = tmp_path / "train"
    main([
        "train", "--manifest", str(corpus_dir / "manifest.jsonl"),
        "--out", str(out), "--seed", "77",
    ])
    capsys.readouterr()
    manifest = [
        json.loads(line)
        for line in (corpus_dir / "manifest.jsonl").read_text().splitlines()
    ]
    real = next(r for r in manifest if r["scenario"] == "real")
    alien = tmp_path / "alien.txt"
    alien.write_text("xyzzy\t1.0\t1.4\nplugh\t3.0\t3.4\n")
    rc = main([
        "score", "--bank", str(out / "banks" / "persona0.json"),
        "--features", str(corpus_dir / real["feature_path"]),
        "--alignments", str(alien),
    ])
    assert rc == 0
    out_text = capsys.readouterr().out
    assert "abstain" in out_text


def test_train_exit_2_on_real_only_manifest(tmp_path, corpus_dir, capsys):
    lines = [
        line
        for line in (corpus_dir / "manifest.jsonl").read_text().splitlines()
        if json.loads(line)["scenario"] == "real"
    ]
    # keep paths valid by writing next to the original manifest
    manifest = corpus_dir / "real_only.jsonl"
    manifest.write_text("\n".join(lines) + "\n")
    rc = main(["train", "--manifest", str(manifest), "--out", str(tmp_path / "t"), "--seed", "1"])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_eval_rerun_identical(corpus_dir, tmp_path, capsys):
    args = ["eval", "--manifest", str(corpus_dir / "manifest.jsonl"), "--seed", "77"]
    out1, out2 = tmp_path / "e1", tmp_path / "e2"
    assert main([*args, "--out", str(out1)]) == 0
    assert main([*args, "--out", str(out2)]) == 0
    capsys.readouterr()
    for name in ("eval_table.tsv", "eval_summary.json", "clip_records.jsonl", "config.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_ablate_writes_three_variants(corpus_dir, tmp_path, capsys):
    out = tmp_path / "abl"
    rc = main([
        "ablate", "--manifest", str(corpus_dir / "manifest.jsonl"),
        "--out", str(out), "--seed", "77",
    ])
    assert rc == 0
    capsys.readouterr()
    table = (out / "ablation_table.tsv").read_text()
    for variant in ("fixed_window:30", "word_window", "word"):
        assert variant in table


def test_transfer_command(corpus_dir, tmp_path, capsys):
    out = tmp_path / "tr"
    rc = main([
        "transfer", "--manifest", str(corpus_dir / "manifest.jsonl"),
        "--out", str(out), "--seed", "77",
    ])
    assert rc == 0
    capsys.readouterr()
    assert "transfer:dubbing" in (out / "transfer_table.tsv").read_text()


def test_sweep_command(corpus_dir, tmp_path, capsys):
    out = tmp_path / "sw"
    rc = main([
        "sweep", "--manifest", str(corpus_dir / "manifest.jsonl"),
        "--out", str(out), "--seed", "77", "--hours-grid", "0.02,0.08",
    ])
    assert rc == 0
    capsys.readouterr()
    table = (out / "sweep_table.tsv").read_text()
    assert table.count("persona0") == 2


def test_sweep_rejects_zero_hours(corpus_dir, tmp_path, capsys):
    rc = main([
        "sweep", "--manifest", str(corpus_dir / "manifest.jsonl"),
        "--out", str(tmp_path / "sz"), "--seed", "77", "--hours-grid", "0.0,0.1",
    ])
    assert rc == 1
    capsys.readouterr()


def test_report_top_words_include_signatures(corpus_dir, tmp_path, capsys):
    out = tmp_path / "rep"
    rc = main([
        "report", "--manifest", str(corpus_dir / "manifest.jsonl"),
        "--out", str(out), "--seed", "77",
    ])
    assert rc == 0
    capsys.readouterr()
    gt = json.loads((corpus_dir / "ground_truth.json").read_text())
    sig = set(gt["personas"]["persona0"]["signatures"])
    ranking = (out / "report_persona0" / "ranking.tsv").read_text().splitlines()
    top5 = {line.split("\t")[1] for line in ranking[1:6]}
    assert top5 & sig
    assert (out / "report_persona0" / "histograms.jsonl").exists()
    assert (out / "report_persona0" / "timelines.jsonl").exists()


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["eval", "--nonsense"])
    assert exc.value.code == 1
    assert main(["eval", "--seed", "1"]) == 1  # missing manifest/out
    capsys.readouterr()


def test_bad_config_file_exit_1(tmp_path, capsys):
    bad = tmp_path / "cfg.json"
    bad.write_text('{"unknown_key": 1}')
    rc = main(["eval", "--config", str(bad), "--manifest", "x", "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "unknown config keys" in capsys.readouterr().err


def test_config_file_merging(tmp_path, corpus_dir, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 77, "manifest": str(corpus_dir / "manifest.jsonl")}))
    out = tmp_path / "ev"
    rc = main(["eval", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    capsys.readouterr()
    echoed = json.loads((out / "config.json").read_text())
    assert echoed["config"]["seed"] == 77


def test_missing_manifest_file_exit_2(tmp_path, capsys):
    rc = main(["eval", "--manifest", str(tmp_path / "nope.jsonl"), "--out", str(tmp_path / "o"), "--seed", "1"])
    assert rc == 2 or rc == 1  # FileNotFoundError surfaces as OSError
    capsys.readouterr()
