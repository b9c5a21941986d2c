"""Command-line surface for the pipeline.

Subcommands: synth, train, score, eval, ablate, transfer, sweep, report.
Options merge as defaults < --config file < explicit flags, the merged
semantic config is echoed to <out>/config.json with a stable hash, and all
randomness flows from --seed. Exit codes: 0 success, 1 usage or config
error, 2 data or model error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from wordmotion import outputs
from wordmotion.classifier import TrainConfig, load_bank, save_bank
from wordmotion.errors import WordMotionError
from wordmotion.evaluation import (
    ExperimentConfig,
    SplitSpec,
    build_word_report,
    collect_labeled_test_features,
    evaluate_manifest,
    run_ablations,
    run_size_sweep,
    run_transfer,
    split_dataset,
    train_person_bank,
    ClipRecord,
)
from wordmotion.features import ConditioningMode, extract_for_mode, parse_lexicon
from wordmotion.ingest import load_manifest, parse_alignments, parse_frame_features
from wordmotion.scoring import features_in_clip, score_clip, segment_clips, score_video
from wordmotion.synth import generate_corpus, make_persona_specs

log = logging.getLogger(__name__)


class UsageError(Exception):
    """Bad invocation or configuration; maps to exit code 1."""


@dataclass(frozen=True)
class RunConfig:
    """Merged settings for one command invocation."""

    seed: int = 0
    mode: str = "word"
    manifest: str | None = None
    bank: str | None = None
    lexicon: str | None = None
    features: str | None = None
    alignments: str | None = None
    out: str | None = None
    force: bool = False
    plots: bool = False
    # timing and extraction
    fps: float = 30.0
    padding_frames: int = 3
    clip_seconds: float = 10.0
    shift_seconds: float = 2.0
    window_frames: int = 30
    # split and training
    train_fraction: float = 0.9
    learning_rate: float = 0.1
    max_iterations: int = 2000
    grad_tolerance: float = 1e-6
    l2_lambda: float = 1e-3
    intercept: bool = True
    standardize: bool = True
    class_weighting: bool = False
    # synthetic corpus generation
    personas: int = 2
    vocab_size: int = 40
    signature_words: int = 12
    hours: float = 1.0
    fake_ratio: float = 1.0
    amplitude: float = 2.0
    noise_std: float = 0.5
    articulation_amplitude: float = 1.0
    impersonator_hours: float = 0.0
    video_seconds: float = 120.0
    words_per_minute: float = 75.0
    speech_density: float = 0.35
    palette: str = "disjoint"
    active_phonemes: int = 16
    # sweep and report
    hours_grid: str = "0.1,0.3,0.6,1.0"
    top_k: int = 5


#: Keys that do not affect results and stay out of the echoed config/hash.
_NON_SEMANTIC = {"out", "force", "plots"}


def semantic_config(cfg: RunConfig) -> dict:
    return {k: v for k, v in sorted(asdict(cfg).items()) if k not in _NON_SEMANTIC}


def config_hash(cfg: RunConfig) -> str:
    payload = json.dumps(semantic_config(cfg), sort_keys=True).encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:16]


def conditioning_mode(cfg: RunConfig) -> ConditioningMode:
    mode = ConditioningMode.parse(cfg.mode)
    if mode.kind == "fixed_window" and ":" not in cfg.mode:
        mode = ConditioningMode("fixed_window", cfg.window_frames)
    return mode


def experiment_config(cfg: RunConfig) -> ExperimentConfig:
    lexicon_path = Path(cfg.lexicon) if cfg.lexicon else None
    if lexicon_path is None and cfg.manifest:
        candidate = Path(cfg.manifest).parent / "lexicon.txt"
        if candidate.exists():
            lexicon_path = candidate
    return ExperimentConfig(
        train=TrainConfig(
            learning_rate=cfg.learning_rate,
            max_iterations=cfg.max_iterations,
            grad_tolerance=cfg.grad_tolerance,
            l2_lambda=cfg.l2_lambda,
            use_intercept=cfg.intercept,
            standardize=cfg.standardize,
            class_weighting=cfg.class_weighting,
        ),
        split=SplitSpec(train_fraction=cfg.train_fraction, seed=cfg.seed),
        fps=cfg.fps,
        padding_t=cfg.padding_frames,
        clip_length_s=cfg.clip_seconds,
        shift_s=cfg.shift_seconds,
        window_len=cfg.window_frames,
        lexicon_path=lexicon_path,
    )


@contextmanager
def _locked_out_dir(cfg: RunConfig, command: str, require_empty: bool = False):
    if not cfg.out:
        raise UsageError(f"{command} requires --out")
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if require_empty and not cfg.force and any(out.iterdir()):
        raise UsageError(f"output directory {out} is not empty (use --force)")
    lock = out / ".lock"
    if lock.exists() and cfg.force:
        lock.unlink()
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise UsageError(f"{out} is locked by another run (or stale; use --force)")
    os.write(fd, str(os.getpid()).encode())
    os.close(fd)
    handler = logging.FileHandler(out / "run.log", encoding="utf-8")
    handler.setFormatter(
        logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s")
    )
    handler.setLevel(logging.INFO)
    root = logging.getLogger()
    old_level = root.level
    root.addHandler(handler)
    root.setLevel(min(old_level, logging.INFO) if old_level else logging.INFO)
    try:
        outputs.write_json(
            {"command": command, "config": semantic_config(cfg), "config_hash": config_hash(cfg)},
            out / "config.json",
        )
        yield out
    finally:
        root.removeHandler(handler)
        root.setLevel(old_level)
        handler.close()
        lock.unlink(missing_ok=True)


def _require(cfg: RunConfig, command: str, *keys: str) -> None:
    for key in keys:
        if getattr(cfg, key) in (None, ""):
            raise UsageError(f"{command} requires --{key.replace('_', '-')}")


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def cmd_synth(cfg: RunConfig) -> int:
    with _locked_out_dir(cfg, "synth", require_empty=True) as out:
        specs = make_persona_specs(
            n_personas=cfg.personas,
            vocab_size=cfg.vocab_size,
            n_signature_words=cfg.signature_words,
            amplitude=cfg.amplitude,
            noise_std=cfg.noise_std,
            words_per_minute=cfg.words_per_minute,
            speech_density=cfg.speech_density,
            fps=cfg.fps,
            seed=cfg.seed,
            palette=cfg.palette,
        )
        corpus = generate_corpus(
            specs,
            hours_per_persona=cfg.hours,
            fake_ratio=cfg.fake_ratio,
            seed=cfg.seed,
            out_dir=out,
            video_seconds=cfg.video_seconds,
            articulation_amplitude=cfg.articulation_amplitude,
            impersonator_hours=cfg.impersonator_hours,
            active_phonemes=cfg.active_phonemes,
        )
        n = len(corpus.manifest.entries)
        print(f"wrote {n} entries for {len(specs)} personas to {corpus.manifest_path}")
    return 0


def cmd_train(cfg: RunConfig) -> int:
    _require(cfg, "train", "manifest", "out")
    manifest = load_manifest(cfg.manifest)
    config = experiment_config(cfg)
    mode = conditioning_mode(cfg)
    with _locked_out_dir(cfg, "train") as out:
        train_m, _ = split_dataset(manifest, config.split)
        bank_dir = out / "banks"
        bank_dir.mkdir(exist_ok=True)
        summary_rows = {}
        print("person\tunits\tmodels\thours\tthreshold")
        for person in manifest.persons():
            bank, summary = train_person_bank(
                train_m, person, mode, config,
                metadata={"config_hash": config_hash(cfg)},
            )
            save_bank(bank, bank_dir / f"{person}.json")
            summary_rows[person] = {
                "n_unique_units": summary.n_unique_units,
                "n_models": summary.n_models,
                "training_hours": summary.training_hours,
                "unit_threshold": summary.unit_threshold,
            }
            print(
                f"{person}\t{summary.n_unique_units}\t{summary.n_models}"
                f"\t{summary.training_hours:.4f}\t{summary.unit_threshold}"
            )
        outputs.write_json(
            {"config_hash": config_hash(cfg), "persons": summary_rows},
            out / "train_summary.json",
        )
    return 0


def cmd_score(cfg: RunConfig) -> int:
    _require(cfg, "score", "bank", "features", "alignments")
    bank = load_bank(cfg.bank)
    series = parse_frame_features(
        cfg.features, cfg.fps, person_id=bank.person_id
    )
    occurrences = parse_alignments(cfg.alignments, cfg.fps, len(series))
    lexicon = None
    if bank.mode.kind == "phoneme":
        if not cfg.lexicon:
            raise UsageError("scoring with a phoneme bank requires --lexicon")
        lexicon = parse_lexicon(cfg.lexicon)
    feats, _ = extract_for_mode(
        series, occurrences, bank.mode, cfg.padding_frames, lexicon
    )
    records = []
    for clip in segment_clips(series, cfg.clip_seconds, cfg.shift_seconds):
        feats_in = features_in_clip(feats, clip, cfg.padding_frames, len(series))
        result = score_clip(bank, feats_in, clip)
        records.append(
            ClipRecord(
                person_id=bank.person_id,
                video_id=series.video_id,
                scenario="test",
                start_frame=clip.start_frame,
                start_s=clip.start_frame / cfg.fps,
                result=result,
            )
        )
        shown = "abstain" if result.abstained else f"{result.score:.6f}"
        print(
            f"clip\t{result.n_scored_units}\t{result.n_discarded_units}"
            f"\t{records[-1].start_s:.2f}\t{shown}"
        )
    video = score_video(bank, series, occurrences, cfg.padding_frames, lexicon)
    print(f"video\t{series.video_id}\t{'abstain' if video is None else f'{video:.6f}'}")
    if cfg.out:
        with _locked_out_dir(cfg, "score") as out:
            outputs.write_clip_records(records, out / "clip_scores.jsonl")
    return 0


def cmd_eval(cfg: RunConfig) -> int:
    _require(cfg, "eval", "manifest", "out")
    manifest = load_manifest(cfg.manifest)
    config = experiment_config(cfg)
    mode = conditioning_mode(cfg)
    with _locked_out_dir(cfg, "eval") as out:
        evals = evaluate_manifest(manifest, mode, config)
        results = {p: ev.result for p, ev in evals.items()}
        outputs.write_experiment_table(results, out / "eval_table.tsv")
        outputs.write_json(
            {
                "config_hash": config_hash(cfg),
                "results": outputs.experiment_results_to_dict(results),
            },
            out / "eval_summary.json",
        )
        all_records = [r for ev in evals.values() for r in ev.clip_records]
        outputs.write_clip_records(all_records, out / "clip_records.jsonl")
        print((out / "eval_table.tsv").read_text(), end="")
    return 0


def cmd_ablate(cfg: RunConfig) -> int:
    _require(cfg, "ablate", "manifest", "out")
    manifest = load_manifest(cfg.manifest)
    config = experiment_config(cfg)
    with _locked_out_dir(cfg, "ablate") as out:
        tables = run_ablations(manifest, config)
        outputs.write_ablation_table(tables, out / "ablation_table.tsv")
        outputs.write_json(
            {
                "config_hash": config_hash(cfg),
                "variants": {
                    label: outputs.experiment_results_to_dict(res)
                    for label, res in tables.items()
                },
            },
            out / "ablation_summary.json",
        )
        print((out / "ablation_table.tsv").read_text(), end="")
    return 0


def cmd_transfer(cfg: RunConfig) -> int:
    _require(cfg, "transfer", "manifest", "out")
    manifest = load_manifest(cfg.manifest)
    config = experiment_config(cfg)
    mode = conditioning_mode(cfg)
    with _locked_out_dir(cfg, "transfer") as out:
        results = run_transfer(manifest, config, mode)
        outputs.write_transfer_table(results, out / "transfer_table.tsv")
        outputs.write_json(
            {
                "config_hash": config_hash(cfg),
                "results": outputs.transfer_results_to_dict(results),
            },
            out / "transfer_summary.json",
        )
        print((out / "transfer_table.tsv").read_text(), end="")
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    _require(cfg, "sweep", "manifest", "out")
    try:
        grid = [float(h) for h in cfg.hours_grid.split(",") if h.strip()]
    except ValueError:
        raise UsageError(f"bad --hours-grid {cfg.hours_grid!r}") from None
    manifest = load_manifest(cfg.manifest)
    config = experiment_config(cfg)
    mode = conditioning_mode(cfg)
    with _locked_out_dir(cfg, "sweep") as out:
        curves = run_size_sweep(manifest, grid, config, mode)
        outputs.write_sweep_table(curves, out / "sweep_table.tsv")
        outputs.write_json(
            {"config_hash": config_hash(cfg), "curves": outputs.sweep_to_dict(curves)},
            out / "sweep_summary.json",
        )
        print((out / "sweep_table.tsv").read_text(), end="")
    return 0


def cmd_report(cfg: RunConfig) -> int:
    _require(cfg, "report", "manifest", "out")
    manifest = load_manifest(cfg.manifest)
    config = experiment_config(cfg)
    mode = conditioning_mode(cfg)
    with _locked_out_dir(cfg, "report") as out:
        evals = evaluate_manifest(manifest, mode, config)
        _, test_m = split_dataset(manifest, config.split)
        for person, ev in sorted(evals.items()):
            labeled = collect_labeled_test_features(test_m, person, mode, config)
            report = build_word_report(ev.bank, labeled, config.fps)
            person_dir = out / f"report_{person}"
            outputs.write_word_report_files(report, person_dir)
            top = report.ranking[: cfg.top_k]
            print(f"{person} top-{cfg.top_k} units: " + ", ".join(
                f"{t}={a:.3f}" for t, a in top
            ))
            if cfg.plots:
                from wordmotion import plots

                for token, _ in top:
                    plots.plot_word_histograms(
                        report.reports[token], person_dir / f"hist_{token}.pdf"
                    )
                seen_scenarios: set[str] = set()
                for video_id in sorted(report.timelines):
                    scenario = video_id.split("_")[-2] if "_" in video_id else ""
                    if scenario in seen_scenarios:
                        continue
                    seen_scenarios.add(scenario)
                    plots.plot_timeline(
                        report.timelines[video_id],
                        person_dir / f"timeline_{video_id}.pdf",
                        video_id,
                    )
    return 0


# --------------------------------------------------------------------------
# Parser and entry point
# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--manifest", help="dataset manifest (JSON lines)")
    p.add_argument("--bank", help="model bank file")
    p.add_argument("--lexicon", help="pronunciation lexicon file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument(
        "--mode",
        help="conditioning: word | phoneme | fixed-window[:N] | word-window",
    )
    p.add_argument("--fps", type=float)
    p.add_argument("--padding-frames", type=int, dest="padding_frames")
    p.add_argument("--clip-seconds", type=float, dest="clip_seconds")
    p.add_argument("--shift-seconds", type=float, dest="shift_seconds")
    p.add_argument("--window-frames", type=int, dest="window_frames")
    p.add_argument("--train-fraction", type=float, dest="train_fraction")
    p.add_argument("--learning-rate", type=float, dest="learning_rate")
    p.add_argument("--max-iterations", type=int, dest="max_iterations")
    p.add_argument("--grad-tolerance", type=float, dest="grad_tolerance")
    p.add_argument("--l2-lambda", type=float, dest="l2_lambda")
    p.add_argument(
        "--intercept", action=argparse.BooleanOptionalAction, default=None
    )
    p.add_argument(
        "--standardize", action=argparse.BooleanOptionalAction, default=None
    )
    p.add_argument(
        "--class-weighting",
        action=argparse.BooleanOptionalAction,
        default=None,
        dest="class_weighting",
    )
    p.add_argument("--force", action="store_true", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wordmotion", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    _add_common(p)
    p.add_argument("--personas", type=int)
    p.add_argument("--vocab-size", type=int, dest="vocab_size")
    p.add_argument("--signature-words", type=int, dest="signature_words")
    p.add_argument("--hours", type=float)
    p.add_argument("--fake-ratio", type=float, dest="fake_ratio")
    p.add_argument("--amplitude", type=float)
    p.add_argument("--noise-std", type=float, dest="noise_std")
    p.add_argument(
        "--articulation-amplitude", type=float, dest="articulation_amplitude"
    )
    p.add_argument(
        "--impersonator-hours", type=float, dest="impersonator_hours"
    )
    p.add_argument("--video-seconds", type=float, dest="video_seconds")
    p.add_argument("--wpm", type=float, dest="words_per_minute")
    p.add_argument("--speech-density", type=float, dest="speech_density")
    p.add_argument("--palette", choices=["disjoint", "shared"])
    p.add_argument("--active-phonemes", type=int, dest="active_phonemes")

    p = sub.add_parser("train", help="train per-person model banks")
    _add_common(p)

    p = sub.add_parser("score", help="score one video against a bank")
    _add_common(p)
    p.add_argument("--features", help="frame-feature CSV")
    p.add_argument("--alignments", help="word alignment file")

    for name, help_text in (
        ("eval", "run the experiment matrix"),
        ("ablate", "compare conditioning variants"),
        ("transfer", "cross-person transfer experiment"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)

    p = sub.add_parser("sweep", help="training-size sweep")
    _add_common(p)
    p.add_argument("--hours-grid", dest="hours_grid", help="comma-separated hours")

    p = sub.add_parser("report", help="per-word interpretability reports")
    _add_common(p)
    p.add_argument("--top-k", type=int, dest="top_k")
    p.add_argument("--plots", action="store_true", default=None)

    return parser


def merge_config(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file {args.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError(f"config file {args.config} must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(loaded) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        values.update(loaded)
    for f in fields(RunConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    try:
        return RunConfig(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


_COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "score": cmd_score,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "transfer": cmd_transfer,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = merge_config(args)
        return _COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except WordMotionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
