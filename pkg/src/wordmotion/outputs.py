"""Deterministic writers for result tables, score records, and reports.

Everything here must be byte-identical across reruns with the same inputs:
keys are sorted, floats use fixed formats, and nothing timestamped is
written (timestamps live in the sidecar run log only).
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path
from typing import Mapping, Sequence

from wordmotion.evaluation import (
    ClipRecord,
    ExperimentResult,
    SweepPoint,
    TransferResult,
    WordReportSet,
)

_AUC = "{:.6f}"
_RATE = "{:.4f}"


def write_json(obj, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1, default=_jsonable)
        fh.write("\n")


def _jsonable(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def _fmt(value, fmt: str) -> str:
    return fmt.format(value) if value is not None else "-"


def _scenarios(results: Mapping[str, ExperimentResult]) -> list[str]:
    out: set[str] = set()
    for r in results.values():
        out.update(r.n_clips)
    return sorted(out)


def write_experiment_table(
    results: Mapping[str, ExperimentResult], path: str | Path
) -> None:
    """One row per person; AUC column per fake scenario, plus abstentions."""
    scenarios = _scenarios(results)
    fakes = [s for s in scenarios if s != "real"]
    header = ["person", "mode", "models", "hours"]
    header += [f"auc:{s}" for s in fakes]
    header += [f"abstain:{s}" for s in scenarios]
    header += [f"clips:{s}" for s in scenarios]
    header += [f"units:{s}" for s in scenarios]
    lines = ["\t".join(header)]
    for person in sorted(results):
        r = results[person]
        row = [person, r.mode, str(r.n_models), _RATE.format(r.training_hours)]
        row += [_fmt(r.auc.get(s), _AUC) for s in fakes]
        row += [_fmt(r.abstention.get(s), _RATE) for s in scenarios]
        row += [str(r.n_clips.get(s, 0)) for s in scenarios]
        row += [str(r.n_units_tested.get(s, 0)) for s in scenarios]
        lines.append("\t".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_ablation_table(
    tables: Mapping[str, Mapping[str, ExperimentResult]], path: str | Path
) -> None:
    """One row per conditioning variant per person, plus per-variant means."""
    all_fakes: set[str] = set()
    for results in tables.values():
        for r in results.values():
            all_fakes.update(r.auc)
    fakes = sorted(all_fakes)
    header = ["variant", "person"] + [f"auc:{s}" for s in fakes]
    lines = ["\t".join(header)]
    for variant in sorted(tables):
        results = tables[variant]
        for person in sorted(results):
            row = [variant, person]
            row += [_fmt(results[person].auc.get(s), _AUC) for s in fakes]
            lines.append("\t".join(row))
        means = []
        for s in fakes:
            got = [r.auc[s] for r in results.values() if s in r.auc]
            means.append(_fmt(sum(got) / len(got) if got else None, _AUC))
        lines.append("\t".join([variant, "(mean)"] + means))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_transfer_table(
    results: Mapping[str, TransferResult], path: str | Path
) -> None:
    scenarios = sorted({s for r in results.values() for s in r.self_auc})
    header = ["person"]
    for s in scenarios:
        header += [f"self:{s}", f"transfer:{s}", f"gap:{s}"]
    lines = ["\t".join(header)]
    for person in sorted(results):
        r = results[person]
        row = [person]
        for s in scenarios:
            self_a = r.self_auc.get(s)
            trans_a = r.transfer_auc.get(s)
            gap = self_a - trans_a if self_a is not None and trans_a is not None else None
            row += [_fmt(self_a, _AUC), _fmt(trans_a, _AUC), _fmt(gap, _AUC)]
        lines.append("\t".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_sweep_table(
    curves: Mapping[str, Sequence[SweepPoint]], path: str | Path
) -> None:
    scenarios = sorted({s for pts in curves.values() for p in pts for s in p.auc})
    header = ["person", "hours_requested", "hours_used", "models"]
    header += [f"auc:{s}" for s in scenarios]
    lines = ["\t".join(header)]
    for person in sorted(curves):
        for p in curves[person]:
            row = [
                person,
                _RATE.format(p.hours_requested),
                _RATE.format(p.hours_used),
                str(p.n_models),
            ]
            row += [_fmt(p.auc.get(s), _AUC) for s in scenarios]
            lines.append("\t".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_clip_records(records: Sequence[ClipRecord], path: str | Path) -> None:
    """JSON-lines clip scores: person, video, clip start, score or abstain."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for r in records:
            rec = {
                "person_id": r.person_id,
                "video_id": r.video_id,
                "scenario": r.scenario,
                "clip_start_s": r.start_s,
                "score": r.result.score,
                "abstain": r.result.abstained,
                "n_scored_units": r.result.n_scored_units,
                "n_discarded_units": r.result.n_discarded_units,
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def write_word_report_files(report: WordReportSet, out_dir: str | Path) -> None:
    """ranking.tsv plus JSON-lines histogram and timeline files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["\t".join(["rank", "token", "auc", "n_real", "n_fake"])]
    for i, (token, word_auc) in enumerate(report.ranking, start=1):
        r = report.reports[token]
        lines.append(
            "\t".join([str(i), token, _AUC.format(word_auc), str(r.n_real), str(r.n_fake)])
        )
    (out / "ranking.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    with (out / "histograms.jsonl").open("w", encoding="utf-8") as fh:
        for token in sorted(report.reports):
            r = report.reports[token]
            rec = {
                "token": token,
                "auc": r.auc,
                "n_real": r.n_real,
                "n_fake": r.n_fake,
                "components": r.component_stats,
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")

    with (out / "timelines.jsonl").open("w", encoding="utf-8") as fh:
        for video_id in sorted(report.timelines):
            for p in report.timelines[video_id]:
                rec = {
                    "video_id": p.video_id,
                    "time_s": p.time_s,
                    "token": p.token,
                    "score": p.score,
                    "train_mean": p.train_mean,
                    "train_std": p.train_std,
                }
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


def experiment_results_to_dict(results: Mapping[str, ExperimentResult]) -> dict:
    return {person: asdict(r) for person, r in sorted(results.items())}


def transfer_results_to_dict(results: Mapping[str, TransferResult]) -> dict:
    return {person: asdict(r) for person, r in sorted(results.items())}


def sweep_to_dict(curves: Mapping[str, Sequence[SweepPoint]]) -> dict:
    return {person: [asdict(p) for p in pts] for person, pts in sorted(curves.items())}
