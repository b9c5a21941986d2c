"""Optional matplotlib rendering of word reports (vector output).

matplotlib is only needed when plots are requested; everything else in the
package works without it.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from wordmotion.evaluation import TimelinePoint, WordReport


def _require_pyplot():
    try:
        import matplotlib

        matplotlib.use("Agg", force=False)
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise ImportError(
            "plot output requires matplotlib; install wordmotion[plots]"
        ) from exc
    return plt


def plot_word_histograms(report: WordReport, path: str | Path) -> None:
    """5x5 panel grid: per-component real vs fake distributions of one word."""
    plt = _require_pyplot()
    names = sorted(report.component_stats)
    fig, axes = plt.subplots(5, 5, figsize=(16, 12))
    for ax, name in zip(axes.flat, names):
        stats = report.component_stats[name]
        edges = stats["edges"]
        centers = [(a + b) / 2 for a, b in zip(edges[:-1], edges[1:])]
        width = (edges[-1] - edges[0]) / max(1, len(centers))
        ax.bar(centers, stats["real_counts"], width=width, alpha=0.55, label="real")
        ax.bar(centers, stats["fake_counts"], width=width, alpha=0.55, label="fake")
        ax.set_title(name, fontsize=8)
        ax.tick_params(labelsize=6)
    axes.flat[0].legend(fontsize=7)
    fig.suptitle(f"{report.token!r}: word AUC {report.auc:.3f}")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_timeline(
    points: Sequence[TimelinePoint], path: str | Path, video_id: str = ""
) -> None:
    """Per-word scores over time against the training real-score band."""
    plt = _require_pyplot()
    fig, ax = plt.subplots(figsize=(12, 3.5))
    times = [p.time_s for p in points]
    scores = [p.score for p in points]
    means = [p.train_mean for p in points]
    lo = [max(0.0, p.train_mean - p.train_std) for p in points]
    hi = [min(1.0, p.train_mean + p.train_std) for p in points]
    ax.fill_between(times, lo, hi, alpha=0.3, label="training real score +- std")
    ax.plot(times, means, lw=1.0, alpha=0.8)
    ax.plot(times, scores, "o-", ms=3, lw=1.0, color="tab:orange", label="test score")
    for p in points:
        if p.score < 0.2:
            ax.annotate(p.token, (p.time_s, p.score), fontsize=6, rotation=45)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("real probability")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(fontsize=8)
    ax.set_title(video_id)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
