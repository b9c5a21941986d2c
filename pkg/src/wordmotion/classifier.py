"""Per-unit binary classifiers over gesture features, and their storage.

Each spoken unit gets its own logistic regression trained on standardized
25-D gesture vectors, real (1) versus fake (0). Training is deterministic
full-batch gradient ascent on the L2-penalized log-likelihood; the penalty
is expressed per example so the default behaves consistently across units
with very different occurrence counts.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from wordmotion import _kernels
from wordmotion.errors import (
    CorruptModel,
    EmptyBank,
    ModeMismatch,
    NonFiniteInput,
    SingleClassData,
    VersionMismatch,
)
from wordmotion.features import POOLED_TOKEN, ConditioningMode, GestureFeature

log = logging.getLogger(__name__)

BANK_FORMAT = "wordmotion-bank"
BANK_VERSION = 1

_STD_FLOOR = 1e-6


@dataclass(frozen=True)
class LabeledExample:
    """A gesture vector with its ground-truth label (1 real, 0 fake)."""

    x: np.ndarray
    y: int


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.1
    max_iterations: int = 2000
    grad_tolerance: float = 1e-6
    l2_lambda: float = 1e-3  # L2 penalty per training example
    use_intercept: bool = True
    standardize: bool = True
    class_weighting: bool = False

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or self.grad_tolerance <= 0:
            raise ValueError("learning_rate and grad_tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be nonnegative")


@dataclass
class UnitClassifier:
    """Trained parameters plus the standardization stats to reapply at test."""

    token: str
    theta: np.ndarray
    intercept: float
    feature_mean: np.ndarray
    feature_std: np.ndarray
    n_real: int
    n_fake: int
    train_loglik: float
    n_iterations: int
    train_real_score_mean: float
    train_real_score_std: float


def sigmoid(z):
    """Logistic function with inputs clamped to +-500 before exponentiation."""
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def _softplus(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    neg = z <= 0
    out[neg] = np.log1p(np.exp(z[neg]))
    out[~neg] = z[~neg] + np.log1p(np.exp(-z[~neg]))
    return out


def penalized_log_likelihood(
    X: np.ndarray, y: np.ndarray, theta: np.ndarray, intercept: float, l2_lambda: float
) -> float:
    """Sum over examples of the log-likelihood, minus l2_lambda * M * ||theta||^2."""
    z = np.asarray(X) @ np.asarray(theta) + intercept
    y = np.asarray(y, dtype=float)
    return float(
        np.sum(y * z - _softplus(z))
        - l2_lambda * len(y) * float(np.dot(theta, theta))
    )


def log_likelihood_gradient(
    X: np.ndarray, y: np.ndarray, theta: np.ndarray, intercept: float, l2_lambda: float
) -> tuple[np.ndarray, float]:
    """Analytic gradient of :func:`penalized_log_likelihood` (theta, intercept)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    r = y - sigmoid(X @ np.asarray(theta) + intercept)
    g_theta = X.T @ r - 2.0 * l2_lambda * len(y) * np.asarray(theta)
    return g_theta, float(r.sum())


def _fit_weighted(X, y, w, config: TrainConfig):
    """Numpy ascent with per-example weights (class-weighting path only)."""
    theta = np.zeros(X.shape[1])
    intercept = 0.0
    wsum = w.sum()
    n_iter = 0
    for _ in range(config.max_iterations):
        r = w * (y - sigmoid(X @ theta + intercept))
        g_theta = X.T @ r / wsum - 2.0 * config.l2_lambda * theta
        g_b = float(r.sum() / wsum) if config.use_intercept else 0.0
        if max(float(np.abs(g_theta).max(initial=0.0)), abs(g_b)) < config.grad_tolerance:
            break
        theta += config.learning_rate * g_theta
        intercept += config.learning_rate * g_b
        n_iter += 1
    return theta, intercept, n_iter


def fit_logistic(
    X: np.ndarray,
    y: np.ndarray,
    config: TrainConfig,
    record_trace: bool = False,
):
    """Low-level fit on already-standardized features.

    Returns ``(theta, intercept, n_iter, trace)``; ``trace`` holds the
    penalized log-likelihood after each update when requested (the test
    hook for checking monotone ascent).
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if config.class_weighting:
        n_pos = float(y.sum())
        n_neg = float(len(y) - n_pos)
        w = np.where(y > 0, len(y) / (2.0 * n_pos), len(y) / (2.0 * n_neg))
        theta, intercept, n_iter = _fit_weighted(X, y, w, config)
        return theta, intercept, n_iter, None
    return _kernels.logreg_fit(
        X,
        y,
        lr=config.learning_rate,
        max_iter=config.max_iterations,
        tol=config.grad_tolerance,
        l2=config.l2_lambda,
        use_intercept=config.use_intercept,
        record_trace=record_trace,
    )


def _standardization(X: np.ndarray, standardize: bool, token: str):
    d = X.shape[1]
    if not standardize:
        return np.zeros(d), np.ones(d)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    degenerate = std < _STD_FLOOR
    if degenerate.any():
        log.debug(
            "unit %r: %d zero-variance components floored", token, int(degenerate.sum())
        )
        std = np.where(degenerate, _STD_FLOOR, std)
    return mean, std


def train_unit_classifier(
    examples: Sequence[LabeledExample],
    config: TrainConfig = TrainConfig(),
    token: str = "",
) -> UnitClassifier:
    """Train one unit's classifier; requires at least one example per class."""
    if not examples:
        raise SingleClassData(f"unit {token!r}: no training examples")
    X = np.asarray([np.asarray(e.x, dtype=float) for e in examples])
    y = np.asarray([e.y for e in examples], dtype=np.float64)
    if not np.isfinite(X).all():
        raise NonFiniteInput(f"unit {token!r}: non-finite feature values")
    n_real = int((y == 1).sum())
    n_fake = int((y == 0).sum())
    if n_real == 0 or n_fake == 0:
        raise SingleClassData(
            f"unit {token!r}: need both classes, got {n_real} real / {n_fake} fake"
        )
    mean, std = _standardization(X, config.standardize, token)
    Xh = (X - mean) / std
    theta, intercept, n_iter, _ = fit_logistic(Xh, y, config)
    real_scores = sigmoid(Xh[y == 1] @ theta + intercept)
    return UnitClassifier(
        token=token,
        theta=theta,
        intercept=float(intercept),
        feature_mean=mean,
        feature_std=std,
        n_real=n_real,
        n_fake=n_fake,
        train_loglik=penalized_log_likelihood(Xh, y, theta, intercept, config.l2_lambda),
        n_iterations=int(n_iter),
        train_real_score_mean=float(real_scores.mean()),
        train_real_score_std=float(real_scores.std()),
    )


def score(clf: UnitClassifier, x: np.ndarray) -> float:
    """Real-probability of one gesture vector, strictly inside (0, 1)."""
    x = np.asarray(x, dtype=float)
    if not np.isfinite(x).all():
        raise NonFiniteInput(f"unit {clf.token!r}: non-finite input")
    z = (x - clf.feature_mean) / clf.feature_std @ clf.theta + clf.intercept
    return float(sigmoid(z))


@dataclass
class ModelBank:
    """All trained unit classifiers of one person for one conditioning mode."""

    person_id: str
    mode: ConditioningMode
    units: dict[str, UnitClassifier]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.units:
            raise EmptyBank(f"bank for {self.person_id!r} has no units")

    def lookup(self, token: str) -> UnitClassifier | None:
        if self.mode.kind == "word_window":
            return self.units.get(POOLED_TOKEN)
        return self.units.get(token)

    def tokens(self) -> list[str]:
        return sorted(self.units)

    def __len__(self) -> int:
        return len(self.units)


def train_bank(
    labeled_features: Iterable[tuple[GestureFeature, int]],
    unit_set: set[str],
    config: TrainConfig = TrainConfig(),
    person_id: str = "",
    mode: ConditioningMode = ConditioningMode("word"),
    metadata: dict | None = None,
) -> ModelBank:
    """Train one classifier per selected unit that has both classes present.

    Units lacking a class are skipped (logged); in word-window mode all
    features pool into a single classifier regardless of token.
    """
    pooled = mode.kind == "word_window"
    groups: dict[str, list[LabeledExample]] = {}
    for feat, label in labeled_features:
        if feat.mode != mode.kind:
            raise ModeMismatch(
                f"feature mode {feat.mode!r} does not match bank mode {mode.kind!r}"
            )
        key = POOLED_TOKEN if pooled else feat.token
        if not pooled and key not in unit_set:
            continue
        groups.setdefault(key, []).append(LabeledExample(feat.vector, label))

    units: dict[str, UnitClassifier] = {}
    skipped = 0
    for token in sorted(groups):
        try:
            units[token] = train_unit_classifier(groups[token], config, token)
        except SingleClassData:
            skipped += 1
            log.debug("skipping unit %r: single class", token)
    if not units:
        raise EmptyBank(
            f"no trainable units for {person_id!r} "
            f"({len(groups)} candidates, {skipped} single-class)"
        )
    meta = dict(metadata or {})
    meta.setdefault("n_units_skipped", skipped)
    meta.setdefault("train_config", asdict(config))
    return ModelBank(person_id=person_id, mode=mode, units=units, metadata=meta)


def save_bank(bank: ModelBank, path: str | Path) -> None:
    """Serialize a bank as versioned JSON; floats round-trip losslessly."""
    doc = {
        "format": BANK_FORMAT,
        "version": BANK_VERSION,
        "person_id": bank.person_id,
        "mode": bank.mode.label(),
        "metadata": bank.metadata,
        "units": {
            token: {
                "theta": [float(v) for v in clf.theta],
                "intercept": clf.intercept,
                "mean": [float(v) for v in clf.feature_mean],
                "std": [float(v) for v in clf.feature_std],
                "n_real": clf.n_real,
                "n_fake": clf.n_fake,
                "train_loglik": clf.train_loglik,
                "n_iterations": clf.n_iterations,
                "train_real_score_mean": clf.train_real_score_mean,
                "train_real_score_std": clf.train_real_score_std,
            }
            for token, clf in bank.units.items()
        },
    }
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_bank(path: str | Path) -> ModelBank:
    try:
        with Path(path).open(encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptModel(f"cannot read bank {path}: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != BANK_FORMAT:
        raise CorruptModel(f"{path}: not a model bank file")
    if doc.get("version") != BANK_VERSION:
        raise VersionMismatch(
            f"{path}: bank version {doc.get('version')!r}, expected {BANK_VERSION}"
        )
    try:
        units = {
            token: UnitClassifier(
                token=token,
                theta=np.asarray(rec["theta"], dtype=np.float64),
                intercept=float(rec["intercept"]),
                feature_mean=np.asarray(rec["mean"], dtype=np.float64),
                feature_std=np.asarray(rec["std"], dtype=np.float64),
                n_real=int(rec["n_real"]),
                n_fake=int(rec["n_fake"]),
                train_loglik=float(rec["train_loglik"]),
                n_iterations=int(rec["n_iterations"]),
                train_real_score_mean=float(rec["train_real_score_mean"]),
                train_real_score_std=float(rec["train_real_score_std"]),
            )
            for token, rec in doc["units"].items()
        }
        return ModelBank(
            person_id=doc["person_id"],
            mode=ConditioningMode.parse(doc["mode"]),
            units=units,
            metadata=doc.get("metadata", {}),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptModel(f"{path}: {exc}") from None
