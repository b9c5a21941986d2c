"""Pure numpy implementations of the hot kernels.

These are the import-time fallback when the compiled extension is not
available, and the behavioural reference the extension is tested against.
Both backends expose the same two functions with identical semantics.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def window_deltas(values: np.ndarray, valid: np.ndarray, spans: np.ndarray):
    """Per-window max-min range of each motion component.

    Args:
        values: (T, D) float64 array, one row per frame.
        spans: (N, 2) int64 array of inclusive [lo, hi] frame ranges,
            already clamped to [0, T-1].
        valid: (T,) bool/uint8 mask; invalid frames are skipped.

    Returns:
        (deltas, n_valid): (N, D) float64 deltas and the (N,) int64 count
        of valid frames per window. Windows with no valid frame get a zero
        row and count 0.
    """
    values = np.ascontiguousarray(values, dtype=np.float64)
    mask = np.asarray(valid).astype(bool)
    spans = np.asarray(spans, dtype=np.int64)
    n = spans.shape[0]
    deltas = np.zeros((n, values.shape[1]), dtype=np.float64)
    n_valid = np.zeros(n, dtype=np.int64)
    for i in range(n):
        lo, hi = spans[i, 0], spans[i, 1]
        sub = values[lo : hi + 1]
        submask = mask[lo : hi + 1]
        k = int(submask.sum())
        n_valid[i] = k
        if k == 0:
            continue
        picked = sub[submask]
        deltas[i] = picked.max(axis=0) - picked.min(axis=0)
    return deltas, n_valid


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def _softplus(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    neg = z <= 0
    out[neg] = np.log1p(np.exp(z[neg]))
    out[~neg] = z[~neg] + np.log1p(np.exp(-z[~neg]))
    return out


def _penalized_loglik(X, y, theta, intercept, l2):
    z = X @ theta + intercept
    return float(np.sum(y * z - _softplus(z)) - l2 * X.shape[0] * np.dot(theta, theta))


def logreg_fit(
    X: np.ndarray,
    y: np.ndarray,
    *,
    lr: float,
    max_iter: int,
    tol: float,
    l2: float,
    use_intercept: bool,
    record_trace: bool = False,
):
    """Full-batch gradient ascent for binary logistic regression.

    Maximizes the mean log-likelihood minus ``l2 * ||theta||^2`` (the
    intercept is not penalized). Stops when the inf-norm of the gradient
    drops below ``tol`` or after ``max_iter`` updates.

    Returns ``(theta, intercept, n_iter, trace)`` where ``trace`` is the
    sum-form penalized log-likelihood recorded before each update plus once
    after the last (``None`` unless requested).
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    m, d = X.shape
    # Cap the step by the curvature bound of the objective so ascent stays
    # monotone even for extreme penalties; the default rate is below the
    # cap for standardized features.
    smoothness = float((X * X).sum()) / m / 4.0 + 2.0 * l2 + 0.25
    lr = min(lr, 1.0 / smoothness)
    theta = np.zeros(d)
    intercept = 0.0
    trace = [] if record_trace else None
    n_iter = 0
    for _ in range(max_iter):
        if record_trace:
            trace.append(_penalized_loglik(X, y, theta, intercept, l2))
        r = y - _sigmoid(X @ theta + intercept)
        g_theta = X.T @ r / m - 2.0 * l2 * theta
        g_b = float(r.mean()) if use_intercept else 0.0
        if max(float(np.abs(g_theta).max(initial=0.0)), abs(g_b)) < tol:
            if record_trace:
                trace.pop()
            break
        theta += lr * g_theta
        intercept += lr * g_b
        n_iter += 1
    if record_trace:
        trace.append(_penalized_loglik(X, y, theta, intercept, l2))
        trace = np.asarray(trace)
    return theta, intercept, n_iter, trace
