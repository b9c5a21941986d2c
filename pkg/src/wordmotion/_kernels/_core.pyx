# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: per-window motion ranges and logistic-regression ascent.

Semantics must stay in lockstep with ``_ref.py``; the test suite checks the
two backends against each other whenever this extension is importable.
"""

import numpy as np

from libc.math cimport exp, fabs, log1p

BACKEND = "compiled"


cdef inline double _sigmoid(double z) noexcept nogil:
    if z > 500.0:
        z = 500.0
    elif z < -500.0:
        z = -500.0
    return 1.0 / (1.0 + exp(-z))


cdef inline double _softplus(double z) noexcept nogil:
    if z <= 0.0:
        return log1p(exp(z))
    return z + log1p(exp(-z))


cdef double _penalized_loglik(double[:, ::1] x, double[::1] y,
                              double[::1] theta, double intercept,
                              double l2) noexcept nogil:
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t d = x.shape[1]
    cdef Py_ssize_t i, j
    cdef double total = 0.0
    cdef double sq = 0.0
    cdef double z
    for i in range(m):
        z = intercept
        for j in range(d):
            z += x[i, j] * theta[j]
        total += y[i] * z - _softplus(z)
    for j in range(d):
        sq += theta[j] * theta[j]
    return total - l2 * m * sq


def window_deltas(values, valid, spans):
    """See ``wordmotion._kernels._ref.window_deltas``."""
    values_arr = np.ascontiguousarray(values, dtype=np.float64)
    valid_arr = np.ascontiguousarray(np.asarray(valid), dtype=np.uint8)
    spans_arr = np.ascontiguousarray(np.asarray(spans, dtype=np.int64))

    cdef double[:, ::1] v = values_arr
    cdef unsigned char[::1] ok = valid_arr
    cdef long long[:, ::1] sp = spans_arr
    cdef Py_ssize_t n = sp.shape[0]
    cdef Py_ssize_t d = v.shape[1]

    deltas_arr = np.zeros((n, d), dtype=np.float64)
    n_valid_arr = np.zeros(n, dtype=np.int64)
    lo_arr = np.empty(d, dtype=np.float64)
    hi_arr = np.empty(d, dtype=np.float64)
    cdef double[:, ::1] out = deltas_arr
    cdef long long[::1] nv = n_valid_arr
    cdef double[::1] mn = lo_arr
    cdef double[::1] mx = hi_arr

    cdef Py_ssize_t i, j, t, lo, hi
    cdef long long k
    cdef double x
    with nogil:
        for i in range(n):
            lo = <Py_ssize_t> sp[i, 0]
            hi = <Py_ssize_t> sp[i, 1]
            k = 0
            for t in range(lo, hi + 1):
                if not ok[t]:
                    continue
                if k == 0:
                    for j in range(d):
                        mn[j] = v[t, j]
                        mx[j] = v[t, j]
                else:
                    for j in range(d):
                        x = v[t, j]
                        if x < mn[j]:
                            mn[j] = x
                        elif x > mx[j]:
                            mx[j] = x
                k += 1
            nv[i] = k
            if k > 0:
                for j in range(d):
                    out[i, j] = mx[j] - mn[j]
    return deltas_arr, n_valid_arr


def logreg_fit(X, y, *, double lr, long max_iter, double tol, double l2,
               bint use_intercept, bint record_trace=False):
    """See ``wordmotion._kernels._ref.logreg_fit``."""
    x_arr = np.ascontiguousarray(X, dtype=np.float64)
    y_arr = np.ascontiguousarray(np.asarray(y, dtype=np.float64))

    cdef double[:, ::1] xv = x_arr
    cdef double[::1] yv = y_arr
    cdef Py_ssize_t m = xv.shape[0]
    cdef Py_ssize_t d = xv.shape[1]

    theta_arr = np.zeros(d, dtype=np.float64)
    grad_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] theta = theta_arr
    cdef double[::1] g = grad_arr

    # Same step-size cap as the fallback: curvature bound keeps ascent
    # monotone for any penalty strength.
    cdef double smoothness = float(np.multiply(x_arr, x_arr).sum()) / m / 4.0 + 2.0 * l2 + 0.25
    if lr > 1.0 / smoothness:
        lr = 1.0 / smoothness

    trace_list = [] if record_trace else None
    cdef double intercept = 0.0
    cdef double gb, gb_sum, gmax, z, r
    cdef Py_ssize_t i, j
    cdef long it
    cdef long n_iter = 0
    cdef bint converged

    for it in range(max_iter):
        if record_trace:
            trace_list.append(_penalized_loglik(xv, yv, theta, intercept, l2))
        with nogil:
            for j in range(d):
                g[j] = 0.0
            gb_sum = 0.0
            for i in range(m):
                z = intercept
                for j in range(d):
                    z += xv[i, j] * theta[j]
                r = yv[i] - _sigmoid(z)
                gb_sum += r
                for j in range(d):
                    g[j] += xv[i, j] * r
            gmax = 0.0
            for j in range(d):
                g[j] = g[j] / m - 2.0 * l2 * theta[j]
                if fabs(g[j]) > gmax:
                    gmax = fabs(g[j])
            gb = gb_sum / m if use_intercept else 0.0
            if fabs(gb) > gmax:
                gmax = fabs(gb)
            converged = gmax < tol
            if not converged:
                for j in range(d):
                    theta[j] += lr * g[j]
                intercept += lr * gb
        if converged:
            if record_trace:
                trace_list.pop()
            break
        n_iter += 1

    if record_trace:
        trace_list.append(_penalized_loglik(xv, yv, theta, intercept, l2))
        trace = np.asarray(trace_list)
    else:
        trace = None
    return theta_arr, float(intercept), int(n_iter), trace
