"""Pure-numpy envelope kernel for sifting.

This module is the reference twin of the compiled kernel in
``_envelope_cy``; both implement the same extrema detection, mirrored
boundary extension, and natural cubic spline evaluation, and must agree to
floating-point noise.  Keep the two in lockstep.
"""

from __future__ import annotations

import numpy as np


def find_extrema(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indices of local maxima and minima, plateaus collapsing to midpoints.

    A flat run bounded by a rise and a fall counts once, at the (floored)
    middle sample of the run.  Endpoints are never extrema.
    """
    d = np.diff(x)
    nz = np.flatnonzero(d)
    empty = np.empty(0, dtype=np.intp)
    if nz.size < 2:
        return empty, empty
    into = d[nz[:-1]]
    out = d[nz[1:]]
    mid = (nz[:-1] + 1 + nz[1:]) // 2
    maxima = mid[(into > 0) & (out < 0)]
    minima = mid[(into < 0) & (out > 0)]
    return maxima.astype(np.intp), minima.astype(np.intp)


def count_zero_crossings(x: np.ndarray) -> int:
    """Sign changes along the signal; exact zeros are skipped over."""
    s = np.sign(x)
    s = s[s != 0]
    if s.size < 2:
        return 0
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _natural_spline_second_derivs(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Second derivatives of the natural cubic spline through (t, y).

    Solves the standard tridiagonal system with zero end conditions via the
    Thomas algorithm; knot count may be as small as 2 (a straight line).
    """
    m = t.size
    m2 = np.zeros(m, dtype=np.float64)
    if m < 3:
        return m2
    h = np.diff(t)
    # interior equations: (h[j-1]/6) M[j-1] + ((h[j-1]+h[j])/3) M[j] + (h[j]/6) M[j+1] = rhs[j]
    k = m - 2
    diag = (h[:-1] + h[1:]) / 3.0
    lower = h[:-1] / 6.0
    upper = h[1:] / 6.0
    slopes = np.diff(y) / h
    rhs = slopes[1:] - slopes[:-1]

    cp = np.empty(k, dtype=np.float64)
    dp = np.empty(k, dtype=np.float64)
    cp[0] = upper[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for j in range(1, k):
        denom = diag[j] - lower[j] * cp[j - 1]
        cp[j] = upper[j] / denom
        dp[j] = (rhs[j] - lower[j] * dp[j - 1]) / denom
    sol = np.empty(k, dtype=np.float64)
    sol[-1] = dp[-1]
    for j in range(k - 2, -1, -1):
        sol[j] = dp[j] - cp[j] * sol[j + 1]
    m2[1:-1] = sol
    return m2


def _eval_natural_spline(
    t: np.ndarray, y: np.ndarray, m2: np.ndarray, u: np.ndarray
) -> np.ndarray:
    """Evaluate the spline at query points u; u must lie within [t[0], t[-1]]."""
    j = np.clip(np.searchsorted(t, u, side="right") - 1, 0, t.size - 2)
    hj = t[j + 1] - t[j]
    a = (t[j + 1] - u) / hj
    b = 1.0 - a
    return (
        a * y[j]
        + b * y[j + 1]
        + ((a**3 - a) * m2[j] + (b**3 - b) * m2[j + 1]) * (hj**2) / 6.0
    )


def _mirrored_knots(x: np.ndarray, ext: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Extend extrema with two reflections past each boundary.

    Reflections are across the first and last sample positions, so the
    spline is supported on the whole signal without clamping artifacts.
    """
    n = x.size
    last = n - 1
    left_t = np.array([-ext[1], -ext[0]], dtype=np.float64)
    left_y = np.array([x[ext[1]], x[ext[0]]], dtype=np.float64)
    right_t = np.array([2 * last - ext[-1], 2 * last - ext[-2]], dtype=np.float64)
    right_y = np.array([x[ext[-1]], x[ext[-2]]], dtype=np.float64)
    t = np.concatenate([left_t, ext.astype(np.float64), right_t])
    y = np.concatenate([left_y, x[ext], right_y])
    return t, y


def _spline_envelope(x: np.ndarray, ext: np.ndarray) -> np.ndarray:
    t, y = _mirrored_knots(x, ext)
    m2 = _natural_spline_second_derivs(t, y)
    u = np.arange(x.size, dtype=np.float64)
    return _eval_natural_spline(t, y, m2, u)


def envelope_mean(x: np.ndarray) -> tuple[np.ndarray | None, int, int]:
    """Mean of the upper and lower spline envelopes of x.

    Returns ``(mean_envelope, n_maxima, n_minima)``; the envelope is None
    when either kind of extremum occurs fewer than twice, in which case
    sifting cannot proceed.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    maxima, minima = find_extrema(x)
    n_max = int(maxima.size)
    n_min = int(minima.size)
    if n_max < 2 or n_min < 2:
        return None, n_max, n_min
    upper = _spline_envelope(x, maxima)
    lower = _spline_envelope(x, minima)
    return 0.5 * (upper + lower), n_max, n_min


def extrema_and_crossing_counts(x: np.ndarray) -> tuple[int, int]:
    """(number of extrema, number of zero crossings) for the IMF check."""
    maxima, minima = find_extrema(np.asarray(x, dtype=np.float64))
    return int(maxima.size + minima.size), count_zero_crossings(x)
