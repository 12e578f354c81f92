# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled envelope kernel for sifting.

Mirror of ``_envelope_py``: same extrema rule (plateau midpoints, endpoints
excluded), same two-point mirrored boundary extension, same natural cubic
spline.  Any change here must be made in the pure twin as well.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def find_extrema(double[::1] x):
    """Indices of local maxima and minima, plateaus collapsing to midpoints."""
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.intp_t[::1] max_buf = np.empty(n // 2 + 2, dtype=np.intp)
    cdef cnp.intp_t[::1] min_buf = np.empty(n // 2 + 2, dtype=np.intp)
    cdef Py_ssize_t n_max = 0, n_min = 0
    _scan_extrema(x, max_buf, min_buf, &n_max, &n_min)
    return (
        np.asarray(max_buf[:n_max]).copy(),
        np.asarray(min_buf[:n_min]).copy(),
    )


cdef void _scan_extrema(
    double[::1] x,
    cnp.intp_t[::1] max_buf,
    cnp.intp_t[::1] min_buf,
    Py_ssize_t* n_max,
    Py_ssize_t* n_min,
) noexcept:
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i, a = -1
    cdef double da = 0.0, d
    n_max[0] = 0
    n_min[0] = 0
    for i in range(n - 1):
        d = x[i + 1] - x[i]
        if d == 0.0:
            continue
        if a >= 0:
            if da > 0.0 and d < 0.0:
                max_buf[n_max[0]] = (a + 1 + i) // 2
                n_max[0] += 1
            elif da < 0.0 and d > 0.0:
                min_buf[n_min[0]] = (a + 1 + i) // 2
                n_min[0] += 1
        a = i
        da = d


def count_zero_crossings(double[::1] x):
    """Sign changes along the signal; exact zeros are skipped over."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t i
    cdef int prev = 0, cur, count = 0
    for i in range(n):
        if x[i] > 0.0:
            cur = 1
        elif x[i] < 0.0:
            cur = -1
        else:
            continue
        if prev != 0 and cur != prev:
            count += 1
        prev = cur
    return count


def extrema_and_crossing_counts(double[::1] x):
    """(number of extrema, number of zero crossings) for the IMF check."""
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.intp_t[::1] max_buf = np.empty(n // 2 + 2, dtype=np.intp)
    cdef cnp.intp_t[::1] min_buf = np.empty(n // 2 + 2, dtype=np.intp)
    cdef Py_ssize_t n_max = 0, n_min = 0
    _scan_extrema(x, max_buf, min_buf, &n_max, &n_min)
    return int(n_max + n_min), int(count_zero_crossings(x))


cdef void _solve_natural(double[::1] t, double[::1] y, double[::1] m2,
                         double[::1] cp, double[::1] dp) noexcept:
    """Second derivatives of the natural spline (Thomas algorithm)."""
    cdef Py_ssize_t m = t.shape[0]
    cdef Py_ssize_t k = m - 2
    cdef Py_ssize_t j
    cdef double h_prev, h_next, diag, lower, upper, rhs, denom
    for j in range(m):
        m2[j] = 0.0
    if m < 3:
        return
    h_prev = t[1] - t[0]
    h_next = t[2] - t[1]
    diag = (h_prev + h_next) / 3.0
    cp[0] = (h_next / 6.0) / diag
    dp[0] = ((y[2] - y[1]) / h_next - (y[1] - y[0]) / h_prev) / diag
    for j in range(1, k):
        h_prev = t[j + 1] - t[j]
        h_next = t[j + 2] - t[j + 1]
        lower = h_prev / 6.0
        diag = (h_prev + h_next) / 3.0
        upper = h_next / 6.0
        rhs = (y[j + 2] - y[j + 1]) / h_next - (y[j + 1] - y[j]) / h_prev
        denom = diag - lower * cp[j - 1]
        cp[j] = upper / denom
        dp[j] = (rhs - lower * dp[j - 1]) / denom
    m2[k] = dp[k - 1]
    for j in range(k - 2, -1, -1):
        m2[j + 1] = dp[j] - cp[j] * m2[j + 2]


cdef void _add_envelope(double[::1] x, cnp.intp_t[::1] ext, double[::1] out,
                        double weight, double[::1] t, double[::1] y,
                        double[::1] m2, double[::1] cp, double[::1] dp) noexcept:
    """Accumulate weight * spline_envelope(x, ext) into out."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t n_ext = ext.shape[0]
    cdef Py_ssize_t m = n_ext + 4
    cdef Py_ssize_t i, j
    cdef double last = <double>(n - 1)
    cdef double u, hj, a, b

    # two mirrored knots on each side, reflected across the end samples
    t[0] = -<double>ext[1]
    y[0] = x[ext[1]]
    t[1] = -<double>ext[0]
    y[1] = x[ext[0]]
    for i in range(n_ext):
        t[2 + i] = <double>ext[i]
        y[2 + i] = x[ext[i]]
    t[m - 2] = 2.0 * last - <double>ext[n_ext - 1]
    y[m - 2] = x[ext[n_ext - 1]]
    t[m - 1] = 2.0 * last - <double>ext[n_ext - 2]
    y[m - 1] = x[ext[n_ext - 2]]

    _solve_natural(t[:m], y[:m], m2[:m], cp, dp)

    j = 0
    for i in range(n):
        u = <double>i
        while j < m - 2 and t[j + 1] <= u:
            j += 1
        hj = t[j + 1] - t[j]
        a = (t[j + 1] - u) / hj
        b = 1.0 - a
        out[i] += weight * (
            a * y[j]
            + b * y[j + 1]
            + ((a * a * a - a) * m2[j] + (b * b * b - b) * m2[j + 1]) * hj * hj / 6.0
        )


def envelope_mean(x):
    """Mean of the upper and lower spline envelopes of x.

    Returns ``(mean_envelope, n_maxima, n_minima)``; the envelope is None
    when either kind of extremum occurs fewer than twice.
    """
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0]
    cdef cnp.intp_t[::1] max_buf = np.empty(n // 2 + 2, dtype=np.intp)
    cdef cnp.intp_t[::1] min_buf = np.empty(n // 2 + 2, dtype=np.intp)
    cdef Py_ssize_t n_max = 0, n_min = 0
    _scan_extrema(xv, max_buf, min_buf, &n_max, &n_min)
    if n_max < 2 or n_min < 2:
        return None, int(n_max), int(n_min)

    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef Py_ssize_t m_cap = max(n_max, n_min) + 4
    cdef double[::1] t = np.empty(m_cap, dtype=np.float64)
    cdef double[::1] yk = np.empty(m_cap, dtype=np.float64)
    cdef double[::1] m2 = np.empty(m_cap, dtype=np.float64)
    cdef double[::1] cp = np.empty(m_cap, dtype=np.float64)
    cdef double[::1] dp = np.empty(m_cap, dtype=np.float64)

    _add_envelope(xv, max_buf[:n_max], out_v, 0.5, t, yk, m2, cp, dp)
    _add_envelope(xv, min_buf[:n_min], out_v, 0.5, t, yk, m2, cp, dp)
    return out, int(n_max), int(n_min)
