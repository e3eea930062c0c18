# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the NumPy kernels in ``_kernels_py``.

Same enumeration order, same candidate sets, same running-sum arithmetic
(the extension is compiled with FP contraction off so stump correlations
match the NumPy backend bit for bit).
"""

from libc.math cimport erfc, exp, sqrt

NAME = "cython"

cdef double SQRT2 = sqrt(2.0)


cdef inline double _normal_cdf(double x) nogil:
    return 0.5 * erfc(-x / SQRT2)


def signed_coordinate_scan(double[:, ::1] X, double[::1] wy):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t d = X.shape[1]
    cdef Py_ssize_t i, j
    cdef double c, best = -1.0 / 0.0
    cdef Py_ssize_t best_i = 0
    cdef int best_sign = 1
    for i in range(d):
        c = 0.0
        for j in range(n):
            c += wy[j] * X[j, i]
        if c > best:
            best = c
            best_i = i
            best_sign = 1
        if -c > best:
            best = -c
            best_i = i
            best_sign = -1
    return best, best_i, best_sign


def stump_scan(double[:, ::1] sorted_vals, double[:, ::1] wy_sorted):
    cdef Py_ssize_t n = sorted_vals.shape[0]
    cdef Py_ssize_t d = sorted_vals.shape[1]
    cdef Py_ssize_t i, k
    cdef double cum, total, corr
    cdef double best = -1.0 / 0.0
    cdef Py_ssize_t best_i = 0, best_k = 0
    cdef int best_pol = 1
    for i in range(d):
        total = 0.0
        for k in range(n):
            total += wy_sorted[k, i]
        cum = 0.0
        for k in range(n + 1):
            # split between positions k-1 and k; skip ties inside a run
            if k > 0:
                cum += wy_sorted[k - 1, i]
            if 0 < k < n and sorted_vals[k - 1, i] == sorted_vals[k, i]:
                continue
            corr = total - 2.0 * cum if k > 0 else total
            if corr > best:
                best = corr
                best_i = i
                best_k = k
                best_pol = 1
            if -corr > best:
                best = -corr
                best_i = i
                best_k = k
                best_pol = -1
    return best, best_i, best_k, best_pol


def step_residuals(double[::1] margins, double[::1] yh, double t, double dt,
                   double dm, double theta, double rho, double sigma_f):
    cdef Py_ssize_t n = margins.shape[0]
    cdef Py_ssize_t j
    cdef double t2 = t + dt
    if t2 > 1.0:
        t2 = 1.0
    cdef double decay = exp(-dt)
    cdef double s2 = (sigma_f * sigma_f + 1.0) * exp(2.0 * (1.0 - t2)) - 1.0
    cdef double s = sqrt(s2)
    cdef double center = (theta - 2.0 * rho) * exp(1.0 - t2) + 2.0 * rho
    cdef double r1 = 0.0, phi = 0.0, mp, dev
    for j in range(n):
        mp = margins[j] * decay + yh[j] * dm
        dev = mp - center
        r1 += yh[j] * exp(-(dev * dev) / (2.0 * s2))
        phi += _normal_cdf(-dev / s)
    return r1, phi
