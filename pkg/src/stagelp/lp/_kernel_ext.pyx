# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled bounded-variable primal simplex kernel.

Same contract and pivot rules as ``_kernel_py.run_simplex``.
"""

from libc.math cimport INFINITY, fabs
from libc.stdint cimport int64_t

import numpy as np

cdef double TIE = 1e-12

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2


def run_simplex(double[:, ::1] tab, double[::1] d, double[::1] values, double[::1] ub,
                int64_t[::1] basis, int64_t[::1] pos, unsigned char[::1] at_upper,
                unsigned char[::1] eligible, int64_t max_iter, double pivot_tol, int64_t bland_after):
    cdef Py_ssize_t m = tab.shape[0]
    cdef Py_ssize_t n = tab.shape[1]
    cdef Py_ssize_t i, j, q, r, leaving
    cdef int64_t iterations = 0
    cdef int64_t degenerate_run = 0
    cdef bint use_bland
    cdef double score, best, sigma, step, a, t, t_min, u, best_key, key
    cdef double entering_value, p, f, dq
    cdef unsigned char leaving_at_upper
    cdef double[::1] ratios = np.empty(m, dtype=np.float64)
    cdef double[::1] alpha = np.empty(m, dtype=np.float64)

    while iterations < max_iter:
        use_bland = degenerate_run >= bland_after

        q = -1
        best = pivot_tol
        for j in range(n):
            if pos[j] >= 0 or not eligible[j]:
                continue
            score = d[j] if at_upper[j] else -d[j]
            if score > best:
                q = j
                if use_bland:
                    break
                best = score
        if q < 0:
            return OPTIMAL, iterations
        sigma = -1.0 if at_upper[q] else 1.0

        step = ub[q]
        r = -1
        if m > 0:
            t_min = INFINITY
            for i in range(m):
                a = sigma * tab[i, q]
                alpha[i] = a
                t = INFINITY
                if a > pivot_tol:
                    t = values[i] / a
                elif a < -pivot_tol:
                    u = ub[basis[i]]
                    if u != INFINITY:
                        t = (u - values[i]) / -a
                if t < 0.0:
                    t = 0.0
                ratios[i] = t
                if t < t_min:
                    t_min = t
            if t_min < step:
                best_key = INFINITY
                for i in range(m):
                    if ratios[i] <= t_min + TIE:
                        if use_bland:
                            key = <double>basis[i]
                        else:
                            key = -fabs(alpha[i])
                        if key < best_key:
                            best_key = key
                            r = i
                step = ratios[r]

        if r < 0 and step == INFINITY:
            return UNBOUNDED, iterations

        if step <= TIE:
            degenerate_run += 1
        else:
            degenerate_run = 0
        iterations += 1

        if step != 0.0:
            for i in range(m):
                values[i] -= sigma * step * tab[i, q]
        if r < 0:
            at_upper[q] = 0 if at_upper[q] else 1
            continue

        leaving = basis[r]
        leaving_at_upper = 1 if sigma * tab[r, q] < 0.0 else 0
        entering_value = (ub[q] if at_upper[q] else 0.0) + sigma * step

        p = tab[r, q]
        for j in range(n):
            tab[r, j] /= p
        for i in range(m):
            if i == r:
                continue
            f = tab[i, q]
            if f != 0.0:
                for j in range(n):
                    tab[i, j] -= f * tab[r, j]
                tab[i, q] = 0.0
        dq = d[q]
        if dq != 0.0:
            for j in range(n):
                d[j] -= dq * tab[r, j]
        tab[r, q] = 1.0
        d[q] = 0.0

        values[r] = entering_value
        basis[r] = q
        pos[q] = r
        pos[leaving] = -1
        at_upper[leaving] = leaving_at_upper
        at_upper[q] = 0
    return ITERATION_LIMIT, iterations
