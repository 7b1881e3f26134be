"""Pure-Python bounded-variable primal simplex kernel.

Mirrors ``_kernel_ext.pyx`` step for step; used when the compiled extension
is unavailable or ``STAGELP_PURE_PYTHON`` is set.

All arrays are modified in place:

``tab``       m x n tableau ``B^-1 A``
``d``         reduced costs, length n
``values``    current values of the basic variables, length m
``ub``        upper bounds (lower bounds are all zero), ``inf`` allowed
``basis``     column index basic in each row
``pos``       row of each column if basic, else -1
``at_upper``  1 where a nonbasic column sits at its upper bound
``eligible``  0 for columns that may never enter the basis
"""

from __future__ import annotations

import math

import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2

_TIE = 1e-12


def run_simplex(tab, d, values, ub, basis, pos, at_upper, eligible, max_iter, pivot_tol, bland_after):
    """Iterate until optimal, unbounded or out of iterations.

    Returns ``(status, iterations)``.
    """
    m, n = tab.shape
    degenerate_run = 0
    iterations = 0
    while iterations < max_iter:
        use_bland = degenerate_run >= bland_after

        # pricing: nonbasic at lower improves when d < 0, at upper when d > 0
        score = np.where(at_upper.astype(bool), d, -d)
        candidates = (pos < 0) & eligible.astype(bool) & (score > pivot_tol)
        if not candidates.any():
            return OPTIMAL, iterations
        if use_bland:
            q = int(np.flatnonzero(candidates)[0])
        else:
            q = int(np.argmax(np.where(candidates, score, -np.inf)))
        sigma = -1.0 if at_upper[q] else 1.0

        # ratio test: bound flip of the entering column is the default step;
        # a row wins only when strictly shorter, ties within _TIE go to the
        # smallest basic index (Bland) or the largest pivot magnitude
        step = ub[q]
        r = -1
        if m:
            alpha = sigma * tab[:, q]
            ub_basic = ub[basis]
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(
                    alpha > pivot_tol,
                    values / alpha,
                    np.where((alpha < -pivot_tol) & np.isfinite(ub_basic), (ub_basic - values) / -alpha, np.inf),
                )
            np.maximum(t, 0.0, out=t)
            t_min = t.min()
            if t_min < step:
                ties = np.flatnonzero(t <= t_min + _TIE)
                if use_bland:
                    r = int(ties[np.argmin(basis[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(alpha[ties]))])
                step = t[r]

        if r < 0 and step == math.inf:
            return UNBOUNDED, iterations

        if step <= _TIE:
            degenerate_run += 1
        else:
            degenerate_run = 0
        iterations += 1

        if m and step != 0.0:
            values -= (sigma * step) * tab[:, q]
        if r < 0:
            at_upper[q] = 0 if at_upper[q] else 1
            continue

        leaving = basis[r]
        leaving_at_upper = 1 if sigma * tab[r, q] < 0.0 else 0
        entering_value = (ub[q] if at_upper[q] else 0.0) + sigma * step

        tab[r] /= tab[r, q]
        col = tab[:, q].copy()
        col[r] = 0.0
        nz = np.flatnonzero(col)
        if nz.size:
            tab[nz] -= np.outer(col[nz], tab[r])
        dq = d[q]
        if dq != 0.0:
            d -= dq * tab[r]
        tab[nz, q] = 0.0
        tab[r, q] = 1.0
        d[q] = 0.0

        values[r] = entering_value
        basis[r] = q
        pos[q] = r
        pos[leaving] = -1
        at_upper[leaving] = leaving_at_upper
        at_upper[q] = 0
    return ITERATION_LIMIT, iterations
