"""Two-phase dense-tableau simplex with bounded variables.

Columns are shifted or split so every internal variable has lower bound 0;
rows get slacks and, where no slack can start basic, artificials. Phase 1
minimizes the artificial sum; phase 2 fixes artificials at zero and
optimizes the real objective from the phase-1 basis.

The pivot loop runs in the compiled kernel when it is importable and in the
numpy kernel otherwise. Set ``STAGELP_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from ..errors import IterationLimit
from ..model import Relop
from . import _kernel_py
from .problem import FEAS_TOL, LpProblem, LpSolution, Status, check_solution

PIVOT_TOL = 1e-9
PHASE1_TOL = 1e-9
BLAND_AFTER = 50
MAX_PIVOTS = 10**6

KERNELS = {"python": _kernel_py.run_simplex}
if not os.environ.get("STAGELP_PURE_PYTHON"):
    try:
        from . import _kernel_ext
    except ImportError:  # extension not built
        pass
    else:
        KERNELS["cython"] = _kernel_ext.run_simplex
BACKEND = "cython" if "cython" in KERNELS else "python"


@dataclass
class _StandardForm:
    a: np.ndarray  # m x n_total, rows sign-normalized so rhs >= 0
    b: np.ndarray
    cost: np.ndarray
    ub: np.ndarray
    n_struct: int  # structural columns precede slacks and artificials
    artificial: np.ndarray  # bool mask
    basis: np.ndarray
    # original column j = shift[j] + sum(sign * x'[k] for (k, sign) in cols[j])
    shift: np.ndarray
    cols: list[list[tuple[int, float]]]


def _standardize(p: LpProblem) -> _StandardForm:
    shift = np.zeros(p.n_cols)
    cols: list[list[tuple[int, float]]] = []
    std_ub: list[float] = []
    for j, (lb, ub) in enumerate(p.bounds):
        if math.isfinite(lb):
            shift[j] = lb
            cols.append([(len(std_ub), 1.0)])
            std_ub.append(ub - lb)
        elif math.isfinite(ub):
            shift[j] = ub
            cols.append([(len(std_ub), -1.0)])
            std_ub.append(math.inf)
        else:
            cols.append([(len(std_ub), 1.0), (len(std_ub) + 1, -1.0)])
            std_ub += [math.inf, math.inf]
    n_struct = len(std_ub)
    m = p.n_rows

    a_orig, b_orig = p.dense()
    a_struct = np.zeros((m, n_struct))
    cost_struct = np.zeros(n_struct)
    for j, parts in enumerate(cols):
        for k, sign in parts:
            if m:
                a_struct[:, k] = sign * a_orig[:, j]
            cost_struct[k] = sign * p.objective[j]
    b = b_orig - a_orig @ shift if m else np.zeros(0)

    slack_sign = np.array([{Relop.LE: 1.0, Relop.GE: -1.0, Relop.EQ: 0.0}[row.relop] for row in p.rows])
    flip = np.where(b < 0, -1.0, 1.0)
    a_struct *= flip[:, None]
    b = b * flip
    slack_sign = slack_sign * flip

    slack_rows = np.flatnonzero(slack_sign != 0)
    n_slack = len(slack_rows)
    art_rows = np.flatnonzero(slack_sign <= 0)
    n_art = len(art_rows)
    n_total = n_struct + n_slack + n_art

    a = np.zeros((m, n_total))
    a[:, :n_struct] = a_struct
    basis = np.full(m, -1, dtype=np.int64)
    for k, i in enumerate(slack_rows):
        a[i, n_struct + k] = slack_sign[i]
        if slack_sign[i] > 0:
            basis[i] = n_struct + k
    for k, i in enumerate(art_rows):
        col = n_struct + n_slack + k
        a[i, col] = 1.0
        basis[i] = col

    cost = np.zeros(n_total)
    cost[:n_struct] = cost_struct
    ub = np.concatenate([np.array(std_ub), np.full(n_slack + n_art, math.inf)])
    artificial = np.zeros(n_total, dtype=bool)
    artificial[n_struct + n_slack:] = True
    return _StandardForm(a, b, cost, ub, n_struct, artificial, basis, shift, cols)


def _reduced_costs(tab, cost, basis):
    return cost - cost[basis] @ tab if len(basis) else cost.copy()


def _point(ub, values, basis, at_upper) -> np.ndarray:
    x = np.where(at_upper.astype(bool), ub, 0.0)
    x[basis] = values
    return x


def _refine(sf: _StandardForm, x: np.ndarray, basis) -> np.ndarray:
    """Recompute basic values from the original rows to shed pivot round-off."""
    if not len(basis):
        return x
    nonbasic = np.ones(len(x), dtype=bool)
    nonbasic[basis] = False
    rhs = sf.b - sf.a[:, nonbasic] @ x[nonbasic]
    try:
        xb = np.linalg.solve(sf.a[:, basis], rhs)
    except np.linalg.LinAlgError:
        return x
    refined = x.copy()
    refined[basis] = xb
    if np.max(np.abs(sf.a @ refined - sf.b)) <= np.max(np.abs(sf.a @ x - sf.b)):
        return refined
    return x


def solve(p: LpProblem, backend: str | None = None) -> LpSolution:
    """Solve ``p`` to optimality or classify it as infeasible or unbounded."""
    run = KERNELS[backend or BACKEND]
    sf = _standardize(p)
    m, n = sf.a.shape
    tab = np.array(sf.a, dtype=np.float64, order="C")  # pivoted in place
    values = sf.b.astype(np.float64).copy()
    ub = np.array(sf.ub, dtype=np.float64)
    basis = sf.basis.copy()
    pos = np.full(n, -1, dtype=np.int64)
    pos[basis] = np.arange(m)
    at_upper = np.zeros(n, dtype=np.uint8)
    eligible = np.ones(n, dtype=np.uint8)
    total = 0

    if sf.artificial.any():
        phase1_cost = sf.artificial.astype(float)
        d = _reduced_costs(tab, phase1_cost, basis)
        status, its = run(tab, d, values, ub, basis, pos, at_upper, eligible, MAX_PIVOTS, PIVOT_TOL, BLAND_AFTER)
        total += its
        if status == _kernel_py.ITERATION_LIMIT:
            raise IterationLimit(f"phase 1 exceeded {MAX_PIVOTS} pivots")
        infeasibility = float(phase1_cost @ _point(ub, values, basis, at_upper))
        if infeasibility > PHASE1_TOL:
            return LpSolution(Status.INFEASIBLE, iterations=total)
        ub[sf.artificial] = 0.0
        eligible[sf.artificial] = 0
        at_upper[sf.artificial] = 0
        basic_art = sf.artificial[basis]
        values[basic_art] = np.clip(values[basic_art], 0.0, 0.0)

    d = _reduced_costs(tab, sf.cost, basis)
    status, its = run(tab, d, values, ub, basis, pos, at_upper, eligible, MAX_PIVOTS - total, PIVOT_TOL, BLAND_AFTER)
    total += its
    if status == _kernel_py.ITERATION_LIMIT:
        raise IterationLimit(f"exceeded {MAX_PIVOTS} pivots")
    if status == _kernel_py.UNBOUNDED:
        return LpSolution(Status.UNBOUNDED, iterations=total)

    xs = _refine(sf, _point(ub, values, basis, at_upper), basis)
    xs = np.clip(xs, 0.0, ub)
    x = sf.shift.copy()
    for j, parts in enumerate(sf.cols):
        for k, sign in parts:
            x[j] += sign * xs[k]
    check = check_solution(p, x)
    return LpSolution(Status.OPTIMAL, x, p.value(x), check.max_residual, total)


__all__ = ["solve", "BACKEND", "KERNELS", "FEAS_TOL"]
