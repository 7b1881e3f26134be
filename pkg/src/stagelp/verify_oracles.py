"""Brute-force oracles that check the main pipeline by independent routes.

``dp_purchase_oracle`` solves the stochastic purchase model by backward
recursion over the tree without building an LP. ``enumerate_vertices``
solves tiny LPs by trying every basic solution.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import OracleError, SizeError
from .lp.problem import FEAS_TOL, LpProblem, Status
from .model import Relop
from .scenario_tree import ScenarioTree, TreeNode

PRICE = "V"
AMOUNT = "a"

PURCHASE_MODEL = """\
deterministic a: T;
stochastic x, s, objective_function: 0..T;
stochastic non_anticitpativity: 1..T;
stochastic root_stage: 0;
stochastic terminal_stage: T;

param a;
var x >= 0, s >= 0;

minimize objective_function: E(V * x);
subject to non_anticitpativity: s - s(-1) = x;
subject to root_stage: s = 0;
subject to terminal_stage: s = a;
"""


@dataclass(frozen=True)
class PurchaseInstance:
    tree: ScenarioTree
    amount: float

    @classmethod
    def from_tree(cls, tree: ScenarioTree) -> "PurchaseInstance":
        amount = tree.stage_params.get((AMOUNT, tree.horizon))
        if amount is None:
            raise OracleError(f"tree has no value for {AMOUNT!r} at stage {tree.horizon}")
        return cls(tree, amount)


def dp_purchase_oracle(inst: PurchaseInstance) -> float:
    """Optimal expected cost of buying ``amount`` units along the tree.

    With linear prices and inventory that can only grow from zero to the
    target, the whole amount is bought at one node per path, so the problem
    is optimal stopping. A node at stage 1..T-1 either buys at its own price
    or waits for the expected continuation value; terminal nodes must buy;
    the root cannot raise inventory and always waits.
    """
    tree = inst.tree
    if tree.horizon < 1:
        raise OracleError("purchase instances need a horizon of at least 1")
    value: dict[int, float] = {}
    for stage in range(tree.horizon, -1, -1):
        for n in tree.stage_index[stage]:
            price = None
            if stage >= 1:
                price = tree.param(PRICE, n)
                if price is None:
                    raise OracleError(f"node {n} at stage {stage} has no price {PRICE!r}")
            if stage == tree.horizon:
                value[n] = price
                continue
            cont = math.fsum(tree.nodes[c].cond_prob * value[c] for c in tree.children[n])
            value[n] = cont if stage == 0 else min(price, cont)
    return inst.amount * value[tree.root]


@dataclass(frozen=True)
class VertexResult:
    status: Status
    best_objective: float | None = None
    best_x: np.ndarray | None = None


MAX_ENUM_COLS = 10


def enumerate_vertices(p: LpProblem) -> VertexResult:
    """Minimum over all basic solutions of a small box-bounded LP.

    A vertex fixes every column at a bound except a set F, and makes |F|
    rows tight with a nonsingular submatrix on F. All such choices are tried,
    infeasible points are discarded, and the cheapest survivor wins.
    """
    n = p.n_cols
    if n > MAX_ENUM_COLS:
        raise SizeError(f"vertex enumeration supports at most {MAX_ENUM_COLS} columns, got {n}")
    lb, ub = p.bound_arrays()
    if not (np.all(np.isfinite(lb)) and np.all(np.isfinite(ub))):
        raise SizeError("vertex enumeration needs finite bounds on every column")
    a, b = p.dense()
    m = p.n_rows
    is_eq = np.array([r.relop is Relop.EQ for r in p.rows], dtype=bool)
    is_le = np.array([r.relop is Relop.LE for r in p.rows], dtype=bool)
    is_ge = np.array([r.relop is Relop.GE for r in p.rows], dtype=bool)

    best_val = math.inf
    best_x = None

    def consider(points: np.ndarray):
        nonlocal best_val, best_x
        if points.size == 0:
            return
        act = points @ a.T if m else np.zeros((len(points), 0))
        viol = np.zeros(len(points))
        if m:
            viol = np.maximum(viol, np.max(np.where(is_eq, np.abs(act - b), 0.0), axis=1))
            viol = np.maximum(viol, np.max(np.where(is_le, act - b, 0.0), axis=1))
            viol = np.maximum(viol, np.max(np.where(is_ge, b - act, 0.0), axis=1))
        viol = np.maximum(viol, np.max(np.maximum(lb - points, points - ub), axis=1))
        ok = viol <= FEAS_TOL
        if not ok.any():
            return
        vals = points[ok] @ p.objective + p.offset
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val = float(vals[k])
            best_x = points[ok][k].copy()

    cols = np.arange(n)
    for k in range(0, min(n, m) + 1):
        for free in itertools.combinations(range(n), k):
            free = list(free)
            fixed = [j for j in cols if j not in free]
            # every lower/upper pattern on the fixed columns
            combos = list(itertools.product((0, 1), repeat=len(fixed)))
            patterns = np.array(combos, dtype=bool).reshape(len(combos), len(fixed))
            fixed_vals = np.where(patterns, ub[fixed], lb[fixed]) if fixed else np.zeros((1, 0))
            base = np.zeros((len(fixed_vals), n))
            base[:, fixed] = fixed_vals
            if k == 0:
                consider(base)
                continue
            row_sets = np.array(list(itertools.combinations(range(m), k)))
            mats = a[row_sets][:, :, free]  # (R, k, k)
            dets = np.linalg.det(mats)
            good = np.abs(dets) > 1e-10
            if not good.any():
                continue
            mats = mats[good]
            rs = row_sets[good]
            # rhs for each row set and fixed pattern: b_R - A[R, fixed] x_fixed
            rhs = b[rs][:, :, None] - np.einsum("rkf,pf->rkp", a[rs][:, :, fixed], fixed_vals)
            sol = np.linalg.solve(mats, rhs)  # (R, k, P)
            pts = np.repeat(base[None, :, :], len(rs), axis=0)
            pts[:, :, free] = np.transpose(sol, (0, 2, 1))
            consider(pts.reshape(-1, n))
    if best_x is None:
        return VertexResult(Status.INFEASIBLE)
    return VertexResult(Status.OPTIMAL, best_val, best_x)


# -- seeded instance generators --------------------------------------------


def _split_probability(rng: np.random.Generator, k: int) -> list[float]:
    if k == 1:
        return [1.0]
    w = rng.uniform(0.2, 1.0, size=k)
    w = w / w.sum()
    probs = [float(v) for v in w[:-1]]
    probs.append(1.0 - math.fsum(probs))
    return probs


def random_tree(
    rng: np.random.Generator,
    horizon: int,
    max_branching: int = 3,
    price_range: tuple[float, float] = (1.0, 10.0),
    amount: float | None = None,
    chain: bool = False,
) -> ScenarioTree:
    """Random tree with a price ``V`` on every node and ``a`` at the horizon."""
    nodes = [TreeNode(0, 0, None, 1.0, {PRICE: float(rng.uniform(*price_range))})]
    frontier = [0]
    for stage in range(1, horizon + 1):
        nxt = []
        for parent in frontier:
            k = 1 if chain else int(rng.integers(1, max_branching + 1))
            for q in _split_probability(rng, k):
                nid = len(nodes)
                nodes.append(TreeNode(nid, stage, parent, q, {PRICE: float(rng.uniform(*price_range))}))
                nxt.append(nid)
        frontier = nxt
    stage_params = {} if amount is None else {(AMOUNT, horizon): float(amount)}
    return ScenarioTree(nodes, horizon, stage_params)


def random_purchase_instance(rng: np.random.Generator, max_horizon: int = 4, max_branching: int = 3) -> PurchaseInstance:
    horizon = int(rng.integers(1, max_horizon + 1))
    amount = float(rng.choice([1.0, 2.0]))
    return PurchaseInstance(random_tree(rng, horizon, max_branching, amount=amount), amount)


def random_lp(rng: np.random.Generator, max_cols: int = 6, max_rows: int = 6) -> LpProblem:
    """Small LP with integer-ish data and a finite box on every column."""
    from .lp.problem import Row

    n = int(rng.integers(1, max_cols + 1))
    m = int(rng.integers(0, max_rows + 1))
    c = rng.integers(-5, 6, size=n).astype(float)
    lo = rng.integers(-3, 2, size=n).astype(float)
    hi = lo + rng.integers(0, 5, size=n).astype(float)
    rows = []
    relops = [Relop.LE, Relop.LE, Relop.GE, Relop.EQ]
    for _ in range(m):
        coeffs = {}
        for j in range(n):
            if rng.random() < 0.7:
                v = float(rng.integers(-4, 5))
                if v:
                    coeffs[j] = v
        rows.append(Row(coeffs, relops[int(rng.integers(0, len(relops)))], float(rng.integers(-6, 9))))
    return LpProblem(n, c, rows, list(zip(lo.tolist(), hi.tolist())))
