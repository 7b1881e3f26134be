"""LP data structures and solution verification."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from ..errors import DimensionError
from ..model import Relop

FEAS_TOL = 1e-8


class Status(enum.Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


@dataclass(frozen=True)
class Row:
    coeffs: Mapping[int, float]
    relop: Relop
    rhs: float


@dataclass
class LpProblem:
    """Minimize ``objective @ x + offset`` subject to rows and column bounds."""

    n_cols: int
    objective: np.ndarray
    rows: list[Row] = field(default_factory=list)
    bounds: list[tuple[float, float]] = field(default_factory=list)
    offset: float = 0.0

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        if self.objective.shape[0] != self.n_cols:
            raise DimensionError(f"objective has {self.objective.shape[0]} entries for {self.n_cols} columns")
        if not self.bounds:
            self.bounds = [(0.0, math.inf)] * self.n_cols
        if len(self.bounds) != self.n_cols:
            raise DimensionError(f"{len(self.bounds)} bounds for {self.n_cols} columns")
        for j, (lb, ub) in enumerate(self.bounds):
            if lb > ub:
                raise ValueError(f"column {j}: lower bound {lb} exceeds upper bound {ub}")
        for i, row in enumerate(self.rows):
            for j in row.coeffs:
                if not 0 <= j < self.n_cols:
                    raise DimensionError(f"row {i} references column {j} of {self.n_cols}")

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        """Constraint matrix and right-hand side as dense arrays."""
        a = np.zeros((self.n_rows, self.n_cols))
        for i, row in enumerate(self.rows):
            for j, v in row.coeffs.items():
                a[i, j] += v
        return a, np.array([row.rhs for row in self.rows], dtype=float)

    def bound_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        lb = np.array([b[0] for b in self.bounds], dtype=float)
        ub = np.array([b[1] for b in self.bounds], dtype=float)
        return lb, ub

    def value(self, x: Sequence[float]) -> float:
        return float(np.dot(self.objective, np.asarray(x, dtype=float)) + self.offset)


@dataclass(frozen=True)
class LpSolution:
    status: Status
    x: np.ndarray | None = None
    objective_value: float | None = None
    max_residual: float | None = None
    iterations: int = 0


@dataclass(frozen=True)
class SolutionCheck:
    feasible: bool
    max_residual: float


def check_solution(p: LpProblem, x: Sequence[float]) -> SolutionCheck:
    """Largest violation over all rows and bounds at point ``x``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != p.n_cols:
        raise DimensionError(f"point has {x.shape[0]} entries for {p.n_cols} columns")
    worst = 0.0
    for row in p.rows:
        activity = math.fsum(v * x[j] for j, v in row.coeffs.items())
        if row.relop is Relop.EQ:
            viol = abs(activity - row.rhs)
        elif row.relop is Relop.LE:
            viol = max(0.0, activity - row.rhs)
        else:
            viol = max(0.0, row.rhs - activity)
        worst = max(worst, viol)
    if p.n_cols:
        lb, ub = p.bound_arrays()
        with np.errstate(invalid="ignore"):
            low = np.max(np.where(np.isfinite(lb), lb - x, 0.0))
            high = np.max(np.where(np.isfinite(ub), x - ub, 0.0))
        worst = max(worst, float(low), float(high))
    return SolutionCheck(worst <= FEAS_TOL, worst)
