"""Data types of the modeling layer.

A :class:`MetaModel` carries no stage indices in its expressions; stages are
attached afterwards through ``deterministic``/``stochastic`` declarations.
All types are frozen so models can be compared structurally and shared
between threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Union

StageAtom = Union[int, str]  # nonnegative int or the horizon symbol "T"
HORIZON_SYMBOL = "T"


class StageKind(enum.Enum):
    DETERMINISTIC = "deterministic"
    STOCHASTIC = "stochastic"


class Relop(enum.Enum):
    EQ = "="
    LE = "<="
    GE = ">="


class Sense(enum.Enum):
    MIN = "minimize"


@dataclass(frozen=True)
class StageSetExpr:
    lo: StageAtom
    hi: StageAtom | None = None

    def __str__(self):
        if self.hi is None:
            return str(self.lo)
        return f"{self.lo}..{self.hi}"


@dataclass(frozen=True)
class SymbolRef:
    name: str
    recourse_depth: int = 0


@dataclass(frozen=True)
class Term:
    coeff: float
    factors: tuple[SymbolRef, ...]


@dataclass(frozen=True)
class LinExpr:
    terms: tuple[Term, ...] = ()
    constant: float = 0.0
    expect: bool = False

    def refs(self) -> Iterator[SymbolRef]:
        for term in self.terms:
            yield from term.factors


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Var:
    name: str
    lb: float = -math.inf
    ub: float = math.inf


@dataclass(frozen=True)
class Objective:
    name: str
    expr: LinExpr
    sense: Sense = Sense.MIN


@dataclass(frozen=True)
class Constraint:
    name: str
    lhs: LinExpr
    relop: Relop
    rhs: LinExpr


@dataclass(frozen=True)
class StageDecl:
    kind: StageKind
    object_names: tuple[str, ...]
    stage_set: StageSetExpr


@dataclass(frozen=True)
class MetaModel:
    params: tuple[Param, ...] = ()
    vars: tuple[Var, ...] = ()
    objective: Objective | None = None
    constraints: tuple[Constraint, ...] = ()
    stage_decls: tuple[StageDecl, ...] = field(default=())

    def expressions(self) -> Iterator[tuple[str, LinExpr]]:
        """Yield ``(owner name, expression)`` for every expression in the model."""
        if self.objective is not None:
            yield self.objective.name, self.objective.expr
        for con in self.constraints:
            yield con.name, con.lhs
            yield con.name, con.rhs

    @property
    def implicit_params(self) -> tuple[str, ...]:
        """Identifiers used in expressions but never declared, in first-use order."""
        declared = {p.name for p in self.params} | {v.name for v in self.vars}
        seen: dict[str, None] = {}
        for _, expr in self.expressions():
            for ref in expr.refs():
                if ref.name not in declared:
                    seen.setdefault(ref.name)
        return tuple(seen)

    def var(self, name: str) -> Var | None:
        for v in self.vars:
            if v.name == name:
                return v
        return None
