"""Stage resolution, model validation and the programmatic builder.

The horizon ``T`` never appears in model text; it is bound here, when a model
is validated against a concrete horizon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Iterable, Mapping

from .dsl_parser import parse_objective_text, parse_relation_text, parse_stage_set_text
from .errors import DuplicateName, StageError, ValidationError, ValidationIssue
from .model import (
    HORIZON_SYMBOL,
    Constraint,
    LinExpr,
    MetaModel,
    Objective,
    Param,
    StageDecl,
    StageKind,
    StageSetExpr,
    Var,
)


def _atom_value(atom, horizon: int) -> int:
    return horizon if atom == HORIZON_SYMBOL else int(atom)


def resolve_stage_set(e: StageSetExpr, horizon: int) -> tuple[int, ...]:
    """Expand a stage-set expression into the sorted tuple of stages it covers."""
    if horizon < 0:
        raise StageError(f"horizon must be nonnegative, got {horizon}")
    lo = _atom_value(e.lo, horizon)
    hi = lo if e.hi is None else _atom_value(e.hi, horizon)
    if lo > hi:
        raise StageError(f"stage set {e} is empty for T={horizon} ({lo} > {hi})")
    if lo < 0 or hi > horizon:
        raise StageError(f"stage set {e} leaves [0, {horizon}]")
    return tuple(range(lo, hi + 1))


def _annotation_stages(e: StageSetExpr, horizon: int) -> tuple[int, ...]:
    # a range such as 1..T collapses to nothing on a short horizon; the
    # annotated object then simply has no instances
    if e.hi is not None:
        lo, hi = _atom_value(e.lo, horizon), _atom_value(e.hi, horizon)
        if lo > hi and 0 <= hi <= horizon:
            return ()
    return resolve_stage_set(e, horizon)


@dataclass(frozen=True)
class Resolved:
    kind: StageKind
    stages: tuple[int, ...]


@dataclass(frozen=True)
class ValidatedModel:
    model: MetaModel
    horizon: int
    resolved: Mapping[str, Resolved] = field(compare=False)
    implicit_params: tuple[str, ...] = ()

    def __eq__(self, other):
        if not isinstance(other, ValidatedModel):
            return NotImplemented
        return (
            self.model == other.model
            and self.horizon == other.horizon
            and dict(self.resolved) == dict(other.resolved)
            and self.implicit_params == other.implicit_params
        )

    def __hash__(self):
        return hash((self.model, self.horizon))

    def stages(self, name: str) -> tuple[int, ...]:
        return self.resolved[name].stages

    def kind(self, name: str) -> StageKind:
        return self.resolved[name].kind

    def is_param(self, name: str) -> bool:
        return self.model.var(name) is None


def validate_model(m: MetaModel, horizon: int) -> ValidatedModel:
    """Resolve every stage annotation and check the model is expandable.

    Collects all problems before raising :class:`ValidationError`.
    """
    issues: list[ValidationIssue] = []
    if horizon < 0:
        raise ValidationError([ValidationIssue("T", f"horizon must be nonnegative, got {horizon}")])

    params = {p.name for p in m.params}
    implicit = m.implicit_params
    variables = {v.name: v for v in m.vars}
    constraints = {c.name for c in m.constraints}
    objective_name = m.objective.name if m.objective is not None else None

    categories: dict[str, list[str]] = {}
    for name in params:
        categories.setdefault(name, []).append("parameter")
    for name in variables:
        categories.setdefault(name, []).append("variable")
    for name in constraints:
        categories.setdefault(name, []).append("constraint")
    if objective_name is not None:
        categories.setdefault(objective_name, []).append("objective")
    for name, cats in categories.items():
        if len(cats) > 1:
            issues.append(ValidationIssue(name, f"name used by several objects ({', '.join(cats)})"))
    known = set(categories) | set(implicit)

    if m.objective is None:
        issues.append(ValidationIssue("<model>", "model has no objective"))

    for v in m.vars:
        if v.lb > v.ub:
            issues.append(ValidationIssue(v.name, f"lower bound {v.lb} exceeds upper bound {v.ub}"))

    resolved: dict[str, Resolved] = {}
    for decl in m.stage_decls:
        try:
            stages = _annotation_stages(decl.stage_set, horizon)
        except StageError as exc:
            for name in decl.object_names:
                issues.append(ValidationIssue(name, str(exc)))
            continue
        for name in decl.object_names:
            if name not in known:
                issues.append(ValidationIssue(name, "annotation references unknown object"))
            elif name in resolved:
                issues.append(ValidationIssue(name, "object annotated more than once"))
            else:
                resolved[name] = Resolved(decl.kind, stages)

    required = list(variables) + [c.name for c in m.constraints]
    if objective_name is not None:
        required.append(objective_name)
    for name in required:
        if name not in resolved:
            issues.append(ValidationIssue(name, "object has no stage annotation"))

    def param_stages(name: str) -> tuple[int, ...] | None:
        r = resolved.get(name)
        return None if r is None else r.stages

    def check_expr(owner: str, expr: LinExpr, stages: tuple[int, ...]):
        for term in expr.terms:
            n_vars = sum(1 for f in term.factors if f.name in variables)
            if n_vars > 1:
                names = " * ".join(f.name for f in term.factors)
                issues.append(ValidationIssue(owner, f"bilinear term {names} multiplies two variables"))
            for ref in term.factors:
                if ref.name not in variables:
                    if ref.recourse_depth > 0:
                        issues.append(ValidationIssue(owner, f"recourse reference {ref.name}(-{ref.recourse_depth}) on parameter"))
                    defined = param_stages(ref.name)
                    if defined is not None and stages:
                        missing = sorted(set(stages) - set(defined))
                        if missing:
                            issues.append(ValidationIssue(owner, f"parameter {ref.name} is not defined at stage(s) {missing}"))
                    continue
                if not stages:
                    continue
                if min(stages) - ref.recourse_depth < 0:
                    issues.append(ValidationIssue(owner, f"recourse depth exceeds root: {ref.name}(-{ref.recourse_depth}) at stage {min(stages)}"))
                    continue
                defined = param_stages(ref.name)
                if defined is None:
                    continue
                needed = {s - ref.recourse_depth for s in stages}
                missing = sorted(needed - set(defined))
                if missing:
                    label = ref.name if ref.recourse_depth == 0 else f"{ref.name}(-{ref.recourse_depth})"
                    issues.append(ValidationIssue(owner, f"variable {label} refers to stage(s) {missing} where {ref.name} is not defined"))

    def owner_stages(name: str) -> tuple[int, ...]:
        r = resolved.get(name)
        return () if r is None else r.stages

    if m.objective is not None:
        obj = m.objective
        check_expr(obj.name, obj.expr, owner_stages(obj.name))
        r = resolved.get(obj.name)
        if r is not None and r.kind is StageKind.STOCHASTIC and r.stages != (0,) and not obj.expr.expect:
            issues.append(ValidationIssue(obj.name, "stochastic objective must be wrapped in E()"))
    for c in m.constraints:
        check_expr(c.name, c.lhs, owner_stages(c.name))
        check_expr(c.name, c.rhs, owner_stages(c.name))

    if issues:
        raise ValidationError(issues)
    return ValidatedModel(m, horizon, MappingProxyType(resolved), implicit)


class ModelBuilder:
    """Assemble a :class:`MetaModel` one call at a time.

    Method names follow the modeling statements: ``parameter``, ``variable``,
    ``minimize``, ``subject_to``, ``deterministic``, ``stochastic``.
    Expression arguments are model-language text.
    """

    def __init__(self):
        self._params: list[Param] = []
        self._vars: list[Var] = []
        self._objective: Objective | None = None
        self._constraints: list[Constraint] = []
        self._decls: list[StageDecl] = []

    def parameter(self, *names: str) -> "ModelBuilder":
        for name in names:
            if any(p.name == name for p in self._params):
                raise DuplicateName("parameter", name)
            self._params.append(Param(name))
        return self

    def variable(self, name: str, lb: float | None = None, ub: float | None = None) -> "ModelBuilder":
        if any(v.name == name for v in self._vars):
            raise DuplicateName("variable", name)
        self._vars.append(Var(name, -math.inf if lb is None else float(lb), math.inf if ub is None else float(ub)))
        return self

    def minimize(self, name: str, expr: str) -> "ModelBuilder":
        if self._objective is not None:
            raise DuplicateName("objective", name)
        self._objective = Objective(name, parse_objective_text(expr))
        return self

    def subject_to(self, name: str, relation: str) -> "ModelBuilder":
        if any(c.name == name for c in self._constraints):
            raise DuplicateName("constraint", name)
        lhs, relop, rhs = parse_relation_text(relation)
        self._constraints.append(Constraint(name, lhs, relop, rhs))
        return self

    def deterministic(self, stage_set: str, *names: str) -> "ModelBuilder":
        self._decls.append(StageDecl(StageKind.DETERMINISTIC, tuple(names), parse_stage_set_text(stage_set)))
        return self

    def stochastic(self, stage_set: str, *names: str) -> "ModelBuilder":
        self._decls.append(StageDecl(StageKind.STOCHASTIC, tuple(names), parse_stage_set_text(stage_set)))
        return self

    def build(self) -> MetaModel:
        return MetaModel(tuple(self._params), tuple(self._vars), self._objective, tuple(self._constraints), tuple(self._decls))


def build_model(calls: Iterable[tuple[Any, ...]]) -> MetaModel:
    """Replay ``(method, *args)`` tuples on a fresh :class:`ModelBuilder`.

    A trailing dict in a tuple is passed as keyword arguments, so
    ``("variable", "x", {"lb": 0})`` mirrors ``variable(m, x, lb=0)``.
    """
    builder = ModelBuilder()
    for call in calls:
        method, *args = call
        kwargs = args.pop() if args and isinstance(args[-1], dict) else {}
        getattr(builder, method)(*args, **kwargs)
    return builder.build()
