"""Expansion of a validated model over a scenario tree into one LP.

Two layouts are produced:

* node form: one column per (variable, tree node); non-anticipativity holds
  because every scenario through a node shares that node's column.
* scenario form: every root-to-leaf path owns a full copy of each variable's
  history, and explicit equality rows tie copies together wherever scenarios
  share history.

Both realize ``E()`` as the probability-weighted sum of the objective over
the nodes of its stage set, so their optimal values must coincide.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ExpansionError, MissingParam, RecourseError
from .lp.problem import LpProblem, Row
from .meta_model import ValidatedModel
from .model import LinExpr, Relop, StageKind
from .scenario_tree import ScenarioTree

NONANT_PREFIX = "nonant"


@dataclass(frozen=True)
class ColumnKey:
    """Identity of one LP column.

    ``node`` is None for deterministic variables (one column per stage);
    ``scenario`` (a leaf id) is set only in the scenario form.
    """

    var: str
    stage: int
    node: int | None = None
    scenario: int | None = None

    def lp_name(self) -> str:
        if self.scenario is not None:
            return f"{self.var}__s{self.scenario}_t{self.stage}"
        if self.node is None:
            return f"{self.var}__t{self.stage}"
        return f"{self.var}__n{self.node}"


@dataclass(frozen=True)
class RowKey:
    constraint: str
    stage: int
    node: int | None = None
    scenario: int | None = None

    def lp_name(self) -> str:
        return ColumnKey(self.constraint, self.stage, self.node, self.scenario).lp_name()


class ColumnMap:
    def __init__(self, keys: list[ColumnKey]):
        self.reverse: tuple[ColumnKey, ...] = tuple(keys)
        self.forward: dict[ColumnKey, int] = {k: i for i, k in enumerate(keys)}
        if len(self.forward) != len(self.reverse):
            raise ExpansionError("duplicate column keys")

    def __len__(self):
        return len(self.reverse)

    def __getitem__(self, key: ColumnKey) -> int:
        return self.forward[key]

    def get(self, key: ColumnKey) -> int | None:
        return self.forward.get(key)


@dataclass
class ExpandedModel:
    lp: LpProblem
    columns: ColumnMap
    row_labels: list[RowKey]
    form: str = "node"
    nonant_rows: int = 0

    def column_names(self) -> list[str]:
        return [k.lp_name() for k in self.columns.reverse]

    def row_names(self) -> list[str]:
        return [k.lp_name() for k in self.row_labels]


def _check_horizon(m: ValidatedModel, t: ScenarioTree):
    if m.horizon != t.horizon:
        raise ExpansionError(f"model horizon T={m.horizon} does not match tree horizon T={t.horizon}")


def _is_deterministic(m: ValidatedModel, name: str) -> bool:
    r = m.resolved.get(name)
    return r is not None and r.kind is StageKind.DETERMINISTIC


def node_column_map(m: ValidatedModel, t: ScenarioTree) -> ColumnMap:
    """Node-form columns: grouped by variable in declaration order, then node id."""
    keys: list[ColumnKey] = []
    for v in m.model.vars:
        stages = m.stages(v.name)
        if _is_deterministic(m, v.name):
            keys.extend(ColumnKey(v.name, s) for s in stages)
        else:
            for s in stages:
                keys.extend(ColumnKey(v.name, s, n) for n in t.stage_index[s])
    order = {v.name: i for i, v in enumerate(m.model.vars)}
    keys.sort(key=lambda k: (order[k.var], -1 if k.node is None else k.node, k.stage))
    return ColumnMap(keys)


def resolve_recourse_ref(
    m: ValidatedModel, t: ScenarioTree, var: str, node: int, depth: int, columns: ColumnMap | None = None
) -> int:
    """Column of ``var`` at the ancestor ``depth`` stages above ``node``."""
    if depth < 0:
        raise RecourseError(f"negative recourse depth {depth}")
    stage = t.nodes[node].stage
    if var not in m.resolved or m.model.var(var) is None:
        raise RecourseError(f"{var!r} is not a staged variable")
    stages = m.stages(var)
    if depth > stage or stage - depth < min(stages):
        raise RecourseError(
            f"{var}(-{depth}) at node {node} (stage {stage}) reaches stage {stage - depth}, "
            f"before {var} is defined (stages {stages[0]}..{stages[-1]})"
        )
    columns = columns if columns is not None else node_column_map(m, t)
    target_stage = stage - depth
    if _is_deterministic(m, var):
        key = ColumnKey(var, target_stage)
    else:
        key = ColumnKey(var, target_stage, t.ancestor(node, depth))
    col = columns.get(key)
    if col is None:
        raise RecourseError(f"no column for {var} at stage {target_stage}")
    return col


class _Instantiator:
    """Evaluates expressions at a node, shared by both layouts."""

    def __init__(self, m: ValidatedModel, t: ScenarioTree):
        self.m = m
        self.t = t
        self.var_names = {v.name for v in m.model.vars}

    def param(self, name: str, node: int) -> float:
        stage = self.t.nodes[node].stage
        if _is_deterministic(self.m, name):
            value = self.t.stage_params.get((name, stage))
            if value is None:
                # a stage with one node can carry the value on the node itself
                if len(self.t.stage_index[stage]) == 1:
                    value = self.t.param(name, node)
                if value is None:
                    raise MissingParam(name, stage=stage)
            return value
        value = self.t.param(name, node)
        if value is None:
            value = self.t.stage_params.get((name, stage))
        if value is None:
            raise MissingParam(name, node=node)
        return value

    def linear(self, expr: LinExpr, node: int, column) -> tuple[dict[int, float], float]:
        """Coefficients and constant of ``expr`` at ``node``.

        ``column(var, node, depth)`` maps a variable reference to its column.
        """
        coeffs: dict[int, float] = {}
        constant = expr.constant
        for term in expr.terms:
            c = term.coeff
            col = None
            for ref in term.factors:
                if ref.name in self.var_names:
                    col = column(ref.name, node, ref.recourse_depth)
                else:
                    c *= self.param(ref.name, node)
            if col is None:
                constant += c
            else:
                coeffs[col] = coeffs.get(col, 0.0) + c
        return coeffs, constant

    def row(self, lhs: LinExpr, relop: Relop, rhs: LinExpr, node: int, column) -> Row:
        lc, lk = self.linear(lhs, node, column)
        rc, rk = self.linear(rhs, node, column)
        for j, v in rc.items():
            lc[j] = lc.get(j, 0.0) - v
        return Row({j: v for j, v in sorted(lc.items()) if v != 0.0}, relop, rk - lk)

    def objective_terms(self, nodes_and_weights, column) -> tuple[dict[int, float], float]:
        obj = self.m.model.objective
        coeffs: dict[int, float] = {}
        offset = 0.0
        for node, weight in nodes_and_weights:
            c, k = self.linear(obj.expr, node, column)
            for j, v in c.items():
                coeffs[j] = coeffs.get(j, 0.0) + weight * v
            offset += weight * k
        return coeffs, offset


def _objective_vector(n: int, coeffs: dict[int, float]) -> np.ndarray:
    vec = np.zeros(n)
    for j, v in coeffs.items():
        vec[j] = v
    return vec


def _constraint_sites(m: ValidatedModel, t: ScenarioTree, name: str) -> Iterator[tuple[int, int | None, int]]:
    """Yield ``(stage, label node, evaluation node)`` for each row of a constraint."""
    for s in m.stages(name):
        nodes = t.stage_index[s]
        if _is_deterministic(m, name) and len(nodes) > 1:
            yield s, None, nodes[0]
        else:
            for n in nodes:
                yield s, n, n


def _check_stage_shared(m: ValidatedModel, t: ScenarioTree, owner: str, exprs: list[LinExpr], stage: int):
    # a stage-shared row may only read stage-shared data
    for expr in exprs:
        for ref in expr.refs():
            if not _is_deterministic(m, ref.name):
                raise ExpansionError(
                    f"deterministic {owner!r} reads node-valued {ref.name!r} at stage {stage}, "
                    f"which has {len(t.stage_index[stage])} nodes"
                )


def expand_node_form(m: ValidatedModel, t: ScenarioTree) -> ExpandedModel:
    """Node-indexed deterministic equivalent; non-anticipativity is implicit."""
    _check_horizon(m, t)
    columns = node_column_map(m, t)
    inst = _Instantiator(m, t)

    def column(var: str, node: int, depth: int) -> int:
        return resolve_recourse_ref(m, t, var, node, depth, columns)

    rows: list[Row] = []
    labels: list[RowKey] = []
    for con in m.model.constraints:
        for stage, label_node, node in _constraint_sites(m, t, con.name):
            if label_node is None:
                _check_stage_shared(m, t, con.name, [con.lhs, con.rhs], stage)
            rows.append(inst.row(con.lhs, con.relop, con.rhs, node, column))
            labels.append(RowKey(con.name, stage, label_node))

    obj = m.model.objective
    sites = []
    for s in m.stages(obj.name):
        nodes = t.stage_index[s]
        if _is_deterministic(m, obj.name) and len(nodes) > 1:
            _check_stage_shared(m, t, obj.name, [obj.expr], s)
            sites.append((nodes[0], 1.0))
        else:
            sites.extend((n, t.probability(n)) for n in nodes)
    coeffs, offset = inst.objective_terms(sites, column)

    bounds = [(m.model.var(k.var).lb, m.model.var(k.var).ub) for k in columns.reverse]
    lp = LpProblem(len(columns), _objective_vector(len(columns), coeffs), rows, bounds, offset)
    return ExpandedModel(lp, columns, labels, "node", 0)


def expand_scenario_form(m: ValidatedModel, t: ScenarioTree) -> ExpandedModel:
    """Scenario-indexed deterministic equivalent with explicit coupling rows."""
    _check_horizon(m, t)
    inst = _Instantiator(m, t)
    leaves = t.leaves()
    paths = {leaf: t.path(leaf) for leaf in leaves}

    keys: list[ColumnKey] = []
    for v in m.model.vars:
        deterministic = _is_deterministic(m, v.name)
        for leaf in leaves:
            for s in m.stages(v.name):
                keys.append(ColumnKey(v.name, s, None if deterministic else paths[leaf][s], leaf))
    columns = ColumnMap(keys)
    lookup = {(k.var, k.scenario, k.stage): i for i, k in enumerate(keys)}

    rows: list[Row] = []
    labels: list[RowKey] = []
    for leaf in leaves:
        path = paths[leaf]

        def column(var: str, node: int, depth: int, leaf=leaf) -> int:
            stage = t.nodes[node].stage
            if depth > stage or stage - depth < min(m.stages(var)):
                raise RecourseError(f"{var}(-{depth}) at stage {stage} reaches before {var} is defined")
            return lookup[(var, leaf, stage - depth)]

        for con in m.model.constraints:
            deterministic = _is_deterministic(m, con.name)
            for s in m.stages(con.name):
                node = path[s]
                if deterministic and len(t.stage_index[s]) > 1:
                    _check_stage_shared(m, t, con.name, [con.lhs, con.rhs], s)
                rows.append(inst.row(con.lhs, con.relop, con.rhs, node, column))
                labels.append(RowKey(con.name, s, node, leaf))

    # scenarios sharing a node (or, for deterministic variables, a stage)
    # must agree; each copy is tied to the group's first scenario
    n_nonant = 0
    for v in m.model.vars:
        deterministic = _is_deterministic(m, v.name)
        for s in m.stages(v.name):
            groups: dict[int, list[int]] = {}
            for leaf in leaves:
                groups.setdefault(0 if deterministic else paths[leaf][s], []).append(leaf)
            for group_node, members in groups.items():
                head = lookup[(v.name, members[0], s)]
                for leaf in members[1:]:
                    rows.append(Row({head: 1.0, lookup[(v.name, leaf, s)]: -1.0}, Relop.EQ, 0.0))
                    labels.append(RowKey(f"{NONANT_PREFIX}__{v.name}", s, None if deterministic else group_node, leaf))
                    n_nonant += 1

    obj = m.model.objective
    coeffs: dict[int, float] = {}
    offset = 0.0
    obj_deterministic = _is_deterministic(m, obj.name)
    for leaf in leaves:
        path = paths[leaf]
        p_leaf = t.probability(leaf)

        def column(var: str, node: int, depth: int, leaf=leaf) -> int:
            return lookup[(var, leaf, t.nodes[node].stage - depth)]

        sites = []
        for s in m.stages(obj.name):
            if obj_deterministic and len(t.stage_index[s]) > 1:
                _check_stage_shared(m, t, obj.name, [obj.expr], s)
            sites.append((path[s], p_leaf))
        c, k = inst.objective_terms(sites, column)
        for j, v in c.items():
            coeffs[j] = coeffs.get(j, 0.0) + v
        offset += k

    bounds = [(m.model.var(k.var).lb, m.model.var(k.var).ub) for k in columns.reverse]
    lp = LpProblem(len(columns), _objective_vector(len(columns), coeffs), rows, bounds, offset)
    return ExpandedModel(lp, columns, labels, "scenario", n_nonant)


def predicted_nonant_rows(m: ValidatedModel, t: ScenarioTree) -> int:
    """Coupling rows the scenario form must contain, counted from the tree alone."""
    total = 0
    n_leaves = len(t.leaves())
    for v in m.model.vars:
        for s in m.stages(v.name):
            if _is_deterministic(m, v.name):
                total += n_leaves - 1
            else:
                total += sum(t.leaf_count(n) - 1 for n in t.stage_index[s])
    return total


def expected_column_count(m: ValidatedModel, t: ScenarioTree) -> int:
    total = 0
    for v in m.model.vars:
        stages = m.stages(v.name)
        if _is_deterministic(m, v.name):
            total += len(stages)
        else:
            total += sum(len(t.stage_index[s]) for s in stages)
    return total


__all__ = [
    "ColumnKey",
    "ColumnMap",
    "ExpandedModel",
    "RowKey",
    "expand_node_form",
    "expand_scenario_form",
    "expected_column_count",
    "node_column_map",
    "predicted_nonant_rows",
    "resolve_recourse_ref",
]

