"""Scenario trees: loading, structural validation and fast node queries.

Tree files are JSON documents::

    {"T": 1,
     "stage_params": [{"name": "a", "stage": 1, "value": 1.0}],
     "nodes": [{"id": 0, "stage": 0, "parent": null, "prob": 1.0, "params": {"V": 5.0}},
               {"id": 1, "stage": 1, "parent": 0, "prob": 0.5, "params": {"V": 4.0}},
               {"id": 2, "stage": 1, "parent": 0, "prob": 0.5, "params": {"V": 8.0}}]}

Node ids are dense ``0..N-1``. ``prob`` is the probability of the node
conditional on its parent.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .errors import DepthError, FormatError, StageError, TreeError

PROB_TOL = 1e-9


@dataclass(frozen=True)
class TreeNode:
    id: int
    stage: int
    parent: int | None
    cond_prob: float
    params: Mapping[str, float] = field(default_factory=dict)


class ScenarioTree:
    """An immutable scenario tree.

    Construction does no checking; use :func:`load_tree` or call
    :func:`validate_tree` before querying a hand-built tree.
    """

    def __init__(self, nodes, horizon: int, stage_params: Mapping[tuple[str, int], float] | None = None):
        self.nodes: tuple[TreeNode, ...] = tuple(nodes)
        self.horizon = int(horizon)
        self.stage_params: Mapping[tuple[str, int], float] = MappingProxyType(dict(stage_params or {}))

    def __len__(self):
        return len(self.nodes)

    def __repr__(self):
        return f"ScenarioTree(T={self.horizon}, nodes={len(self.nodes)})"

    @cached_property
    def stage_index(self) -> Mapping[int, tuple[int, ...]]:
        index: dict[int, list[int]] = {s: [] for s in range(self.horizon + 1)}
        for node in self.nodes:
            index.setdefault(node.stage, []).append(node.id)
        return MappingProxyType({s: tuple(ids) for s, ids in index.items()})

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in self.nodes]
        for node in self.nodes:
            if node.parent is not None and 0 <= node.parent < len(kids):
                kids[node.parent].append(node.id)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def _paths(self) -> np.ndarray:
        # Row n holds the ancestor of n at every stage 0..stage(n), -1 beyond.
        paths = np.full((len(self.nodes), self.horizon + 1), -1, dtype=np.int64)
        for node in sorted(self.nodes, key=lambda nd: nd.stage):
            if node.parent is not None:
                paths[node.id] = paths[node.parent]
            paths[node.id, node.stage] = node.id
        paths.setflags(write=False)
        return paths

    @cached_property
    def _probabilities(self) -> np.ndarray:
        probs = np.zeros(len(self.nodes))
        for node in sorted(self.nodes, key=lambda nd: nd.stage):
            parent = 1.0 if node.parent is None else probs[node.parent]
            probs[node.id] = parent * node.cond_prob
        probs.setflags(write=False)
        return probs

    @property
    def root(self) -> int:
        return self.stage_index[0][0]

    def leaves(self) -> tuple[int, ...]:
        return self.stage_index.get(self.horizon, ())

    def path(self, node: int) -> tuple[int, ...]:
        """Node ids from the root down to ``node``."""
        row = self._paths[node]
        return tuple(int(i) for i in row[: self.nodes[node].stage + 1])

    def ancestor(self, node: int, depth: int) -> int:
        return ancestor(self, node, depth)

    def probability(self, node: int) -> float:
        return float(self._probabilities[node])

    def param(self, name: str, node: int) -> float | None:
        return self.nodes[node].params.get(name)

    def leaf_count(self, node: int) -> int:
        """Number of scenarios passing through ``node``."""
        stage = self.nodes[node].stage
        return int(np.count_nonzero(self._paths[list(self.leaves()), stage] == node))

    def to_json(self) -> str:
        doc = {
            "T": self.horizon,
            "stage_params": [{"name": n, "stage": s, "value": v} for (n, s), v in self.stage_params.items()],
            "nodes": [
                {"id": nd.id, "stage": nd.stage, "parent": nd.parent, "prob": nd.cond_prob, "params": dict(nd.params)}
                for nd in self.nodes
            ],
        }
        return json.dumps(doc, indent=1)


def _require(obj: dict, key: str, types, where: str):
    if key not in obj:
        raise FormatError(f"{where}: missing field {key!r}")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, types):
        raise FormatError(f"{where}: field {key!r} has wrong type {type(value).__name__}")
    return value


def load_tree(src: str) -> ScenarioTree:
    """Parse tree-file text and return a validated :class:`ScenarioTree`."""
    try:
        doc = json.loads(src)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        raise FormatError("tree file must contain an object at top level")
    horizon = _require(doc, "T", int, "tree")
    if horizon < 0:
        raise FormatError(f"tree: horizon T must be nonnegative, got {horizon}")
    raw_stage_params = doc.get("stage_params", [])
    if not isinstance(raw_stage_params, list):
        raise FormatError("tree: field 'stage_params' must be a list")
    stage_params: dict[tuple[str, int], float] = {}
    for i, sp in enumerate(raw_stage_params):
        where = f"stage_params[{i}]"
        if not isinstance(sp, dict):
            raise FormatError(f"{where}: must be an object")
        key = (_require(sp, "name", str, where), _require(sp, "stage", int, where))
        if key in stage_params:
            raise FormatError(f"{where}: duplicate value for {key[0]!r} at stage {key[1]}")
        stage_params[key] = float(_require(sp, "value", (int, float), where))

    raw_nodes = _require(doc, "nodes", list, "tree")
    nodes: list[TreeNode] = []
    for i, raw in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        if not isinstance(raw, dict):
            raise FormatError(f"{where}: must be an object")
        node_id = _require(raw, "id", int, where)
        if node_id != i:
            raise FormatError(f"{where}: node ids must be dense 0..N-1 in order, got id {node_id}")
        if "parent" not in raw:
            raise FormatError(f"{where}: missing field 'parent'")
        parent = raw["parent"]
        if parent is not None and (isinstance(parent, bool) or not isinstance(parent, int)):
            raise FormatError(f"{where}: field 'parent' must be an integer or null")
        params = raw.get("params", {})
        if not isinstance(params, dict) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in params.values()
        ):
            raise FormatError(f"{where}: field 'params' must map names to numbers")
        nodes.append(
            TreeNode(
                id=node_id,
                stage=_require(raw, "stage", int, where),
                parent=parent,
                cond_prob=float(_require(raw, "prob", (int, float), where)),
                params=MappingProxyType({str(k): float(v) for k, v in params.items()}),
            )
        )
    tree = ScenarioTree(nodes, horizon, stage_params)
    errors = validate_tree(tree)
    if errors:
        first = errors[0]
        err = TreeError(first.node, first.reason)
        err.all_errors = errors
        raise err
    return tree


def validate_tree(t: ScenarioTree) -> list[TreeError]:
    """Return one :class:`TreeError` per violated structural invariant."""
    errors: list[TreeError] = []
    nodes = t.nodes
    n = len(nodes)
    if n == 0:
        return [TreeError(None, "tree has no nodes")]
    roots = [nd.id for nd in nodes if nd.parent is None]
    if len(roots) != 1:
        errors.append(TreeError(None, f"expected exactly one root, found {len(roots)}"))
    for i, nd in enumerate(nodes):
        if nd.id != i:
            return errors + [TreeError(nd.id, f"node ids must be dense 0..N-1, found id {nd.id} at position {i}")]
    children: list[list[int]] = [[] for _ in range(n)]
    for nd in nodes:
        if not (0.0 < nd.cond_prob <= 1.0) or math.isnan(nd.cond_prob):
            errors.append(TreeError(nd.id, f"conditional probability {nd.cond_prob} outside (0, 1]"))
        if nd.stage < 0 or nd.stage > t.horizon:
            errors.append(TreeError(nd.id, f"stage {nd.stage} outside [0, {t.horizon}]"))
        if nd.parent is None:
            if nd.stage != 0:
                errors.append(TreeError(nd.id, f"root must be at stage 0, found stage {nd.stage}"))
            if nd.cond_prob != 1.0:
                errors.append(TreeError(nd.id, f"root probability must be 1, found {nd.cond_prob}"))
            continue
        if not 0 <= nd.parent < n or nd.parent == nd.id:
            errors.append(TreeError(nd.id, f"unknown parent {nd.parent}"))
            continue
        children[nd.parent].append(nd.id)
        if nd.stage != nodes[nd.parent].stage + 1:
            errors.append(TreeError(nd.id, f"stage skip: stage {nd.stage} under parent at stage {nodes[nd.parent].stage}"))

    for nd in nodes:
        kids = children[nd.id]
        if kids:
            total = math.fsum(nodes[k].cond_prob for k in kids)
            if abs(total - 1.0) > PROB_TOL:
                errors.append(TreeError(nd.id, f"children of node {nd.id} sum to {total:.12g}"))
            if nd.stage >= t.horizon:
                errors.append(TreeError(nd.id, "node at the horizon has children"))
        elif nd.stage < t.horizon:
            errors.append(TreeError(nd.id, "missing children before horizon"))

    if len(roots) == 1:
        reached = {roots[0]}
        frontier = [roots[0]]
        while frontier:
            nxt = []
            for node in frontier:
                for k in children[node]:
                    if k not in reached:
                        reached.add(k)
                        nxt.append(k)
            frontier = nxt
        for nd in nodes:
            if nd.id not in reached:
                errors.append(TreeError(nd.id, "node unreachable from the root"))
    return errors


def ancestor(t: ScenarioTree, node: int, depth: int) -> int:
    """Ancestor ``depth`` stages above ``node``; depth 0 is the node itself."""
    stage = t.nodes[node].stage
    if depth < 0 or depth > stage:
        raise DepthError(f"depth {depth} is outside [0, {stage}] for node {node} at stage {stage}")
    return int(t._paths[node, stage - depth])


def node_probability(t: ScenarioTree, node: int) -> float:
    """Unconditional probability of reaching ``node``."""
    return t.probability(node)


def nodes_at_stage(t: ScenarioTree, stage: int) -> list[int]:
    if not 0 <= stage <= t.horizon:
        raise StageError(f"stage {stage} outside [0, {t.horizon}]")
    return list(t.stage_index.get(stage, ()))
