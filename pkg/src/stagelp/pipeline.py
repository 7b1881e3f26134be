"""One-call model-to-policy pipeline used by the CLI."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .det_equiv import ExpandedModel, expand_node_form, expand_scenario_form
from .lp import Status, solve
from .meta_model import validate_model
from .model import MetaModel
from .scenario_tree import ScenarioTree

FORMS = {"node": expand_node_form, "scenario": expand_scenario_form}


@dataclass(frozen=True)
class PolicyEntry:
    var: str
    node: int | None
    stage: int
    value: float
    scenario: int | None = None


@dataclass
class RunReport:
    status: str
    objective_value: float | None = None
    policy: list[PolicyEntry] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        doc = json.loads(text)
        doc["policy"] = [PolicyEntry(**p) for p in doc.get("policy", [])]
        return cls(**doc)

    def to_text(self) -> str:
        lines = [f"status: {self.status}"]
        if self.objective_value is not None:
            lines.append(f"objective: {self.objective_value!r}")
        if self.policy:
            show_scenario = any(p.scenario is not None for p in self.policy)
            header = ["var", "node", "stage"] + (["scenario"] if show_scenario else []) + ["value"]
            table = [header]
            for p in self.policy:
                row = [p.var, "-" if p.node is None else str(p.node), str(p.stage)]
                if show_scenario:
                    row.append("-" if p.scenario is None else str(p.scenario))
                row.append(f"{p.value:.10g}")
                table.append(row)
            widths = [max(len(r[i]) for r in table) for i in range(len(header))]
            lines.append("policy:")
            lines += ["  " + "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in table]
        lines += [f"note: {d}" for d in self.diagnostics]
        return "\n".join(lines) + "\n"


def expand(model: MetaModel, tree: ScenarioTree, form: str = "node") -> ExpandedModel:
    vm = validate_model(model, tree.horizon)
    return FORMS[form](vm, tree)


def optimize(model: MetaModel, tree: ScenarioTree, form: str = "node") -> RunReport:
    """Validate, expand and solve; return the node-wise decision policy."""
    expanded = expand(model, tree, form)
    sol = solve(expanded.lp)
    diagnostics = [f"{form} form: {expanded.lp.n_cols} columns, {expanded.lp.n_rows} rows, {sol.iterations} pivots"]
    if sol.status is not Status.OPTIMAL:
        return RunReport(sol.status.value, diagnostics=diagnostics)
    policy = [
        PolicyEntry(key.var, key.node, key.stage, float(value), key.scenario)
        for key, value in zip(expanded.columns.reverse, sol.x)
    ]
    diagnostics.append(f"max residual {sol.max_residual:.3g}")
    return RunReport(sol.status.value, float(sol.objective_value), policy, diagnostics)
