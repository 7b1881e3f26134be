"""Compiler and solver for stage-annotated multi-stage stochastic LPs.

Typical use::

    from stagelp import parse_text, load_tree, optimize
    report = optimize(parse_text(src), load_tree(tree_json))
"""

from .det_equiv import expand_node_form, expand_scenario_form, resolve_recourse_ref
from .dsl_parser import format_model, parse_model, parse_text, tokenize
from .lp import BACKEND, LpProblem, LpSolution, Status, check_solution, emit_lp_file, solve
from .meta_model import ModelBuilder, build_model, resolve_stage_set, validate_model
from .model import MetaModel
from .pipeline import RunReport, optimize
from .scenario_tree import ScenarioTree, ancestor, load_tree, node_probability, nodes_at_stage, validate_tree

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "LpProblem",
    "LpSolution",
    "MetaModel",
    "ModelBuilder",
    "RunReport",
    "ScenarioTree",
    "Status",
    "ancestor",
    "build_model",
    "check_solution",
    "emit_lp_file",
    "expand_node_form",
    "expand_scenario_form",
    "format_model",
    "load_tree",
    "node_probability",
    "nodes_at_stage",
    "optimize",
    "parse_model",
    "parse_text",
    "resolve_recourse_ref",
    "resolve_stage_set",
    "solve",
    "tokenize",
    "validate_model",
    "validate_tree",
]
