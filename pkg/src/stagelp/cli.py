"""Command-line front end.

Exit codes: 0 success or OPTIMAL, 1 INFEASIBLE or UNBOUNDED, 2 usage or
input errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .det_equiv import expand_node_form
from .dsl_parser import format_model, parse_text
from .errors import (
    DuplicateName,
    FormatError,
    LexError,
    ParseError,
    StagelpError,
    TreeError,
    ValidationError,
)
from .lp import emit_lp_file
from .meta_model import validate_model
from .pipeline import FORMS, RunReport, expand, optimize
from .scenario_tree import load_tree

EXIT_OK = 0
EXIT_NOT_OPTIMAL = 1
EXIT_INPUT = 2


class InputError(Exception):
    """An error already rendered with its file context."""

    def __init__(self, lines: list[str]):
        self.lines = lines
        super().__init__("\n".join(lines))


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError([f"{path}: cannot read file ({exc.strerror})"]) from None
    except UnicodeDecodeError:
        raise InputError([f"{path}: not valid UTF-8"]) from None


def _load_model(path: str):
    try:
        return parse_text(_read(path))
    except (LexError, ParseError, DuplicateName) as exc:
        if getattr(exc, "line", None) is not None:
            raise InputError([f"{path}:{exc}"]) from None
        raise InputError([f"{path}: {exc}"]) from None


def _load_tree(path: str):
    try:
        return load_tree(_read(path))
    except FormatError as exc:
        sep = "" if exc.line is not None else " "
        raise InputError([f"{path}:{sep}{exc}"]) from None
    except TreeError as exc:
        errors = getattr(exc, "all_errors", [exc])
        raise InputError([f"{path}: {e}" for e in errors]) from None


def _check_horizon(args, tree):
    if args.horizon is not None and args.horizon != tree.horizon:
        raise InputError(
            [f"horizon mismatch: --horizon {args.horizon} but tree {args.tree} has T={tree.horizon}"]
        )


def _model_errors(path: str, exc: StagelpError) -> list[str]:
    if isinstance(exc, ValidationError):
        return [f"{path}: {issue.name}: {issue.reason}" for issue in exc.issues]
    return [f"{path}: {exc}"]


def _cmd_parse(args) -> int:
    sys.stdout.write(format_model(_load_model(args.model)))
    return EXIT_OK


def _cmd_validate(args) -> int:
    model = _load_model(args.model)
    tree = _load_tree(args.tree)
    _check_horizon(args, tree)
    try:
        vm = validate_model(model, tree.horizon)
        expand_node_form(vm, tree)
    except StagelpError as exc:
        raise InputError(_model_errors(args.model, exc)) from None
    print(f"ok: {args.model} is valid on {args.tree} (T={tree.horizon}, {len(tree)} nodes)")
    if vm.implicit_params:
        print(f"implicit parameters: {', '.join(vm.implicit_params)}")
    return EXIT_OK


def _cmd_expand(args) -> int:
    model = _load_model(args.model)
    tree = _load_tree(args.tree)
    _check_horizon(args, tree)
    try:
        expanded = expand(model, tree, args.form)
    except StagelpError as exc:
        raise InputError(_model_errors(args.model, exc)) from None
    text = emit_lp_file(expanded.lp, expanded)
    try:
        Path(args.out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError([f"{args.out}: cannot write file ({exc.strerror})"]) from None
    print(f"wrote {args.out}: {expanded.lp.n_cols} columns, {expanded.lp.n_rows} rows")
    return EXIT_OK


def _cmd_solve(args) -> int:
    model = _load_model(args.model)
    tree = _load_tree(args.tree)
    _check_horizon(args, tree)
    try:
        report = optimize(model, tree, args.form)
    except StagelpError as exc:
        raise InputError(_model_errors(args.model, exc)) from None
    sys.stdout.write(report.to_json() + "\n" if args.format == "structured" else report.to_text())
    return EXIT_OK if report.status == "OPTIMAL" else EXIT_NOT_OPTIMAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stagelp", description="Stage-annotated stochastic LP compiler and solver.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="print a model in canonical form")
    p.add_argument("model")
    p.set_defaults(func=_cmd_parse)

    def with_inputs(p):
        p.add_argument("--model", required=True, help="model file (.msm)")
        p.add_argument("--tree", required=True, help="scenario tree file (JSON)")
        p.add_argument("--horizon", type=int, help="expected horizon T; must match the tree")

    p = sub.add_parser("validate", help="check a model against a tree")
    with_inputs(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("expand", help="write the deterministic equivalent as an LP file")
    with_inputs(p)
    p.add_argument("--out", required=True)
    p.add_argument("--form", choices=sorted(FORMS), default="node")
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("solve", help="solve the deterministic equivalent and print the policy")
    with_inputs(p)
    p.add_argument("--format", choices=["text", "structured"], default="text")
    p.add_argument("--form", choices=sorted(FORMS), default="node")
    p.set_defaults(func=_cmd_solve)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        if getattr(args, "format", "text") == "structured":
            sys.stdout.write(RunReport("ERROR", diagnostics=exc.lines).to_json() + "\n")
        for line in exc.lines:
            print(f"error: {line}", file=sys.stderr)
        return EXIT_INPUT
    except StagelpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
