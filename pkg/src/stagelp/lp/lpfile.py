"""CPLEX-style LP text export."""

from __future__ import annotations

import math
from typing import Sequence

from ..model import Relop
from .problem import LpProblem

HEADER = "\\ deterministic equivalent written by stagelp"
_MAX_LINE = 80
_RELOP = {Relop.EQ: "=", Relop.LE: "<=", Relop.GE: ">="}


def _num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _wrap(head: str, pieces: list[str]) -> list[str]:
    lines = []
    line = head
    for piece in pieces:
        if len(line) + 1 + len(piece) > _MAX_LINE and line.strip():
            lines.append(line)
            line = "   "
        line += " " + piece
    lines.append(line)
    return lines


def _linear(coeffs, names: Sequence[str]) -> list[str]:
    pieces = []
    for j, v in coeffs:
        sign = "-" if v < 0 else "+"
        mag = abs(v)
        body = names[j] if mag == 1.0 else f"{_num(mag)} {names[j]}"
        if not pieces:
            pieces.append(f"-{body}" if sign == "-" else body)
        else:
            pieces += [sign, body]
    return pieces


def emit_lp_file(p: LpProblem, labels=None) -> str:
    """Render ``p`` in LP format.

    ``labels`` is an expanded model (anything with ``column_names()`` and
    ``row_names()``); without it columns are ``x<j>`` and rows ``c<i>``.
    Output depends only on the inputs, byte for byte.
    """
    if labels is not None:
        cols, rows = labels.column_names(), labels.row_names()
    else:
        cols = [f"x{j}" for j in range(p.n_cols)]
        rows = [f"c{i}" for i in range(p.n_rows)]
    if p.n_cols == 0 and p.n_rows == 0:
        return f"{HEADER}\nEnd\n"

    out = [HEADER, "Minimize"]
    obj = [(j, float(v)) for j, v in enumerate(p.objective) if v != 0.0]
    pieces = _linear(obj, cols) or (["0", cols[0]] if p.n_cols else [])
    if p.offset != 0.0:
        if pieces:
            pieces += ["-" if p.offset < 0 else "+", _num(abs(p.offset))]
        else:
            pieces.append(_num(p.offset))
    out += _wrap(" obj:", pieces)

    out.append("Subject To")
    for name, row in zip(rows, p.rows):
        pieces = _linear(sorted(row.coeffs.items()), cols) or (["0", cols[0]] if p.n_cols else [])
        pieces += [_RELOP[row.relop], _num(float(row.rhs))]
        out += _wrap(f" {name}:", pieces)

    out.append("Bounds")
    for name, (lb, ub) in zip(cols, p.bounds):
        if lb == ub:
            out.append(f" {name} = {_num(lb)}")
        elif math.isinf(lb) and math.isinf(ub):
            out.append(f" {name} free")
        elif math.isinf(ub):
            out.append(f" {name} >= {_num(lb)}")
        elif math.isinf(lb):
            out.append(f" -inf <= {name} <= {_num(ub)}")
        else:
            out.append(f" {_num(lb)} <= {name} <= {_num(ub)}")
    out.append("End")
    return "\n".join(out) + "\n"
