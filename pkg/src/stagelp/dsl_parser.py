"""Tokenizer, recursive-descent parser and canonical printer for model text.

Grammar (statements end with ``;``, ``#`` starts a line comment)::

    model      := statement*
    statement  := "param" IDENT ("," IDENT)* ";"
                | "var" var_item ("," var_item)* ";"
                | "minimize" IDENT ":" objective ";"
                | "subject" "to" IDENT ":" expr relop expr ";"
                | ("deterministic" | "stochastic") IDENT ("," IDENT)* ":" stage_set ";"
    var_item   := IDENT (("<=" | ">=") number)*
    objective  := "E" "(" expr ")" | expr
    expr       := ["+" | "-"] term (("+" | "-") term)*
    term       := atom ("*" atom)*
    atom       := number | IDENT ["(" INT ")"]
    stage_set  := stage_atom [".." stage_atom]
    stage_atom := INT | "T"
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass

from .errors import DuplicateName, LexError, ParseError
from .model import (
    HORIZON_SYMBOL,
    Constraint,
    LinExpr,
    MetaModel,
    Objective,
    Param,
    Relop,
    StageDecl,
    StageKind,
    StageSetExpr,
    SymbolRef,
    Term,
    Var,
)

KEYWORDS = frozenset({"deterministic", "stochastic", "param", "var", "minimize", "subject", "to"})
EXPECT_FUNCTION = "E"


class TokenKind(enum.Enum):
    KEYWORD = "keyword"
    IDENT = "identifier"
    INT = "integer"
    REAL = "number"
    OP = "operator"
    LPAREN = "'('"
    RPAREN = "')'"
    COLON = "':'"
    COMMA = "','"
    SEMI = "';'"
    RANGE = "'..'"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    col: int

    def describe(self) -> str:
        if self.kind in (TokenKind.KEYWORD, TokenKind.IDENT, TokenKind.INT, TokenKind.REAL, TokenKind.OP):
            return f"{self.kind.value} {self.text!r}"
        return self.kind.value


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<real>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<range>\.\.)
  | (?P<op><=|>=|=|\+|-|\*)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<colon>:)
  | (?P<comma>,)
  | (?P<semi>;)
    """,
    re.VERBOSE,
)
_SIGNED_NUMBER_RE = re.compile(r"-(?:\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\d+)")

_SIMPLE_KINDS = {
    "range": TokenKind.RANGE,
    "op": TokenKind.OP,
    "lparen": TokenKind.LPAREN,
    "rparen": TokenKind.RPAREN,
    "colon": TokenKind.COLON,
    "comma": TokenKind.COMMA,
    "semi": TokenKind.SEMI,
}


def tokenize(src: str) -> list[Token]:
    """Split model text into tokens with 1-based line/column positions.

    A ``-`` directly after ``(`` and glued to a digit is lexed as part of a
    signed number, so ``s(-1)`` yields ``INT(-1)``.
    """
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(src)
    while pos < n:
        col = pos - line_start + 1
        if src[pos] == "-" and tokens and tokens[-1].kind is TokenKind.LPAREN:
            m = _SIGNED_NUMBER_RE.match(src, pos)
            if m:
                text = m.group()
                kind = TokenKind.INT if text[1:].isdigit() else TokenKind.REAL
                tokens.append(Token(kind, text, line, col))
                pos = m.end()
                continue
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            end = pos + 1
            while end < n and not src[end].isspace() and end - pos < 20:
                end += 1
            raise LexError(line, col, src[pos:end])
        group = m.lastgroup
        text = m.group()
        if group == "nl":
            line += 1
            line_start = m.end()
        elif group in ("ws", "comment"):
            pass
        elif group == "ident":
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, text, line, col))
        elif group == "int":
            tokens.append(Token(TokenKind.INT, text, line, col))
        elif group == "real":
            tokens.append(Token(TokenKind.REAL, text, line, col))
        else:
            tokens.append(Token(_SIMPLE_KINDS[group], text, line, col))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers -------------------------------------------------

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def error(self, expected: str) -> ParseError:
        tok = self.peek()
        if tok is None:
            if self.tokens:
                last = self.tokens[-1]
                return ParseError(last.line, last.col + len(last.text), expected, "end of input")
            return ParseError(1, 1, expected, "end of input")
        return ParseError(tok.line, tok.col, expected, tok.describe())

    def check(self, kind: TokenKind, text: str | None = None) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind is kind and (text is None or tok.text == text)

    def accept(self, kind: TokenKind, text: str | None = None) -> Token | None:
        if self.check(kind, text):
            tok = self.tokens[self.pos]
            self.pos += 1
            return tok
        return None

    def expect(self, kind: TokenKind, text: str | None = None, what: str | None = None) -> Token:
        tok = self.accept(kind, text)
        if tok is None:
            raise self.error(what or (repr(text) if text else kind.value))
        return tok

    # -- statements ----------------------------------------------------

    def model(self) -> MetaModel:
        params: list[Param] = []
        variables: list[Var] = []
        objective: Objective | None = None
        constraints: list[Constraint] = []
        decls: list[StageDecl] = []
        seen: dict[str, set[str]] = {"parameter": set(), "variable": set(), "constraint": set()}

        def declare(category: str, tok: Token):
            if tok.text in seen[category]:
                raise DuplicateName(category, tok.text, tok.line, tok.col)
            seen[category].add(tok.text)

        while not self.at_end():
            tok = self.peek()
            if tok.kind is not TokenKind.KEYWORD or tok.text in ("to",):
                raise self.error("statement keyword")
            self.pos += 1
            if tok.text == "param":
                for name in self.name_list():
                    declare("parameter", name)
                    params.append(Param(name.text))
            elif tok.text == "var":
                while True:
                    name = self.expect(TokenKind.IDENT, what="identifier")
                    declare("variable", name)
                    variables.append(self.var_bounds(name.text))
                    if not self.accept(TokenKind.COMMA):
                        break
            elif tok.text == "minimize":
                name = self.expect(TokenKind.IDENT, what="identifier")
                if objective is not None:
                    raise DuplicateName("objective", name.text, name.line, name.col)
                self.expect(TokenKind.COLON)
                objective = Objective(name.text, self.objective_expr())
            elif tok.text == "subject":
                self.expect(TokenKind.KEYWORD, "to")
                name = self.expect(TokenKind.IDENT, what="identifier")
                declare("constraint", name)
                self.expect(TokenKind.COLON)
                lhs, relop, rhs = self.relation()
                constraints.append(Constraint(name.text, lhs, relop, rhs))
            else:
                kind = StageKind(tok.text)
                names = tuple(t.text for t in self.name_list(terminator=TokenKind.COLON))
                decls.append(StageDecl(kind, names, self.stage_set()))
            self.expect(TokenKind.SEMI)
        return MetaModel(tuple(params), tuple(variables), objective, tuple(constraints), tuple(decls))

    def name_list(self, terminator: TokenKind | None = None) -> list[Token]:
        names = [self.expect(TokenKind.IDENT, what="identifier")]
        while self.accept(TokenKind.COMMA):
            names.append(self.expect(TokenKind.IDENT, what="identifier"))
        if terminator is not None:
            self.expect(terminator)
        return names

    def var_bounds(self, name: str) -> Var:
        lb, ub = -math.inf, math.inf
        have_lb = have_ub = False
        while self.check(TokenKind.OP, ">=") or self.check(TokenKind.OP, "<="):
            op = self.tokens[self.pos]
            self.pos += 1
            value = self.signed_number()
            if op.text == ">=":
                if have_lb:
                    raise ParseError(op.line, op.col, "at most one lower bound", "second '>='")
                lb, have_lb = value, True
            else:
                if have_ub:
                    raise ParseError(op.line, op.col, "at most one upper bound", "second '<='")
                ub, have_ub = value, True
        return Var(name, lb, ub)

    def signed_number(self) -> float:
        sign = 1.0
        if self.accept(TokenKind.OP, "-"):
            sign = -1.0
        else:
            self.accept(TokenKind.OP, "+")
        tok = self.peek()
        if tok is None or tok.kind not in (TokenKind.INT, TokenKind.REAL):
            raise self.error("number")
        self.pos += 1
        return sign * float(tok.text)

    def stage_set(self) -> StageSetExpr:
        lo = self.stage_atom()
        if self.accept(TokenKind.RANGE):
            return StageSetExpr(lo, self.stage_atom())
        return StageSetExpr(lo)

    def stage_atom(self):
        tok = self.accept(TokenKind.INT)
        if tok is not None:
            if tok.text.startswith("-"):
                raise ParseError(tok.line, tok.col, "nonnegative stage", tok.describe())
            return int(tok.text)
        if self.accept(TokenKind.IDENT, HORIZON_SYMBOL):
            return HORIZON_SYMBOL
        raise self.error(f"stage number or {HORIZON_SYMBOL!r}")

    # -- expressions ---------------------------------------------------

    def objective_expr(self) -> LinExpr:
        if self.check(TokenKind.IDENT, EXPECT_FUNCTION) and self.peek(1) is not None and self.peek(1).kind is TokenKind.LPAREN:
            self.pos += 2
            inner = self.expr()
            self.expect(TokenKind.RPAREN)
            return LinExpr(inner.terms, inner.constant, expect=True)
        return self.expr()

    def relation(self) -> tuple[LinExpr, Relop, LinExpr]:
        lhs = self.expr()
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.OP or tok.text not in ("=", "<=", ">="):
            raise self.error("'=', '<=' or '>='")
        self.pos += 1
        return lhs, Relop(tok.text), self.expr()

    def expr(self) -> LinExpr:
        terms: list[Term] = []
        constant = 0.0
        sign = 1.0
        if self.accept(TokenKind.OP, "-"):
            sign = -1.0
        else:
            self.accept(TokenKind.OP, "+")
        while True:
            coeff, factors = self.term()
            if factors:
                terms.append(Term(sign * coeff, tuple(factors)))
            else:
                constant += sign * coeff
            if self.accept(TokenKind.OP, "+"):
                sign = 1.0
            elif self.accept(TokenKind.OP, "-"):
                sign = -1.0
            else:
                return LinExpr(tuple(terms), constant)

    def term(self) -> tuple[float, list[SymbolRef]]:
        coeff = 1.0
        factors: list[SymbolRef] = []
        while True:
            tok = self.peek()
            if tok is not None and tok.kind in (TokenKind.INT, TokenKind.REAL):
                self.pos += 1
                coeff *= float(tok.text)
            elif tok is not None and tok.kind is TokenKind.IDENT:
                if tok.text == EXPECT_FUNCTION and self.peek(1) is not None and self.peek(1).kind is TokenKind.LPAREN:
                    raise ParseError(tok.line, tok.col, "E() only as the outermost wrapper of an objective", "nested 'E('")
                self.pos += 1
                if len(factors) == 2:
                    raise ParseError(tok.line, tok.col, "at most two symbols per product", tok.describe())
                factors.append(SymbolRef(tok.text, self.recourse()))
            else:
                raise self.error("number or identifier")
            if not self.accept(TokenKind.OP, "*"):
                return coeff, factors

    def recourse(self) -> int:
        if not self.accept(TokenKind.LPAREN):
            return 0
        negative = self.accept(TokenKind.OP, "-") is not None
        tok = self.expect(TokenKind.INT, what="recourse offset")
        offset = int(tok.text)
        if negative:
            offset = -offset
        if offset > 0:
            raise ParseError(tok.line, tok.col, "nonpositive recourse offset", tok.describe())
        self.expect(TokenKind.RPAREN)
        return -offset


def _parse_fragment(text: str, rule: str):
    parser = _Parser(tokenize(text))
    result = getattr(parser, rule)()
    if not parser.at_end():
        raise parser.error("end of input")
    return result


def parse_model(tokens: list[Token]) -> MetaModel:
    return _Parser(tokens).model()


def parse_text(src: str) -> MetaModel:
    """Tokenize and parse model source text."""
    return parse_model(tokenize(src))


def parse_objective_text(text: str) -> LinExpr:
    return _parse_fragment(text, "objective_expr")


def parse_relation_text(text: str) -> tuple[LinExpr, Relop, LinExpr]:
    return _parse_fragment(text, "relation")


def parse_stage_set_text(text: str) -> StageSetExpr:
    return _parse_fragment(text, "stage_set")


# -- canonical printing ------------------------------------------------


def format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def _format_ref(ref: SymbolRef) -> str:
    return ref.name if ref.recourse_depth == 0 else f"{ref.name}(-{ref.recourse_depth})"


def _format_product(coeff: float, factors: tuple[SymbolRef, ...]) -> str:
    parts = [_format_ref(f) for f in factors]
    if coeff != 1.0:
        parts.insert(0, format_number(coeff))
    return " * ".join(parts)


def format_expr(expr: LinExpr) -> str:
    pieces: list[str] = []
    for term in expr.terms:
        body = _format_product(abs(term.coeff), term.factors)
        negative = math.copysign(1.0, term.coeff) < 0
        if not pieces:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f"- {body}" if negative else f"+ {body}")
    if expr.constant != 0.0 or not pieces:
        c = expr.constant
        if not pieces:
            pieces.append(format_number(c) if c != 0.0 else "0")
        else:
            pieces.append(f"- {format_number(-c)}" if c < 0 else f"+ {format_number(c)}")
    text = " ".join(pieces)
    return f"E({text})" if expr.expect else text


def _format_var(v: Var) -> str:
    out = v.name
    if v.lb != -math.inf:
        out += f" >= {format_number(v.lb)}"
    if v.ub != math.inf:
        out += f" <= {format_number(v.ub)}"
    return out


def format_model(m: MetaModel) -> str:
    """Render a model as canonical text, one statement per line."""
    lines: list[str] = []
    for decl in m.stage_decls:
        lines.append(f"{decl.kind.value} {', '.join(decl.object_names)}: {decl.stage_set};")
    if m.stage_decls:
        lines.append("")
    for p in m.params:
        lines.append(f"param {p.name};")
    for v in m.vars:
        lines.append(f"var {_format_var(v)};")
    if m.objective is not None:
        lines.append(f"minimize {m.objective.name}: {format_expr(m.objective.expr)};")
    for c in m.constraints:
        lines.append(f"subject to {c.name}: {format_expr(c.lhs)} {c.relop.value} {format_expr(c.rhs)};")
    while lines and lines[-1] == "":
        lines.pop()
    return "\n".join(lines) + "\n" if lines else ""
