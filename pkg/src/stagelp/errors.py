"""Exception hierarchy shared by every layer of the toolkit."""

from __future__ import annotations


class StagelpError(Exception):
    """Base class for all errors raised by stagelp."""


class LexError(StagelpError):
    def __init__(self, line: int, col: int, snippet: str):
        self.line = line
        self.col = col
        self.snippet = snippet
        super().__init__(f"{line}:{col}: unexpected character {snippet!r}")


class ParseError(StagelpError):
    def __init__(self, line: int, col: int, expected: str, found: str):
        self.line = line
        self.col = col
        self.expected = expected
        self.found = found
        super().__init__(f"{line}:{col}: expected {expected}, found {found}")


class DuplicateName(StagelpError):
    """A name was declared twice within one category."""

    def __init__(self, category: str, name: str, line: int | None = None, col: int | None = None):
        self.category = category
        self.name = name
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{where}duplicate {category} {name!r}")


class StageError(StagelpError):
    pass


class ValidationIssue:
    """One finding of model validation: which object, and what is wrong."""

    __slots__ = ("name", "reason")

    def __init__(self, name: str, reason: str):
        self.name = name
        self.reason = reason

    def __eq__(self, other):
        if not isinstance(other, ValidationIssue):
            return NotImplemented
        return (self.name, self.reason) == (other.name, other.reason)

    def __hash__(self):
        return hash((self.name, self.reason))

    def __repr__(self):
        return f"ValidationIssue({self.name!r}, {self.reason!r})"

    def __str__(self):
        return f"{self.name}: {self.reason}"


class ValidationError(StagelpError):
    """Raised with every issue found, never just the first."""

    def __init__(self, issues: list[ValidationIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


class FormatError(StagelpError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class TreeError(StagelpError):
    def __init__(self, node: int | None, reason: str):
        self.node = node
        self.reason = reason
        super().__init__(reason if node is None else f"node {node}: {reason}")

    def __eq__(self, other):
        if not isinstance(other, TreeError):
            return NotImplemented
        return (self.node, self.reason) == (other.node, other.reason)

    def __hash__(self):
        return hash((self.node, self.reason))


class DepthError(StagelpError):
    pass


class ExpansionError(StagelpError):
    """Model and tree cannot be combined into a deterministic equivalent."""


class MissingParam(ExpansionError):
    def __init__(self, name: str, node: int | None = None, stage: int | None = None):
        self.name = name
        self.node = node
        self.stage = stage
        where = f"node {node}" if node is not None else f"stage {stage}"
        super().__init__(f"parameter {name!r} has no value at {where}")


class RecourseError(ExpansionError):
    pass


class DimensionError(StagelpError):
    pass


class IterationLimit(StagelpError):
    pass


class OracleError(StagelpError):
    pass


class SizeError(StagelpError):
    pass
