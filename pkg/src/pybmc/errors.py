"""Error types raised across the verification pipeline.

Every front-end error carries an optional source location so the CLI can
report ``file:line:col`` and exit with code 2; solver-side failures map to
exit code 3.
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Loc:
    """A source position (1-based line, 0-based column)."""

    line: int
    col: int = 0

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


class VerifierError(Exception):
    """Base class for all front-end errors."""

    def __init__(self, message: str, loc: Loc | None = None):
        self.loc = loc
        super().__init__(message if loc is None else f"{loc}: {message}")


# --- ast-ingest ---

class MalformedAst(VerifierError):
    """The JSON document does not have the shape of a dumped AST."""


class UnsupportedConstruct(VerifierError):
    """A node kind or operator outside the supported subset."""

    def __init__(self, kind: str, loc: Loc | None = None):
        self.kind = kind
        super().__init__(f"unsupported construct: {kind}", loc)


class ModuleLookupError(VerifierError):
    """An imported module has no AST dump or source in the search directory."""


class ImportCycle(VerifierError):
    def __init__(self, chain: list[str]):
        self.chain = chain
        super().__init__("import cycle: " + " -> ".join(chain))


class FunctionNotFound(VerifierError):
    pass


# --- type-annotator ---

class TypeConflict(VerifierError):
    pass


class UntypeableExpression(VerifierError):
    pass


class UnknownName(VerifierError):
    pass


# --- ir-builder ---

class DuplicateDefinition(VerifierError):
    pass


class UnresolvedName(VerifierError):
    pass


class MemberNotFound(VerifierError):
    def __init__(self, cls: str, member: str, loc: Loc | None = None):
        self.cls = cls
        self.member = member
        super().__init__(f"class {cls} has no member {member}", loc)


# --- vc-solver ---

class SolverError(Exception):
    """Base class for back-end failures (exit code 3)."""


class SolverCrashed(SolverError):
    def __init__(self, status: int, stderr: str):
        self.status = status
        self.stderr = stderr
        super().__init__(f"solver exited with status {status}: {stderr.strip()[:400]}")


class ModelParseError(SolverError):
    pass


class UnsupportedSort(SolverError):
    pass


class DomainTooLarge(SolverError):
    """Input domain product exceeds the enumeration oracle's cap."""


class UnsupportedSortForOracle(SolverError):
    """The enumeration oracle cannot handle this input sort (e.g. FP64)."""


class IncompleteModel(SolverError):
    def __init__(self, symbol: str):
        self.symbol = symbol
        super().__init__(f"model assigns no value to input symbol {symbol}")


# --- cli-bench ---

class MissingExpectation(VerifierError):
    pass
