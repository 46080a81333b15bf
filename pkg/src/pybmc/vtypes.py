"""The verifier's type universe.

Fixed-width integers (signed default ``int`` plus the unsigned wide types),
IEEE binary64 floats, bools, statically-sized lists, class references and
function signatures. Everything is monomorphic and known at conversion time.
"""
from __future__ import annotations

from dataclasses import dataclass

from .astnodes import AstNode
from .errors import UntypeableExpression

INT_WIDTHS = (32, 64, 128, 256)


@dataclass(frozen=True)
class BoolType:
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class IntType:
    width: int
    signed: bool

    def __post_init__(self):
        if self.width not in INT_WIDTHS:
            raise ValueError(f"unsupported int width {self.width}")

    def __str__(self) -> str:
        return "int" if self.signed else f"uint{self.width}"

    @property
    def min_value(self) -> int:
        return -(1 << (self.width - 1)) if self.signed else 0

    @property
    def max_value(self) -> int:
        return (1 << (self.width - 1)) - 1 if self.signed else (1 << self.width) - 1

    def fits(self, value: int) -> bool:
        return self.min_value <= value <= self.max_value


@dataclass(frozen=True)
class FloatType:
    def __str__(self) -> str:
        return "float"


@dataclass(frozen=True)
class NoneType:
    def __str__(self) -> str:
        return "None"


@dataclass(frozen=True)
class ListType:
    elem: "VerifierType"
    length: int  # -1 when only the annotation is known

    def __str__(self) -> str:
        return f"list[{self.elem}]"


@dataclass(frozen=True)
class ClassType:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FuncType:
    params: tuple["VerifierType", ...]
    ret: "VerifierType"

    def __str__(self) -> str:
        args = ", ".join(str(p) for p in self.params)
        return f"({args}) -> {self.ret}"


VerifierType = (
    BoolType | IntType | FloatType | NoneType | ListType | ClassType | FuncType
)

BOOL = BoolType()
FLOAT = FloatType()
NONE = NoneType()

UNSIGNED_NAMES = {f"uint{w}": IntType(w, False) for w in INT_WIDTHS}


def default_int(int_width: int) -> IntType:
    return IntType(int_width, True)


def is_numeric(t: VerifierType) -> bool:
    return isinstance(t, (IntType, FloatType))


def compatible(declared: VerifierType, actual: VerifierType) -> bool:
    """Assignment compatibility: exact match, modulo unknown list lengths."""
    if isinstance(declared, ListType) and isinstance(actual, ListType):
        return declared.elem == actual.elem and declared.length in (-1, actual.length)
    return declared == actual


def parse_annotation(node: AstNode, class_names: set[str], int_width: int) -> VerifierType:
    """Map an annotation subtree (Name / Subscript / Constant None) to a type."""
    loc = node.loc
    if node.kind == "Constant" and node["value"] is None:
        return NONE
    if node.kind == "Name":
        name = node["id"]
        if name == "int":
            return default_int(int_width)
        if name == "bool":
            return BOOL
        if name == "float":
            return FLOAT
        if name in UNSIGNED_NAMES:
            return UNSIGNED_NAMES[name]
        if name in class_names:
            return ClassType(name)
        raise UntypeableExpression(f"unknown type name {name!r}", loc)
    if node.kind == "Subscript" and node["value"].kind == "Name" and node["value"]["id"] == "list":
        elem = parse_annotation(node["slice"], class_names, int_width)
        if not isinstance(elem, (IntType, BoolType, FloatType)):
            raise UntypeableExpression("list elements must be scalars", loc)
        return ListType(elem, -1)
    raise UntypeableExpression("unsupported annotation form", loc)


def annotation_text(t: VerifierType) -> str:
    """Render a type as the annotation the annotator inserts."""
    if isinstance(t, ListType):
        return f"list[{annotation_text(t.elem)}]"
    return str(t)
