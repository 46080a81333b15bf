"""Typed view over dumped JSON ASTs.

The verifier consumes the JSON documents produced by the companion
``ast-dump`` tool (one object per node, ``_type`` plus the host AST's field
names). :func:`node_from_json` validates every node against the supported
subset and fails fast with a location on anything outside it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator

from .errors import Loc, MalformedAst, UnsupportedConstruct

# Field schema per supported kind. Values: "node" (required child),
# "node?" (optional child), "nodes" (list of children), "atom" (plain JSON
# value), "op" (operator object reduced to its _type string), "ops" (list
# of those).
NODE_SCHEMA: dict[str, dict[str, str]] = {
    "Module": {"body": "nodes"},
    "FunctionDef": {"name": "atom", "args": "node", "body": "nodes", "returns": "node?"},
    "ClassDef": {"name": "atom", "bases": "nodes", "body": "nodes"},
    "AnnAssign": {"target": "node", "annotation": "node", "value": "node?"},
    "Assign": {"targets": "nodes", "value": "node"},
    "If": {"test": "node", "body": "nodes", "orelse": "nodes"},
    "While": {"test": "node", "body": "nodes", "orelse": "nodes"},
    "For": {"target": "node", "iter": "node", "body": "nodes", "orelse": "nodes"},
    "Return": {"value": "node?"},
    "Expr": {"value": "node"},
    "Assert": {"test": "node", "msg": "node?"},
    "Import": {"names": "nodes"},
    "ImportFrom": {"module": "atom", "names": "nodes"},
    "Pass": {},
    "Call": {"func": "node", "args": "nodes"},
    "Name": {"id": "atom"},
    "Attribute": {"value": "node", "attr": "atom"},
    "Constant": {"value": "atom"},
    "BinOp": {"left": "node", "op": "op", "right": "node"},
    "BoolOp": {"op": "op", "values": "nodes"},
    "UnaryOp": {"op": "op", "operand": "node"},
    "Compare": {"left": "node", "ops": "ops", "comparators": "nodes"},
    "Subscript": {"value": "node", "slice": "node"},
    "List": {"elts": "nodes"},
    "arguments": {"args": "nodes"},
    "arg": {"arg": "atom", "annotation": "node?"},
    "alias": {"name": "atom", "asname": "atom"},
}

BIN_OPS = {"Add", "Sub", "Mult", "Div", "FloorDiv", "Mod",
           "LShift", "RShift", "BitOr", "BitXor", "BitAnd"}
BOOL_OPS = {"And", "Or"}
UNARY_OPS = {"USub", "UAdd", "Not", "Invert"}
CMP_OPS = {"Eq", "NotEq", "Lt", "LtE", "Gt", "GtE"}
ALL_OPS = BIN_OPS | BOOL_OPS | UNARY_OPS | CMP_OPS

# arguments fields that must be empty/absent for the subset
_REJECTED_ARG_FIELDS = ("posonlyargs", "kwonlyargs", "defaults", "kw_defaults")


@dataclass
class AstNode:
    """One validated AST node: kind, source location, schema-driven fields."""

    kind: str
    loc: Loc | None
    fields: dict[str, Any] = field(default_factory=dict)

    def __getitem__(self, key: str) -> Any:
        return self.fields[key]

    def get(self, key: str, default: Any = None) -> Any:
        return self.fields.get(key, default)

    def children(self) -> Iterator["AstNode"]:
        for value in self.fields.values():
            if isinstance(value, AstNode):
                yield value
            elif isinstance(value, list):
                for item in value:
                    if isinstance(item, AstNode):
                        yield item

    def walk(self) -> Iterator["AstNode"]:
        yield self
        for child in self.children():
            yield from child.walk()


def _node_loc(obj: dict[str, Any]) -> Loc | None:
    line = obj.get("lineno")
    if line is None:
        return None
    return Loc(int(line), int(obj.get("col_offset", 0)))


def _op_name(value: Any, loc: Loc | None) -> str:
    if isinstance(value, dict):
        value = value.get("_type")
    if not isinstance(value, str):
        raise MalformedAst("operator object without _type", loc)
    if value not in ALL_OPS:
        raise UnsupportedConstruct(f"operator {value}", loc)
    return value


def node_from_json(obj: Any, parent_loc: Loc | None = None) -> AstNode:
    """Build a validated AstNode from one JSON node object."""
    if not isinstance(obj, dict):
        raise MalformedAst(f"expected a node object, got {type(obj).__name__}", parent_loc)
    kind = obj.get("_type")
    if not isinstance(kind, str):
        raise MalformedAst("node object without _type", parent_loc)
    loc = _node_loc(obj) or parent_loc
    schema = NODE_SCHEMA.get(kind)
    if schema is None:
        raise UnsupportedConstruct(kind, loc)
    if kind == "arguments":
        for banned in _REJECTED_ARG_FIELDS:
            if obj.get(banned):
                raise UnsupportedConstruct(f"parameter form {banned}", loc)
        if obj.get("vararg") or obj.get("kwarg"):
            raise UnsupportedConstruct("*args/**kwargs", loc)
    if kind == "Call" and obj.get("keywords"):
        raise UnsupportedConstruct("keyword arguments", loc)
    if kind == "ImportFrom" and obj.get("level"):
        raise UnsupportedConstruct("relative import", loc)
    if kind in ("While", "For") and obj.get("orelse"):
        raise UnsupportedConstruct(f"{kind.lower()}-else clause", loc)

    fields: dict[str, Any] = {}
    for name, shape in schema.items():
        raw = obj.get(name)
        if shape == "node":
            if raw is None:
                raise MalformedAst(f"{kind} missing required field {name}", loc)
            fields[name] = node_from_json(raw, loc)
        elif shape == "node?":
            fields[name] = None if raw is None else node_from_json(raw, loc)
        elif shape == "nodes":
            if raw is None:
                raw = []
            if not isinstance(raw, list):
                raise MalformedAst(f"{kind}.{name} is not a list", loc)
            fields[name] = [node_from_json(item, loc) for item in raw]
        elif shape == "op":
            fields[name] = _op_name(raw, loc)
        elif shape == "ops":
            if not isinstance(raw, list) or not raw:
                raise MalformedAst(f"{kind}.{name} is not a non-empty list", loc)
            fields[name] = [_op_name(item, loc) for item in raw]
        else:  # atom
            fields[name] = raw
    return AstNode(kind, loc, fields)


def to_json_dict(node: AstNode) -> dict[str, Any]:
    """Serialize back to the dumper's JSON shape (used by --dump-annotated)."""
    out: dict[str, Any] = {"_type": node.kind}
    if node.loc is not None:
        out["lineno"] = node.loc.line
        out["col_offset"] = node.loc.col
    schema = NODE_SCHEMA[node.kind]
    for name, shape in schema.items():
        value = node.fields.get(name)
        if shape == "node":
            out[name] = to_json_dict(value)
        elif shape == "node?":
            out[name] = None if value is None else to_json_dict(value)
        elif shape == "nodes":
            out[name] = [to_json_dict(item) for item in value]
        elif shape == "op":
            out[name] = {"_type": value}
        elif shape == "ops":
            out[name] = [{"_type": item} for item in value]
        else:
            out[name] = value
    return out


def count_nodes(node: AstNode) -> int:
    return sum(1 for _ in node.walk())


def assigned_names(body: list[AstNode]) -> set[str]:
    """Names bound by assignment/for-loops in a statement list (Python's
    local-discovery rule: any assignment anywhere in the body creates a local)."""
    names: set[str] = set()

    def scan(stmts: list[AstNode]) -> None:
        for stmt in stmts:
            if stmt.kind in ("Assign", "AnnAssign"):
                targets = stmt["targets"] if stmt.kind == "Assign" else [stmt["target"]]
                for t in targets:
                    if t.kind == "Name":
                        names.add(t["id"])
            elif stmt.kind == "For":
                if stmt["target"].kind == "Name":
                    names.add(stmt["target"]["id"])
                scan(stmt["body"])
            elif stmt.kind in ("If", "While"):
                scan(stmt["body"])
                scan(stmt.fields.get("orelse") or [])

    scan(body)
    return names
