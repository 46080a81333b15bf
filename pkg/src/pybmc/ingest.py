"""Loading, validating and organizing dumped ASTs into a program unit.

A :class:`ProgramUnit` owns the main module plus everything it imports,
resolved from pre-dumped ``<module>.json`` files (or ``<module>.py`` through
the external dumper when one is installed). Function isolation marks a
single function as the verification target.
"""
from __future__ import annotations

import json
import shutil
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .astnodes import AstNode, node_from_json
from .errors import (
    FunctionNotFound,
    ImportCycle,
    Loc,
    MalformedAst,
    ModuleLookupError,
    UnsupportedConstruct,
    VerifierError,
)

# Host AST dialects this front-end is tested against (documented in README).
SUPPORTED_PY_MINORS = range(9, 14)

DUMPER_COMMAND = "ast-dump"

# Binding of a local name inside a module's namespace.
#   ("module", "helper")       -- import helper [as h]
#   ("member", "helper", "f")  -- from helper import f [as g]
Binding = tuple


@dataclass
class ProgramUnit:
    """A loaded main module, its resolved imports, and the isolation mark."""

    main_module: AstNode
    module_name: str
    source_path: str
    imported_modules: dict[str, AstNode] = field(default_factory=dict)
    module_files: dict[str, str] = field(default_factory=dict)
    bindings: dict[str, dict[str, Binding]] = field(default_factory=dict)
    isolated_function: str | None = None
    # Filled by the annotator: id(expr node) -> VerifierType, plus registries.
    expr_types: dict[int, Any] = field(default_factory=dict)
    type_info: Any = None

    def all_modules(self) -> dict[str, AstNode]:
        out = {self.module_name: self.main_module}
        out.update(self.imported_modules)
        return out

    def file_of(self, module: str) -> str:
        if module == self.module_name:
            return self.source_path
        return self.module_files.get(module, f"{module}.py")


def _check_python_version(doc: dict[str, Any]) -> None:
    version = doc.get("python_version")
    if version is None:
        return
    parts = str(version).split(".")
    try:
        major, minor = int(parts[0]), int(parts[1])
    except (IndexError, ValueError):
        raise MalformedAst(f"unparseable python_version {version!r}")
    if major != 3 or minor not in SUPPORTED_PY_MINORS:
        raise MalformedAst(
            f"AST dumped by Python {version}; supported: 3.{SUPPORTED_PY_MINORS.start}"
            f"-3.{SUPPORTED_PY_MINORS.stop - 1}"
        )


def load_ast(doc: dict[str, Any]) -> AstNode:
    """Validate a parsed JSON document and build the module's AstNode tree."""
    if not isinstance(doc, dict):
        raise MalformedAst("document root is not an object")
    if doc.get("_type") != "Module":
        raise MalformedAst(f"document root is {doc.get('_type')!r}, expected Module")
    _check_python_version(doc)
    return node_from_json(doc)


def dump_source(py_path: Path) -> dict[str, Any]:
    """Shell out to the external dumper for raw ``.py`` input."""
    dumper = shutil.which(DUMPER_COMMAND)
    if dumper is None:
        sibling = py_path.with_suffix(".json")
        if sibling.exists():
            return json.loads(sibling.read_text())
        raise ModuleLookupError(
            f"{py_path} is Python source, `{DUMPER_COMMAND}` is not installed and "
            f"no pre-dumped {sibling.name} exists next to it"
        )
    proc = subprocess.run(
        [dumper, str(py_path)], capture_output=True, text=True
    )
    if proc.returncode != 0:
        raise VerifierError(
            f"dumper failed on {py_path}: {proc.stderr.strip()}"
        )
    return json.loads(proc.stdout)


def load_file(path: str | Path) -> ProgramUnit:
    """Load a ``.json`` AST dump (or ``.py`` via the dumper fallback)."""
    p = Path(path)
    if not p.exists():
        raise ModuleLookupError(f"no such file: {p}")
    if p.suffix == ".py":
        doc = dump_source(p)
        display = p.name
    else:
        doc = json.loads(p.read_text())
        display = p.with_suffix(".py").name
    module = load_ast(doc)
    return ProgramUnit(
        main_module=module,
        module_name=p.stem,
        source_path=display,
        bindings={p.stem: {}},
    )


# --- imports ---

def _top_level_imports(module: AstNode) -> list[AstNode]:
    found = [stmt for stmt in module["body"] if stmt.kind in ("Import", "ImportFrom")]
    found_ids = {id(stmt) for stmt in found}
    # imports anywhere deeper are outside the subset
    for node in module.walk():
        if node.kind in ("Import", "ImportFrom") and id(node) not in found_ids:
            raise UnsupportedConstruct("non-top-level import", node.loc)
    return found


def _load_module_file(name: str, search_dir: Path, loc: Loc | None) -> AstNode:
    json_path = search_dir / f"{name}.json"
    py_path = search_dir / f"{name}.py"
    if json_path.exists():
        return load_ast(json.loads(json_path.read_text()))
    if py_path.exists():
        return load_ast(dump_source(py_path))
    raise ModuleLookupError(f"module {name!r} not found in {search_dir}", loc)


def resolve_imports(unit: ProgramUnit, search_dir: str | Path) -> ProgramUnit:
    """Recursively load every imported module; rejects cycles."""
    search = Path(search_dir)
    stack: list[str] = []

    def visit(name: str, module: AstNode) -> None:
        if name in stack:
            raise ImportCycle(stack[stack.index(name):] + [name])
        stack.append(name)
        binds = unit.bindings.setdefault(name, {})
        for imp in _top_level_imports(module):
            if imp.kind == "Import":
                for alias in imp["names"]:
                    target = alias["name"]
                    local = alias["asname"] or target
                    binds[local] = ("module", target)
                    _ensure_loaded(target, imp.loc)
            else:
                target = imp["module"]
                if target is None:
                    raise UnsupportedConstruct("import without module", imp.loc)
                _ensure_loaded(target, imp.loc)
                for alias in imp["names"]:
                    member = alias["name"]
                    local = alias["asname"] or member
                    binds[local] = ("member", target, member)
        stack.pop()

    def _ensure_loaded(name: str, loc: Loc | None) -> None:
        if name == unit.module_name:
            raise ImportCycle([unit.module_name, name])
        if name in unit.imported_modules:
            if name in stack:
                raise ImportCycle(stack[stack.index(name):] + [name])
            return
        module = _load_module_file(name, search, loc)
        unit.imported_modules[name] = module
        unit.module_files[name] = f"{name}.py"
        visit(name, module)

    visit(unit.module_name, unit.main_module)
    return unit


# --- isolation ---

def find_function(unit: ProgramUnit, name: str) -> AstNode:
    """Locate a top-level function or ``Class.method`` in the main module."""
    if "." in name:
        cls_name, meth = name.split(".", 1)
        for stmt in unit.main_module["body"]:
            if stmt.kind == "ClassDef" and stmt["name"] == cls_name:
                for item in stmt["body"]:
                    if item.kind == "FunctionDef" and item["name"] == meth:
                        return item
        raise FunctionNotFound(f"function {name!r} not found")
    for stmt in unit.main_module["body"]:
        if stmt.kind == "FunctionDef" and stmt["name"] == name:
            return stmt
    raise FunctionNotFound(f"function {name!r} not found")


def isolate_function(unit: ProgramUnit, name: str) -> ProgramUnit:
    find_function(unit, name)
    unit.isolated_function = name
    return unit


# --- parse tree rendering ---

_ATOM_FIELDS = ("name", "id", "attr", "arg", "value", "op")


def _node_summary(node: AstNode) -> str:
    bits = []
    for f in _ATOM_FIELDS:
        v = node.fields.get(f)
        if isinstance(v, (str, int, float, bool)) and node.kind != "Constant":
            bits.append(f"{v}")
            break
    if node.kind == "Constant":
        bits.append(repr(node.fields.get("value")))
    loc = f" @ {node.loc}" if node.loc else ""
    extra = f" ({', '.join(bits)})" if bits else ""
    return f"{node.kind}{extra}{loc}"


def render_parse_tree(unit: ProgramUnit) -> str:
    """Human-readable tree, exactly one line per AST node."""
    lines: list[str] = []

    def emit(node: AstNode, depth: int) -> None:
        lines.append("  " * depth + _node_summary(node))
        for child in node.children():
            emit(child, depth + 1)

    emit(unit.main_module, 0)
    for name in sorted(unit.imported_modules):
        emit(unit.imported_modules[name], 0)
    return "\n".join(lines)
