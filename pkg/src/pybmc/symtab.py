"""Symbol table construction and verification entry synthesis.

Declarations become flat, fully-qualified symbols (``module@class@func@name``
segments joined with ``@``). Module-level statements of the main module are
collected into a synthetic top-level function; under ``--function`` isolation
the entry instead declares one nondeterministic value per parameter of the
target and calls it. Member lookup searches the defining class first, then
its bases depth-first in declared order (leftmost base wins).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .astnodes import AstNode
from .errors import DuplicateDefinition, FunctionNotFound, Loc, MemberNotFound, UnresolvedName
from .ingest import ProgramUnit
from .typeinfer import ClassInfo, FuncInfo, TypeInfo, func_qname
from .vtypes import NONE, ClassType, FuncType, VerifierType

ENTRY_NAME = "%main"


@dataclass(frozen=True)
class Symbol:
    qualified_name: str
    type: VerifierType
    kind: str  # variable | parameter | function | class | attribute | method
    loc: Loc | None = None
    value: AstNode | None = None  # initializer where one exists


@dataclass
class Harness:
    """Synthetic isolation entry: nondet arguments, then one call."""

    target: str  # FuncInfo qname
    params: list[tuple[str, VerifierType]]
    receiver_class: str | None = None


@dataclass
class SymbolTable:
    unit: ProgramUnit
    info: TypeInfo
    symbols: dict[str, Symbol] = field(default_factory=dict)
    functions: dict[str, FuncInfo] = field(default_factory=dict)
    classes: dict[str, ClassInfo] = field(default_factory=dict)
    entry: str | None = None
    entry_body: list[AstNode] = field(default_factory=list)
    entry_harness: Harness | None = None

    def add(self, symbol: Symbol) -> None:
        if symbol.qualified_name in self.symbols:
            raise DuplicateDefinition(
                f"duplicate definition of {symbol.qualified_name}", symbol.loc)
        self.symbols[symbol.qualified_name] = symbol

    def mro(self, cls: str) -> list[str]:
        return self.info.mro(cls)


def _local_decls(fn: FuncInfo, expr_types: dict[int, VerifierType]) -> dict[str, tuple]:
    """Locals of a function body: name -> (type, loc). Parameters excluded."""
    out: dict[str, tuple] = {}

    def scan(stmts: list[AstNode]) -> None:
        for stmt in stmts:
            if stmt.kind == "AnnAssign" and stmt["target"].kind == "Name":
                name = stmt["target"]["id"]
                t = expr_types.get(id(stmt["target"]))
                if name not in out and name not in fn.param_names and t is not None:
                    out[name] = (t, stmt.loc)
            elif stmt.kind == "For":
                target = stmt["target"]
                t = expr_types.get(id(target))
                if target["id"] not in out and t is not None:
                    out[target["id"]] = (t, stmt.loc)
                scan(stmt["body"])
            elif stmt.kind in ("If", "While"):
                scan(stmt["body"])
                scan(stmt.fields.get("orelse") or [])

    scan(fn.node["body"])
    return out


def _called_qnames(info: TypeInfo, body: list[AstNode]) -> set[str]:
    """Functions/methods/constructors a statement list can reach directly."""
    out: set[str] = set()
    for stmt in body:
        for node in stmt.walk():
            target = info.call_targets.get(id(node))
            if target is None or target.qname is None:
                continue
            out.add(target.qname)
            if target.kind == "method":
                # dynamic receiver classes share the method name along the MRO;
                # static typing already picked the one resolution, keep it only
                continue
    return out


def build_symbol_table(unit: ProgramUnit) -> SymbolTable:
    """One Symbol per retained declaration, plus the synthetic top level."""
    info: TypeInfo = unit.type_info
    if info is None:
        raise UnresolvedName("unit has not been annotated")
    st = SymbolTable(unit=unit, info=info)

    main = unit.module_name
    top_level = [
        stmt for stmt in unit.main_module["body"]
        if stmt.kind not in ("FunctionDef", "ClassDef", "Import", "ImportFrom")
    ]

    retained_funcs = _retained_functions(unit, info, top_level)
    retained_classes = _retained_classes(info, retained_funcs)

    for cls_name in retained_classes:
        cls = info.classes[cls_name]
        st.classes[cls_name] = cls
        st.add(Symbol(func_qname(cls.module, None, cls_name), ClassType(cls_name),
                      "class", cls.node.loc))
        for attr, t in cls.attrs.items():
            st.add(Symbol(func_qname(cls.module, cls_name, attr), t, "attribute",
                          cls.node.loc, cls.attr_defaults.get(attr)))

    for qname in retained_funcs:
        fn = info.functions[qname]
        st.functions[qname] = fn
        st.add(Symbol(qname, fn.sig, "method" if fn.cls else "function", fn.node.loc))
        for pname, ptype in zip(fn.param_names, fn.param_types):
            st.add(Symbol(f"{qname}@{pname}", ptype, "parameter", fn.node.loc))
        for lname, (ltype, lloc) in _local_decls(fn, unit.expr_types).items():
            st.add(Symbol(f"{qname}@{lname}", ltype, "variable", lloc))

    # module-level variables (main module only runs; imported ones are constants)
    for module, mvars in info.module_vars.items():
        if unit.isolated_function and module == main:
            continue
        for name, t in mvars.items():
            init = _module_var_init(unit.all_modules()[module], name)
            st.add(Symbol(f"{module}@{name}", t, "variable",
                          init.loc if init is not None else None, init))

    entry_qname = func_qname(main, None, ENTRY_NAME)
    st.entry = entry_qname
    st.entry_body = [] if unit.isolated_function else top_level
    st.add(Symbol(entry_qname, FuncType((), NONE), "function", None))

    _validate_names(st)
    return st


def _module_var_init(module: AstNode, name: str) -> AstNode | None:
    for stmt in module["body"]:
        if stmt.kind == "AnnAssign" and stmt["target"].kind == "Name" \
                and stmt["target"]["id"] == name:
            return stmt["value"]
    return None


def _retained_functions(unit: ProgramUnit, info: TypeInfo,
                        top_level: list[AstNode]) -> list[str]:
    if unit.isolated_function is None:
        # no isolation: keep every definition (dead ones are still declared)
        return list(info.functions)
    name = unit.isolated_function
    if "." in name:
        cls, meth = name.split(".", 1)
        fn = info.find_method(cls, meth) if cls in info.classes else None
    else:
        fn = info.functions.get(func_qname(unit.module_name, None, name))
    if fn is None:
        raise FunctionNotFound(f"function {name!r} not found")
    retained: list[str] = []
    work = [fn.qname]
    while work:
        qname = work.pop()
        if qname in retained:
            continue
        retained.append(qname)
        body = info.functions[qname].node["body"]
        for callee in sorted(_called_qnames(info, body)):
            if callee not in retained:
                work.append(callee)
    return retained


def _retained_classes(info: TypeInfo, retained_funcs: list[str]) -> list[str]:
    names: list[str] = []

    def keep(cls: str) -> None:
        for name in info.mro(cls):
            if name not in names:
                names.append(name)

    def keep_type(t: VerifierType) -> None:
        if isinstance(t, ClassType) and t.name in info.classes:
            keep(t.name)

    for qname in retained_funcs:
        fn = info.functions[qname]
        if fn.cls is not None:
            keep(fn.cls)
        for t in fn.param_types:
            keep_type(t)
    for cls in list(names):
        for t in info.classes[cls].attrs.values():
            keep_type(t)
    if not retained_funcs or retained_funcs == list(info.functions):
        # no isolation: all classes stay in scope
        for cls in info.classes:
            keep(cls)
    return names


def _validate_names(st: SymbolTable) -> None:
    """Every value-position Name in a retained body got typed during annotation."""
    bodies = [st.entry_body] + [fn.node["body"] for fn in st.functions.values()]
    skip: set[int] = set()
    for body in bodies:
        for stmt in body:
            for node in stmt.walk():
                # names that are resolved through their parent node instead
                if node.kind == "AnnAssign":
                    skip.update(id(sub) for sub in node["annotation"].walk())
                elif node.kind == "FunctionDef" and node["returns"] is not None:
                    skip.update(id(sub) for sub in node["returns"].walk())
                elif node.kind == "Call":
                    skip.update(id(sub) for sub in node["func"].walk())
                elif node.kind == "Attribute":
                    skip.add(id(node["value"]))
                elif node.kind == "arg":
                    skip.update(id(sub) for sub in node.walk())
    for body in bodies:
        for stmt in body:
            for node in stmt.walk():
                if node.kind == "Name" and id(node) not in skip \
                        and id(node) not in st.unit.expr_types:
                    raise UnresolvedName(f"name {node['id']!r} was never resolved",
                                         node.loc)


def resolve_member(st: SymbolTable, cls: str, member: str) -> Symbol:
    """Own member first, then bases depth-first left-to-right."""
    if cls not in st.info.classes:
        raise MemberNotFound(cls, member)
    for name in st.info.mro(cls):
        cls_info = st.info.classes[name]
        if member in cls_info.attrs:
            return st.symbols[func_qname(cls_info.module, name, member)]
        if member in cls_info.methods:
            return st.symbols[cls_info.methods[member]]
    raise MemberNotFound(cls, member)


def synthesize_entry(st: SymbolTable, isolated: str | None) -> SymbolTable:
    """Install the verification entry; nondet-parameter harness when isolated."""
    if isolated is None:
        return st
    unit = st.unit
    if "." in isolated:
        cls, meth = isolated.split(".", 1)
        fn = st.info.find_method(cls, meth) if cls in st.info.classes else None
    else:
        fn = st.info.functions.get(func_qname(unit.module_name, None, isolated))
        if fn is None:  # a bare method name works when unambiguous
            matches = [f for f in st.functions.values() if f.name == isolated]
            fn = matches[0] if len(matches) == 1 else None
    if fn is None:
        raise FunctionNotFound(f"function {isolated!r} not found")
    params = list(zip(fn.param_names, fn.param_types))
    receiver_class = None
    if fn.cls is not None:
        receiver_class = fn.param_types[0].name if isinstance(fn.param_types[0], ClassType) else fn.cls
    harness = Harness(fn.qname, params, receiver_class)
    st.entry_harness = harness
    entry = st.symbols[st.entry]
    for pname, ptype in params:
        qname = f"{st.entry}@{pname}"
        if qname not in st.symbols:
            st.add(Symbol(qname, ptype, "variable", fn.node.loc))
    return st


def render_symbol_table(st: SymbolTable) -> str:
    lines = []
    for symbol in st.symbols.values():
        lines.append(f"{symbol.qualified_name:48s} {symbol.kind:10s} {symbol.type}")
    return "\n".join(lines)
