"""Type inference, annotation insertion and consistency checking.

One engine drives both operations: :func:`infer_and_annotate` runs it in
raising mode and rewrites every bare ``Assign`` into an ``AnnAssign`` (never
touching explicit annotations), while :func:`check_types` runs it in
collecting mode and returns diagnostics instead of raising.

Inference rules: int literals default to the configured ``int`` width but
adapt to the integer type imposed by context when the value fits; float
literals are binary64; ``True``/``False`` are bool; calls take the declared
return type; mixing int and float widens to float; everything else must
match exactly (mixed-width integer arithmetic needs an explicit conversion
such as ``uint64(x)``).
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .astnodes import AstNode, assigned_names
from .errors import Loc, TypeConflict, UnknownName, UntypeableExpression, VerifierError
from .ingest import ProgramUnit
from .vtypes import (
    BOOL,
    FLOAT,
    NONE,
    BoolType,
    ClassType,
    FloatType,
    FuncType,
    IntType,
    ListType,
    NoneType,
    UNSIGNED_NAMES,
    VerifierType,
    annotation_text,
    compatible,
    default_int,
    is_numeric,
    parse_annotation,
)

NONDET_CALLS = {"nondet_int": "int", "nondet_bool": "bool", "nondet_float": "float"}
CONVERSION_NAMES = ("int", "float", "bool") + tuple(UNSIGNED_NAMES)
ASSUME_NAME = "__ESBMC_assume"
BUILTIN_FUNCS = {"abs", "min", "max", "len"}

ARITH_OPS = {"Add", "Sub", "Mult"}
INT_ONLY_OPS = {"FloorDiv", "Mod", "LShift", "RShift", "BitOr", "BitXor", "BitAnd"}


@dataclass(frozen=True)
class ErrorType:
    """Poison type used in collecting mode so one defect yields one diagnostic."""

    def __str__(self) -> str:
        return "<error>"


ERROR = ErrorType()


@dataclass
class Diagnostic:
    message: str
    module: str
    loc: Loc | None

    def __str__(self) -> str:
        where = f"{self.module}:{self.loc}" if self.loc else self.module
        return f"{where}: {self.message}"


@dataclass
class FuncInfo:
    """A registered function or method with its resolved signature."""

    qname: str
    module: str
    cls: str | None
    name: str
    node: AstNode
    param_names: list[str]
    param_types: list[VerifierType]
    ret: VerifierType | None  # None until inferred

    @property
    def sig(self) -> FuncType:
        return FuncType(tuple(self.param_types), self.ret if self.ret is not None else NONE)


@dataclass
class ClassInfo:
    name: str
    module: str
    bases: list[str]
    node: AstNode
    attrs: dict[str, VerifierType] = field(default_factory=dict)
    attr_defaults: dict[str, AstNode] = field(default_factory=dict)
    methods: dict[str, str] = field(default_factory=dict)  # name -> FuncInfo qname


@dataclass
class CallTarget:
    """Resolution of one Call node, recorded for the converter."""

    kind: str  # "func" | "method" | "base_method" | "ctor" | "nondet" | "convert" | "builtin" | "assume"
    qname: str | None = None  # FuncInfo key where applicable
    detail: str | None = None  # builtin/conversion name


@dataclass
class TypeInfo:
    """Registries shared with the symbol-table builder."""

    classes: dict[str, ClassInfo] = field(default_factory=dict)
    functions: dict[str, FuncInfo] = field(default_factory=dict)
    module_vars: dict[str, dict[str, VerifierType]] = field(default_factory=dict)
    call_targets: dict[int, CallTarget] = field(default_factory=dict)
    list_lengths: dict[int, int] = field(default_factory=dict)  # id(list var decl) unused

    def mro(self, cls: str) -> list[str]:
        """Depth-first left-to-right linearization (first occurrence wins)."""
        seen: list[str] = []

        def visit(name: str) -> None:
            if name not in seen:
                seen.append(name)
                for base in self.classes[name].bases:
                    visit(base)

        visit(cls)
        return seen

    def find_attr(self, cls: str, attr: str) -> tuple[str, VerifierType] | None:
        for name in self.mro(cls):
            info = self.classes[name]
            if attr in info.attrs:
                return name, info.attrs[attr]
        return None

    def find_method(self, cls: str, meth: str) -> FuncInfo | None:
        for name in self.mro(cls):
            info = self.classes[name]
            if meth in info.methods:
                return self.functions[info.methods[meth]]
        return None

    def record_fields(self, cls: str) -> dict[str, VerifierType]:
        """Flattened field set of an instance: union over the MRO, leftmost wins."""
        fields: dict[str, VerifierType] = {}
        for name in self.mro(cls):
            for attr, t in self.classes[name].attrs.items():
                fields.setdefault(attr, t)
        return fields


def func_qname(module: str, cls: str | None, name: str) -> str:
    return "@".join([module] + ([cls] if cls else []) + [name])


def _is_int_literal(node: AstNode) -> bool:
    if node.kind == "Constant" and type(node["value"]) is int:
        return True
    if node.kind == "UnaryOp" and node["op"] in ("USub", "UAdd"):
        return _is_int_literal(node["operand"])
    return False


def _int_literal_value(node: AstNode) -> int:
    if node.kind == "Constant":
        return node["value"]
    value = _int_literal_value(node["operand"])
    return -value if node["op"] == "USub" else value


def _make_annotation(t: VerifierType, loc: Loc | None) -> AstNode:
    """Build the annotation subtree the annotator inserts for type ``t``."""
    if isinstance(t, ListType):
        return AstNode("Subscript", loc, {
            "value": AstNode("Name", loc, {"id": "list"}),
            "slice": _make_annotation(t.elem, loc),
        })
    if isinstance(t, NoneType):
        return AstNode("Constant", loc, {"value": None})
    return AstNode("Name", loc, {"id": annotation_text(t)})


class _Scope:
    def __init__(self, parent: "_Scope | None" = None):
        self.parent = parent
        self.vars: dict[str, VerifierType] = {}
        # names that WILL be locals (assigned somewhere in the function);
        # reading one before its binding is an error rather than a global read
        self.future_locals: set[str] = set()

    def lookup(self, name: str) -> VerifierType | None:
        scope: _Scope | None = self
        while scope is not None:
            if name in scope.vars:
                return scope.vars[name]
            scope = scope.parent
        return None


class TypeChecker:
    """Single-pass-per-function bidirectional-ish checker over a unit."""

    def __init__(self, unit: ProgramUnit, int_width: int = 32,
                 collect: bool = False, annotate: bool = False):
        self.unit = unit
        self.int_width = int_width
        self.collect = collect
        self.annotate = annotate
        self.diagnostics: list[Diagnostic] = []
        self.info = TypeInfo()
        self.expr_types: dict[int, VerifierType] = {}
        self.current_module = unit.module_name
        self._inferring: set[str] = set()

    # -- error handling --

    def fail(self, message: str, loc: Loc | None,
             exc: type[VerifierError] = UntypeableExpression) -> VerifierType:
        if self.collect:
            self.diagnostics.append(Diagnostic(message, self.current_module, loc))
            return ERROR
        raise exc(message, loc)

    # -- driving --

    def run(self) -> None:
        modules = self._module_order()
        for module in modules:
            self.current_module = module
            self._register_module(self.unit.all_modules()[module])
        for module in modules:
            self.current_module = module
            self._check_module(self.unit.all_modules()[module])

    def _module_order(self) -> list[str]:
        """Imported modules before importers (import graph is acyclic)."""
        order: list[str] = []

        def visit(name: str) -> None:
            if name in order:
                return
            for bind in self.unit.bindings.get(name, {}).values():
                visit(bind[1])
            order.append(name)

        visit(self.unit.module_name)
        for name in self.unit.imported_modules:
            visit(name)
        return order

    # -- registration pre-pass --

    def _register_module(self, module: AstNode) -> None:
        self.info.module_vars.setdefault(self.current_module, {})
        for stmt in module["body"]:
            if stmt.kind == "ClassDef":
                self._register_class(stmt)
            elif stmt.kind == "FunctionDef":
                self._register_function(stmt, cls=None)

    def _class_names(self) -> set[str]:
        return set(self.info.classes)

    def _register_class(self, node: AstNode) -> None:
        name = node["name"]
        if name in self.info.classes:
            self.fail(f"duplicate class {name!r}", node.loc, TypeConflict)
            return
        bases = []
        for base in node["bases"]:
            if base.kind != "Name":
                self.fail("base classes must be simple names", base.loc)
                continue
            bases.append(base["id"])
        info = ClassInfo(name, self.current_module, bases, node)
        self.info.classes[name] = info
        for item in node["body"]:
            if item.kind == "FunctionDef":
                self._register_function(item, cls=name)
                info.methods[item["name"]] = func_qname(self.current_module, name, item["name"])
                if item["name"] == "__init__":
                    self._prescan_init_attrs(info, item)
            elif item.kind == "AnnAssign" and item["target"].kind == "Name":
                attr = item["target"]["id"]
                t = self._parse_ann(item["annotation"])
                info.attrs[attr] = t
                if item["value"] is not None:
                    info.attr_defaults[attr] = item["value"]
            elif item.kind in ("Pass", "Expr"):
                continue
            else:
                self.fail(f"unsupported statement in class body: {item.kind}", item.loc)

    def _prescan_init_attrs(self, info: ClassInfo, init: AstNode) -> None:
        """Register annotated/literal `self.x` attributes before bodies are typed."""
        params = init["args"]["args"]
        recv = params[0]["arg"] if params else "self"
        for stmt in init["body"]:
            target = stmt.fields.get("target") if stmt.kind == "AnnAssign" else None
            if stmt.kind == "Assign" and len(stmt["targets"]) == 1:
                target = stmt["targets"][0]
            if target is None or target.kind != "Attribute":
                continue
            if target["value"].kind != "Name" or target["value"]["id"] != recv:
                continue
            attr = target["attr"]
            if attr in info.attrs:
                continue
            if stmt.kind == "AnnAssign":
                info.attrs[attr] = self._parse_ann(stmt["annotation"])
            else:
                value = stmt["value"]
                if value.kind == "Constant":
                    v = value["value"]
                    if isinstance(v, bool):
                        info.attrs[attr] = BOOL
                    elif isinstance(v, int):
                        info.attrs[attr] = default_int(self.int_width)
                    elif isinstance(v, float):
                        info.attrs[attr] = FLOAT

    def _parse_ann(self, node: AstNode) -> VerifierType:
        try:
            return parse_annotation(node, self._all_class_names(), self.int_width)
        except VerifierError as e:
            if self.collect:
                return self.fail(str(e), node.loc)
            raise

    def _all_class_names(self) -> set[str]:
        names = set(self.info.classes)
        # forward references within the module being registered
        for module in self.unit.all_modules().values():
            for stmt in module["body"]:
                if stmt.kind == "ClassDef":
                    names.add(stmt["name"])
        return names

    def _register_function(self, node: AstNode, cls: str | None) -> None:
        qname = func_qname(self.current_module, cls, node["name"])
        if qname in self.info.functions:
            self.fail(f"duplicate function {node['name']!r}", node.loc, TypeConflict)
            return
        param_names: list[str] = []
        param_types: list[VerifierType] = []
        args = node["args"]["args"]
        for i, arg in enumerate(args):
            pname = arg["arg"]
            ann = arg["annotation"]
            if ann is None:
                if cls is not None and i == 0:
                    t: VerifierType = ClassType(cls)
                    if self.annotate:
                        arg.fields["annotation"] = _make_annotation(t, arg.loc)
                else:
                    t = self.fail(f"parameter {pname!r} requires a type annotation", arg.loc)
            else:
                t = self._parse_ann(ann)
            param_names.append(pname)
            param_types.append(t)
        ret = self._parse_ann(node["returns"]) if node["returns"] is not None else None
        self.info.functions[qname] = FuncInfo(
            qname, self.current_module, cls, node["name"], node,
            param_names, param_types, ret,
        )

    # -- checking pass --

    def _check_module(self, module: AstNode) -> None:
        scope = _Scope()
        mvars = self.info.module_vars.setdefault(self.current_module, {})
        definitions: list[AstNode] = []
        # top-level statements first: functions see the module variables that
        # exist by the time they can be called
        for stmt in module["body"]:
            if stmt.kind in ("FunctionDef", "ClassDef"):
                definitions.append(stmt)
            elif stmt.kind in ("Import", "ImportFrom"):
                continue
            else:
                self._check_stmt(stmt, scope, func=None)
                mvars.clear()
                mvars.update(scope.vars)
        for stmt in definitions:
            if stmt.kind == "FunctionDef":
                self._check_function(func_qname(self.current_module, None, stmt["name"]))
            else:
                cls = stmt["name"]
                # __init__ first so unannotated attribute assignments are typed
                items = sorted(
                    (i for i in stmt["body"] if i.kind == "FunctionDef"),
                    key=lambda i: i["name"] != "__init__",
                )
                for item in items:
                    self._check_function(func_qname(self.current_module, cls, item["name"]))

    def _check_function(self, qname: str) -> FuncInfo:
        fn = self.info.functions[qname]
        if qname in self._inferring:
            self.fail(
                f"recursive function {fn.name!r} requires a return annotation",
                fn.node.loc,
            )
            fn.ret = ERROR
            return fn
        if getattr(fn, "_checked", False):
            return fn
        self._inferring.add(qname)
        prev_module = self.current_module
        self.current_module = fn.module
        scope = _Scope()
        scope.future_locals = assigned_names(fn.node["body"])
        for pname, ptype in zip(fn.param_names, fn.param_types):
            scope.vars[pname] = ptype
        returns: list[tuple[VerifierType, Loc | None]] = []
        for stmt in fn.node["body"]:
            self._check_stmt(stmt, scope, func=fn, returns=returns)
        if fn.ret is None:
            ret_types = {t for t, _ in returns if not isinstance(t, ErrorType)}
            if not ret_types:
                fn.ret = NONE
            elif len(ret_types) == 1:
                fn.ret = ret_types.pop()
            else:
                pretty = ", ".join(sorted(str(t) for t in ret_types))
                fn.ret = self.fail(
                    f"function {fn.name!r} returns conflicting types: {pretty}",
                    fn.node.loc, TypeConflict,
                )
            if self.annotate and not isinstance(fn.ret, ErrorType) and fn.node["returns"] is None:
                fn.node.fields["returns"] = _make_annotation(fn.ret, fn.node.loc)
        else:
            for t, loc in returns:
                if not isinstance(t, ErrorType) and not self._assignable(fn.ret, t):
                    self.fail(
                        f"return type {t} does not match declared {fn.ret}",
                        loc, TypeConflict,
                    )
        fn._checked = True  # type: ignore[attr-defined]
        self._inferring.discard(qname)
        self.current_module = prev_module
        return fn

    # -- statements --

    def _check_stmt(self, stmt: AstNode, scope: _Scope, func: FuncInfo | None,
                    returns: list | None = None) -> None:
        kind = stmt.kind
        if kind == "AnnAssign":
            self._check_ann_assign(stmt, scope, func)
        elif kind == "Assign":
            self._check_assign(stmt, scope, func)
        elif kind == "If":
            self._expect_bool(stmt["test"], scope)
            for s in stmt["body"]:
                self._check_stmt(s, scope, func, returns)
            for s in stmt["orelse"]:
                self._check_stmt(s, scope, func, returns)
        elif kind == "While":
            self._expect_bool(stmt["test"], scope)
            for s in stmt["body"]:
                self._check_stmt(s, scope, func, returns)
        elif kind == "For":
            self._check_for(stmt, scope, func, returns)
        elif kind == "Return":
            if func is None:
                self.fail("return outside function", stmt.loc)
                return
            t = NONE if stmt["value"] is None else self.type_expr(stmt["value"], scope)
            if returns is not None:
                returns.append((t, stmt.loc))
        elif kind == "Assert":
            self._expect_bool(stmt["test"], scope)
            msg = stmt["msg"]
            if msg is not None and not (msg.kind == "Constant" and isinstance(msg["value"], str)):
                self.fail("assert message must be a string literal", msg.loc)
        elif kind == "Expr":
            value = stmt["value"]
            if value.kind == "Constant" and isinstance(value["value"], str):
                return  # docstring
            if value.kind != "Call":
                self.fail("expression statement has no effect", stmt.loc)
                return
            self.type_expr(value, scope, statement=True)
        elif kind == "Pass":
            return
        elif kind in ("Import", "ImportFrom"):
            self.fail("imports are only allowed at module top level", stmt.loc)
        elif kind in ("FunctionDef", "ClassDef"):
            self.fail(f"nested {kind} is not supported", stmt.loc)
        else:
            self.fail(f"unsupported statement {kind}", stmt.loc)

    def _check_for(self, stmt: AstNode, scope: _Scope, func, returns) -> None:
        target = stmt["target"]
        if target.kind != "Name":
            self.fail("for target must be a simple name", target.loc)
            return
        it = stmt["iter"]
        if it.kind == "Call" and it["func"].kind == "Name" and it["func"]["id"] == "range":
            args = it["args"]
            if not 1 <= len(args) <= 3:
                self.fail("range() takes 1 to 3 arguments", it.loc)
                return
            first = self.type_expr(args[0], scope)
            loop_t: VerifierType = first if isinstance(first, IntType) else ERROR
            if not isinstance(first, (IntType, ErrorType)):
                loop_t = self.fail("range() arguments must be integers", args[0].loc)
            for arg in args[1:]:
                t = self.type_expr(arg, scope, expected=loop_t if isinstance(loop_t, IntType) else None)
                if not isinstance(t, (IntType, ErrorType)) or (
                    isinstance(loop_t, IntType) and t != loop_t
                ):
                    self.fail("range() arguments must share one integer type", arg.loc)
            if len(args) == 3 and not _is_int_literal(args[2]):
                self.fail("range() step must be an integer literal", args[2].loc)
            elif len(args) == 3 and _int_literal_value(args[2]) == 0:
                self.fail("range() step must not be zero", args[2].loc)
            self.info.call_targets[id(it)] = CallTarget("builtin", detail="range")
        elif it.kind == "List":
            t = self.type_expr(it, scope)
            loop_t = t.elem if isinstance(t, ListType) else ERROR
        else:
            self.fail("for iterates only over range(...) or a list literal", it.loc)
            return
        self._bind(target["id"], loop_t, scope, target.loc)
        self.expr_types[id(target)] = loop_t
        for s in stmt["body"]:
            self._check_stmt(s, scope, func, returns)

    def _bind(self, name: str, t: VerifierType, scope: _Scope, loc: Loc | None) -> None:
        existing = scope.lookup(name)
        if existing is not None and not isinstance(existing, ErrorType) \
                and not isinstance(t, ErrorType) and not compatible(existing, t):
            self.fail(
                f"{name!r} has type {existing}, cannot rebind with {t}",
                loc, TypeConflict,
            )
            return
        if existing is None or isinstance(existing, ErrorType):
            scope.vars[name] = t

    def _check_ann_assign(self, stmt: AstNode, scope: _Scope, func: FuncInfo | None) -> None:
        declared = self._parse_ann(stmt["annotation"])
        target = stmt["target"]
        value = stmt["value"]
        if value is not None:
            actual = self.type_expr(value, scope, expected=declared)
            declared = self._merge_decl(declared, actual, stmt.loc)
        if target.kind == "Name":
            self._bind(target["id"], declared, scope, stmt.loc)
            self.expr_types[id(target)] = declared
        elif target.kind == "Attribute":
            self._check_attr_target(target, declared, scope, func)
        elif target.kind == "Subscript":
            self._check_subscript_target(target, declared, scope)
        else:
            self.fail("unsupported assignment target", target.loc)

    def _merge_decl(self, declared: VerifierType, actual: VerifierType,
                    loc: Loc | None) -> VerifierType:
        if isinstance(declared, ErrorType) or isinstance(actual, ErrorType):
            return declared
        if isinstance(declared, ListType) and isinstance(actual, ListType) \
                and declared.elem == actual.elem and declared.length == -1:
            return actual
        if isinstance(declared, FloatType) and isinstance(actual, IntType):
            return declared  # implicit int -> float widening on assignment
        if not compatible(declared, actual):
            self.fail(f"cannot assign {actual} to {declared}", loc, TypeConflict)
        return declared

    def _check_assign(self, stmt: AstNode, scope: _Scope, func: FuncInfo | None) -> None:
        targets = stmt["targets"]
        if len(targets) != 1:
            self.fail("chained assignment is not supported", stmt.loc)
            return
        target = targets[0]
        value = stmt["value"]
        if target.kind == "Name":
            expected = scope.lookup(target["id"])
            t = self.type_expr(value, scope, expected=expected)
            if isinstance(t, NoneType):
                t = self.fail("cannot assign a None value", stmt.loc)
            self._bind(target["id"], t, scope, stmt.loc)
            self.expr_types[id(target)] = t
        elif target.kind == "Attribute":
            t = self._infer_attr_assign(target, value, scope, func)
        elif target.kind == "Subscript":
            t = self._check_subscript_target(target, None, scope, value)
        else:
            self.fail("unsupported assignment target", target.loc)
            return
        if self.annotate:
            t_final = self.expr_types.get(id(target), ERROR)
            if not isinstance(t_final, ErrorType):
                # rewrite in place: Assign -> AnnAssign (subscript targets keep
                # their element type; this shape never reaches a Python parser)
                stmt.kind = "AnnAssign"
                stmt.fields = {
                    "target": target,
                    "annotation": _make_annotation(t_final, stmt.loc),
                    "value": value,
                }

    def _infer_attr_assign(self, target: AstNode, value: AstNode,
                           scope: _Scope, func: FuncInfo | None) -> VerifierType:
        t = self.type_expr(value, scope)
        self._check_attr_target(target, t, scope, func, declare=True)
        return t

    def _check_attr_target(self, target: AstNode, declared: VerifierType,
                           scope: _Scope, func: FuncInfo | None,
                           declare: bool = False) -> None:
        base = target["value"]
        attr = target["attr"]
        if base.kind != "Name":
            self.fail("only single-level attribute targets are supported", target.loc)
            return
        base_t = self._lookup_name(base["id"], base.loc, scope)
        if isinstance(base_t, ErrorType):
            return
        if not isinstance(base_t, ClassType):
            self.fail(f"{base['id']!r} is not a class instance", base.loc)
            return
        found = self.info.find_attr(base_t.name, attr)
        if found is None:
            in_init = (func is not None and func.cls is not None
                       and func.name == "__init__" and base_t.name == func.cls)
            if in_init and not isinstance(declared, ErrorType):
                self.info.classes[func.cls].attrs[attr] = declared
            else:
                self.fail(
                    f"attribute {attr!r} is not declared by class {base_t.name} "
                    "(declare it in the class body or __init__)",
                    target.loc,
                )
            self.expr_types[id(target)] = declared
            return
        _, existing = found
        if not isinstance(declared, ErrorType) and not self._assignable(existing, declared):
            self.fail(f"attribute {attr!r} has type {existing}, got {declared}",
                      target.loc, TypeConflict)
        self.expr_types[id(target)] = existing

    def _check_subscript_target(self, target: AstNode, declared: VerifierType | None,
                                scope: _Scope, value: AstNode | None = None) -> VerifierType:
        base_t = self.type_expr(target["value"], scope)
        index_t = self.type_expr(target["slice"], scope)
        if not isinstance(base_t, (ListType, ErrorType)):
            return self.fail("subscript assignment target must be a list", target.loc)
        if not isinstance(index_t, (IntType, ErrorType)):
            self.fail("list index must be an integer", target["slice"].loc)
        elem = base_t.elem if isinstance(base_t, ListType) else ERROR
        if value is not None:
            actual = self.type_expr(value, scope, expected=elem)
            if not isinstance(elem, ErrorType) and not isinstance(actual, ErrorType) \
                    and not self._assignable(elem, actual):
                self.fail(f"cannot store {actual} in list of {elem}", target.loc, TypeConflict)
        if declared is not None and not isinstance(elem, ErrorType) \
                and not isinstance(declared, ErrorType) and declared != elem:
            self.fail(f"annotation {declared} does not match element type {elem}",
                      target.loc, TypeConflict)
        self.expr_types[id(target)] = elem
        return elem

    def _assignable(self, declared: VerifierType, actual: VerifierType) -> bool:
        if isinstance(declared, ErrorType) or isinstance(actual, ErrorType):
            return True
        if isinstance(declared, FloatType) and isinstance(actual, IntType):
            return True
        return compatible(declared, actual)

    # -- expressions --

    def _expect_bool(self, node: AstNode, scope: _Scope) -> None:
        t = self.type_expr(node, scope, expected=BOOL)
        if not isinstance(t, (BoolType, ErrorType)):
            self.fail(f"condition must be bool, got {t}", node.loc)

    def type_expr(self, node: AstNode, scope: _Scope,
                  expected: VerifierType | None = None,
                  statement: bool = False) -> VerifierType:
        t = self._type_expr_inner(node, scope, expected, statement)
        self.expr_types[id(node)] = t
        return t

    def _type_expr_inner(self, node: AstNode, scope: _Scope,
                         expected: VerifierType | None,
                         statement: bool = False) -> VerifierType:
        kind = node.kind

        if _is_int_literal(node):
            return self._type_int_literal(node, expected)

        if kind == "Constant":
            return self._type_constant(node, expected)

        if kind == "Name":
            return self._lookup_name(node["id"], node.loc, scope)

        if kind == "UnaryOp":
            return self._type_unary(node, scope, expected)

        if kind == "BinOp":
            return self._type_binop(node, scope, expected)

        if kind == "BoolOp":
            for value in node["values"]:
                self._expect_bool(value, scope)
            return BOOL

        if kind == "Compare":
            return self._type_compare(node, scope)

        if kind == "Call":
            return self._type_call(node, scope, statement=statement)

        if kind == "Attribute":
            return self._type_attribute(node, scope)

        if kind == "Subscript":
            base_t = self.type_expr(node["value"], scope)
            index_t = self.type_expr(node["slice"], scope)
            if not isinstance(index_t, (IntType, ErrorType)):
                self.fail("list index must be an integer", node["slice"].loc)
            if isinstance(base_t, ListType):
                return base_t.elem
            if isinstance(base_t, ErrorType):
                return ERROR
            return self.fail("subscripted value is not a list", node.loc)

        if kind == "List":
            return self._type_list(node, scope, expected)

        return self.fail(f"unsupported expression {kind}", node.loc)

    def _type_int_literal(self, node: AstNode, expected: VerifierType | None) -> VerifierType:
        value = _int_literal_value(node)
        if isinstance(expected, IntType):
            if expected.fits(value):
                return expected
            return self.fail(f"literal {value} does not fit in {expected}", node.loc)
        if isinstance(expected, FloatType):
            return FLOAT
        t = default_int(self.int_width)
        if not t.fits(value):
            return self.fail(f"literal {value} does not fit in {t}", node.loc)
        return t

    def _type_constant(self, node: AstNode, expected: VerifierType | None) -> VerifierType:
        value = node["value"]
        if isinstance(value, bool):
            return BOOL
        if isinstance(value, float):
            return FLOAT
        if value is None:
            return NONE
        return self.fail("string values are not supported", node.loc)

    def _lookup_name(self, name: str, loc: Loc | None, scope: _Scope) -> VerifierType:
        t = scope.lookup(name)
        if t is not None:
            return t
        if name in scope.future_locals:
            return self.fail(f"local variable {name!r} used before assignment",
                             loc, UnknownName)
        module_vars = self.info.module_vars.get(self.current_module, {})
        if name in module_vars:
            return module_vars[name]
        qname = func_qname(self.current_module, None, name)
        if qname in self.info.functions:
            return self.info.functions[qname].sig
        binding = self.unit.bindings.get(self.current_module, {}).get(name)
        if binding is not None:
            if binding[0] == "member":
                return self._member_type(binding[1], binding[2], loc)
            return self.fail(f"module {name!r} cannot be used as a value", loc)
        if name in self.info.classes:
            return self.fail(f"class {name!r} cannot be used as a value", loc)
        return self.fail(f"unknown name {name!r}", loc, UnknownName)

    def _member_type(self, module: str, member: str, loc: Loc | None) -> VerifierType:
        qname = func_qname(module, None, member)
        if qname in self.info.functions:
            return self.info.functions[qname].sig
        if member in self.info.classes and self.info.classes[member].module == module:
            return ClassType(member)
        if member in self.info.module_vars.get(module, {}):
            return self.info.module_vars[module][member]
        return self.fail(f"module {module!r} has no member {member!r}", loc, UnknownName)

    def _type_unary(self, node: AstNode, scope: _Scope,
                    expected: VerifierType | None) -> VerifierType:
        op = node["op"]
        if op == "Not":
            self._expect_bool(node["operand"], scope)
            return BOOL
        t = self.type_expr(node["operand"], scope,
                           expected=expected if op in ("USub", "UAdd") else None)
        if op == "Invert":
            if not isinstance(t, (IntType, ErrorType)):
                return self.fail(f"~ needs an integer, got {t}", node.loc)
            return t
        if not (is_numeric(t) or isinstance(t, ErrorType)):
            return self.fail(f"unary {op} needs a numeric operand, got {t}", node.loc)
        return t

    def _type_binop(self, node: AstNode, scope: _Scope,
                    expected: VerifierType | None) -> VerifierType:
        op = node["op"]
        left, right = node["left"], node["right"]
        int_expected = expected if isinstance(expected, IntType) else None
        # literals adapt to the non-literal side
        if _is_int_literal(left) and not _is_int_literal(right):
            tr = self.type_expr(right, scope, expected=int_expected)
            tl = self.type_expr(left, scope, expected=tr if isinstance(tr, IntType) else expected)
        else:
            tl = self.type_expr(left, scope, expected=int_expected)
            tr = self.type_expr(right, scope, expected=tl if isinstance(tl, IntType) else int_expected)
        if isinstance(tl, ErrorType) or isinstance(tr, ErrorType):
            return ERROR

        if op == "Div":
            if isinstance(tl, IntType) and isinstance(tr, IntType):
                return self.fail("/ is float-only; use // for integers", node.loc)
            if is_numeric(tl) and is_numeric(tr):
                return FLOAT
            return self.fail(f"cannot apply / to {tl} and {tr}", node.loc)

        if op in INT_ONLY_OPS:
            if isinstance(tl, IntType) and tl == tr:
                return tl
            return self.fail(f"cannot apply {op} to {tl} and {tr} "
                             "(integers of one type required)", node.loc)

        if op in ARITH_OPS:
            if isinstance(tl, IntType) and tl == tr:
                return tl
            if is_numeric(tl) and is_numeric(tr) and FLOAT in (tl, tr):
                return FLOAT
            return self.fail(f"cannot apply {op} to {tl} and {tr}", node.loc)

        return self.fail(f"unsupported operator {op}", node.loc)

    def _type_compare(self, node: AstNode, scope: _Scope) -> VerifierType:
        operands = [node["left"]] + node["comparators"]
        ops = node["ops"]
        for i, op in enumerate(ops):
            left, right = operands[i], operands[i + 1]
            if _is_int_literal(left) and not _is_int_literal(right):
                tr = self.type_expr(right, scope)
                tl = self.type_expr(left, scope, expected=tr if isinstance(tr, IntType) else None)
            else:
                tl = self.type_expr(left, scope)
                tr = self.type_expr(right, scope, expected=tl if isinstance(tl, IntType) else None)
            if isinstance(tl, ErrorType) or isinstance(tr, ErrorType):
                continue
            if isinstance(tl, BoolType) and isinstance(tr, BoolType):
                if op not in ("Eq", "NotEq"):
                    self.fail("bools support only == and !=", node.loc)
                continue
            if isinstance(tl, IntType) and tl == tr:
                continue
            if is_numeric(tl) and is_numeric(tr) and FLOAT in (tl, tr):
                continue
            self.fail(f"cannot compare {tl} with {tr}", node.loc)
        return BOOL

    def _type_list(self, node: AstNode, scope: _Scope,
                   expected: VerifierType | None) -> VerifierType:
        elems = node["elts"]
        if not elems:
            if isinstance(expected, ListType):
                return ListType(expected.elem, 0)
            return self.fail("cannot infer the element type of []", node.loc)
        want = expected.elem if isinstance(expected, ListType) else None
        first: VerifierType | None = want
        if first is None:
            for e in elems:
                if not _is_int_literal(e):
                    first = self.type_expr(e, scope)
                    break
        types = [self.type_expr(e, scope, expected=first) for e in elems]
        base = types[0] if first is None else first
        if isinstance(base, ErrorType):
            return ERROR
        if not isinstance(base, (IntType, BoolType, FloatType)):
            return self.fail("list elements must be scalars", node.loc)
        for t, e in zip(types, elems):
            if not isinstance(t, ErrorType) and t != base:
                self.fail(f"list elements must share one type ({base} vs {t})", e.loc)
        return ListType(base, len(elems))

    # -- calls --

    def _type_call(self, node: AstNode, scope: _Scope, statement: bool = False) -> VerifierType:
        func = node["func"]
        args = node["args"]

        if func.kind == "Name":
            name = func["id"]
            if name in NONDET_CALLS:
                if args:
                    self.fail(f"{name}() takes no arguments", node.loc)
                self.info.call_targets[id(node)] = CallTarget("nondet", detail=NONDET_CALLS[name])
                return {"int": default_int(self.int_width), "bool": BOOL, "float": FLOAT}[
                    NONDET_CALLS[name]]
            if name == ASSUME_NAME:
                if not statement:
                    return self.fail(f"{ASSUME_NAME} is a statement, not a value", node.loc)
                if len(args) != 1:
                    self.fail(f"{ASSUME_NAME} takes exactly one argument", node.loc)
                else:
                    self._expect_bool(args[0], scope)
                self.info.call_targets[id(node)] = CallTarget("assume")
                return NONE
            if name in CONVERSION_NAMES and scope.lookup(name) is None:
                return self._type_conversion(node, name, args, scope)
            if name in BUILTIN_FUNCS and scope.lookup(name) is None:
                return self._type_builtin(node, name, args, scope)
            if name == "range":
                return self.fail("range() is only valid as a for-loop iterable", node.loc)
            if name in self.info.classes and scope.lookup(name) is None:
                return self._type_ctor(node, name, args, scope)
            target_t = self._lookup_name(name, func.loc, scope)
            return self._dispatch_callable(node, name, target_t, args, scope)

        if func.kind == "Attribute":
            return self._type_attr_call(node, func, args, scope)

        return self.fail("unsupported call form", node.loc)

    def _type_conversion(self, node: AstNode, name: str, args: list[AstNode],
                         scope: _Scope) -> VerifierType:
        if len(args) != 1:
            return self.fail(f"{name}() takes exactly one argument", node.loc)
        t = self.type_expr(args[0], scope)
        if not (is_numeric(t) or isinstance(t, (BoolType, ErrorType))):
            return self.fail(f"{name}() cannot convert {t}", node.loc)
        self.info.call_targets[id(node)] = CallTarget("convert", detail=name)
        if name == "int":
            return default_int(self.int_width)
        if name == "float":
            return FLOAT
        if name == "bool":
            return BOOL
        return UNSIGNED_NAMES[name]

    def _type_builtin(self, node: AstNode, name: str, args: list[AstNode],
                      scope: _Scope) -> VerifierType:
        self.info.call_targets[id(node)] = CallTarget("builtin", detail=name)
        if name == "len":
            if len(args) != 1:
                return self.fail("len() takes exactly one argument", node.loc)
            t = self.type_expr(args[0], scope)
            if not isinstance(t, (ListType, ErrorType)):
                return self.fail("len() needs a list", node.loc)
            return default_int(self.int_width)
        if name == "abs":
            if len(args) != 1:
                return self.fail("abs() takes exactly one argument", node.loc)
            t = self.type_expr(args[0], scope)
            if not (is_numeric(t) or isinstance(t, ErrorType)):
                return self.fail(f"abs() needs a number, got {t}", node.loc)
            return t
        # min/max
        if len(args) < 2:
            return self.fail(f"{name}() needs at least two arguments", node.loc)
        first = None
        for a in args:
            if not _is_int_literal(a):
                first = self.type_expr(a, scope)
                break
        types = [self.type_expr(a, scope, expected=first) for a in args]
        base = types[0] if first is None else first
        if isinstance(base, ErrorType):
            return ERROR
        if not is_numeric(base):
            return self.fail(f"{name}() needs numbers", node.loc)
        for t in types:
            if not isinstance(t, ErrorType) and t != base:
                return self.fail(f"{name}() arguments must share one type", node.loc)
        return base

    def _dispatch_callable(self, node: AstNode, name: str, target_t: VerifierType,
                           args: list[AstNode], scope: _Scope) -> VerifierType:
        if isinstance(target_t, ErrorType):
            for a in args:
                self.type_expr(a, scope)
            return ERROR
        if isinstance(target_t, FuncType):
            fn = self._resolve_plain_function(name)
            if fn is None:
                return self.fail(f"{name!r} is not callable here", node.loc)
            self._check_args(node, fn, args, scope, skip_receiver=False)
            self.info.call_targets[id(node)] = CallTarget("func", qname=fn.qname)
            return self._ret_of(fn)
        return self.fail(f"{name!r} of type {target_t} is not callable", node.loc)

    def _resolve_plain_function(self, name: str) -> FuncInfo | None:
        qname = func_qname(self.current_module, None, name)
        if qname in self.info.functions:
            return self.info.functions[qname]
        binding = self.unit.bindings.get(self.current_module, {}).get(name)
        if binding is not None and binding[0] == "member":
            qname = func_qname(binding[1], None, binding[2])
            if qname in self.info.functions:
                return self.info.functions[qname]
        return None

    def _ret_of(self, fn: FuncInfo) -> VerifierType:
        if fn.ret is None:
            self._check_function(fn.qname)
        if isinstance(fn.ret, ClassType):
            return self.fail(f"function {fn.name!r} returns a class instance, "
                             "which is not supported", fn.node.loc)
        return fn.ret if fn.ret is not None else NONE

    def _type_ctor(self, node: AstNode, cls: str, args: list[AstNode],
                   scope: _Scope) -> VerifierType:
        init = self.info.find_method(cls, "__init__")
        if init is None:
            if args:
                self.fail(f"{cls}() takes no arguments (no __init__)", node.loc)
                for a in args:
                    self.type_expr(a, scope)
            self.info.call_targets[id(node)] = CallTarget("ctor", qname=None, detail=cls)
            return ClassType(cls)
        self._check_args(node, init, args, scope, skip_receiver=True)
        self.info.call_targets[id(node)] = CallTarget("ctor", qname=init.qname, detail=cls)
        return ClassType(cls)

    def _type_attr_call(self, node: AstNode, func: AstNode, args: list[AstNode],
                        scope: _Scope) -> VerifierType:
        base = func["value"]
        attr = func["attr"]
        if base.kind != "Name":
            return self.fail("unsupported call form", node.loc)
        base_name = base["id"]
        base_local = scope.lookup(base_name)

        # method call on an instance variable
        if isinstance(base_local, ClassType):
            fn = self.info.find_method(base_local.name, attr)
            if fn is None:
                return self.fail(f"class {base_local.name} has no method {attr!r}", node.loc)
            self._check_args(node, fn, args, scope, skip_receiver=True)
            self.info.call_targets[id(node)] = CallTarget("method", qname=fn.qname)
            return self._ret_of(fn)

        binding = self.unit.bindings.get(self.current_module, {}).get(base_name)
        if base_local is None and binding is not None and binding[0] == "module":
            # module.function(...)
            qname = func_qname(binding[1], None, attr)
            fn = self.info.functions.get(qname)
            if fn is None:
                if attr in self.info.classes and self.info.classes[attr].module == binding[1]:
                    return self._type_ctor(node, attr, args, scope)
                return self.fail(f"module {binding[1]!r} has no function {attr!r}", node.loc)
            self._check_args(node, fn, args, scope, skip_receiver=False)
            self.info.call_targets[id(node)] = CallTarget("func", qname=fn.qname)
            return self._ret_of(fn)

        if base_local is None and base_name in self.info.classes:
            # explicit base-class call: Base.method(self, ...)
            fn = self.info.find_method(base_name, attr)
            if fn is None:
                return self.fail(f"class {base_name} has no method {attr!r}", node.loc)
            if not args:
                return self.fail("explicit base call needs the receiver argument", node.loc)
            recv_t = self.type_expr(args[0], scope)
            if not (isinstance(recv_t, ClassType)
                    and base_name in self.info.mro(recv_t.name)):
                self.fail(f"receiver of {base_name}.{attr} must be an instance of a "
                          f"subclass of {base_name}", node.loc)
            self._check_args(node, fn, args[1:], scope, skip_receiver=True)
            self.info.call_targets[id(node)] = CallTarget("base_method", qname=fn.qname)
            return self._ret_of(fn)

        return self.fail(f"cannot call {base_name}.{attr}", node.loc)

    def _check_args(self, node: AstNode, fn: FuncInfo, args: list[AstNode],
                    scope: _Scope, skip_receiver: bool) -> None:
        params = fn.param_types[1:] if skip_receiver else fn.param_types
        names = fn.param_names[1:] if skip_receiver else fn.param_names
        if len(args) != len(params):
            self.fail(f"{fn.name}() takes {len(params)} arguments, got {len(args)}",
                      node.loc)
        for arg, ptype, pname in zip(args, params, names):
            t = self.type_expr(arg, scope, expected=ptype)
            if not isinstance(t, ErrorType) and not isinstance(ptype, ErrorType) \
                    and not self._assignable(ptype, t):
                self.fail(f"argument {pname!r} of {fn.name}() expects {ptype}, got {t}",
                          node.loc, TypeConflict)

    def _type_attribute(self, node: AstNode, scope: _Scope) -> VerifierType:
        base = node["value"]
        attr = node["attr"]
        if base.kind != "Name":
            return self.fail("only single-level attribute access is supported", node.loc)
        base_name = base["id"]
        base_t = scope.lookup(base_name)
        if isinstance(base_t, ClassType):
            found = self.info.find_attr(base_t.name, attr)
            if found is None:
                return self.fail(f"class {base_t.name} has no attribute {attr!r}", node.loc)
            return found[1]
        binding = self.unit.bindings.get(self.current_module, {}).get(base_name)
        if base_t is None and binding is not None and binding[0] == "module":
            return self._member_type(binding[1], attr, node.loc)
        if base_t is None:
            return self.fail(f"unknown name {base_name!r}", base.loc, UnknownName)
        return self.fail(f"{base_name!r} of type {base_t} has no attributes", node.loc)


# --- public operations ---

def infer_and_annotate(unit: ProgramUnit, int_width: int = 32) -> ProgramUnit:
    """Infer missing types and insert annotation nodes; raises on type errors."""
    checker = TypeChecker(unit, int_width, collect=False, annotate=True)
    checker.run()
    unit.expr_types = checker.expr_types
    unit.type_info = checker.info
    return unit


def check_types(unit: ProgramUnit, int_width: int = 32) -> list[Diagnostic]:
    """Validate operator/call/condition consistency; diagnostics, never raises."""
    checker = TypeChecker(unit, int_width, collect=True, annotate=False)
    checker.run()
    return checker.diagnostics
