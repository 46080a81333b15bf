"""GOTO program: lowering, property instrumentation and unwinding.

Structured control flow compiles to guarded forward jumps plus loop back
edges; calls remain explicit ``CallExpr`` right-hand sides until
:func:`unwind` unrolls every loop body k times and inlines calls to
recursion depth k, leaving an acyclic single-function program. Instance
attributes are flattened to ``object.field`` scalar names here; no dynamic
lookup survives into the GOTO form.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

from .astnodes import AstNode, assigned_names
from .errors import Loc, VerifierError
from .exprs import (
    Binary,
    CallExpr,
    Cast,
    Compare,
    Const,
    Expr,
    FALSE,
    Index,
    Ite,
    Nondet,
    TRUE,
    Unary,
    Var,
    and_,
    ite,
    not_,
    pretty,
)
from .symtab import SymbolTable
from .typeinfer import CallTarget, FuncInfo, _int_literal_value, _is_int_literal
from .vtypes import (
    BOOL,
    FLOAT,
    BoolType,
    ClassType,
    FloatType,
    IntType,
    ListType,
    NoneType,
    VerifierType,
)

_labels = itertools.count(1)

PROPERTY_CLASSES = ("user-assertion", "division-by-zero", "overflow", "bounds", "unwinding")

_BINOP = {
    "Add": "add", "Sub": "sub", "Mult": "mul", "Div": "div",
    "FloorDiv": "floordiv", "Mod": "mod", "LShift": "shl", "RShift": "shr",
    "BitOr": "bor", "BitXor": "bxor", "BitAnd": "band",
}
_CMPOP = {"Eq": "eq", "NotEq": "ne", "Lt": "lt", "LtE": "le", "Gt": "gt", "GtE": "ge"}


@dataclass
class GotoInstruction:
    kind: str  # DECL | ASSIGN | ASSUME | ASSERT | GOTO | SKIP | END
    lab: int
    loc: Loc | None = None
    decl_name: str | None = None
    decl_type: VerifierType | None = None
    target: Expr | None = None  # ASSIGN lvalue (Var or Index); None discards
    expr: Expr | None = None  # rhs / condition / guard (GOTO: None = always)
    goto_lab: int | None = None
    prop_class: str | None = None
    message: str | None = None
    index: int = -1  # set by renumber()
    target_index: int = -1

    def pretty_payload(self) -> str:
        if self.kind == "DECL":
            return f"{self.decl_name} : {self.decl_type}"
        if self.kind == "ASSIGN":
            lhs = pretty(self.target) if self.target is not None else "_"
            return f"{lhs} := {pretty(self.expr)}"
        if self.kind in ("ASSUME", "ASSERT"):
            tag = f" [{self.prop_class}]" if self.kind == "ASSERT" else ""
            return f"{pretty(self.expr)}{tag}"
        if self.kind == "GOTO":
            guard = "" if self.expr is None else f" if {pretty(self.expr)}"
            return f"-> {self.target_index}{guard}"
        return ""


def fresh_lab() -> int:
    return next(_labels)


def skip(loc: Loc | None = None, lab: int | None = None) -> GotoInstruction:
    return GotoInstruction("SKIP", lab if lab is not None else fresh_lab(), loc)


@dataclass
class FnMeta:
    qname: str
    params: list[tuple[str, VerifierType]]  # qualified param names
    retvar: str | None
    ret_type: VerifierType
    byref: set[str] = field(default_factory=set)  # by-reference param qnames


@dataclass
class GotoProgram:
    functions: dict[str, list[GotoInstruction]]
    entry: str
    meta: dict[str, FnMeta]
    st: SymbolTable
    unwound: int | None = None

    def renumber(self) -> None:
        for instrs in self.functions.values():
            lab_pos = {ins.lab: i for i, ins in enumerate(instrs)}
            for i, ins in enumerate(instrs):
                ins.index = i
                if ins.kind == "GOTO":
                    if ins.goto_lab not in lab_pos:
                        raise VerifierError(f"jump target {ins.goto_lab} out of range")
                    ins.target_index = lab_pos[ins.goto_lab]

    def entry_instructions(self) -> list[GotoInstruction]:
        return self.functions[self.entry]


def render_goto(gp: GotoProgram) -> str:
    gp.renumber()
    lines = []
    st = gp.st
    for qname, instrs in gp.functions.items():
        lines.append(f"{qname}:")
        for ins in instrs:
            where = ""
            if ins.loc is not None:
                where = f"  // {st.unit.source_path}:{ins.loc.line}"
            lines.append(f"  {ins.index}: {ins.kind} {ins.pretty_payload()}{where}".rstrip())
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Lowering
# ---------------------------------------------------------------------------

class _FnContext:
    """Name resolution inside one function (or the synthetic entry)."""

    def __init__(self, lowerer: "_Lowerer", qname: str, module: str,
                 local_names: set[str], entry: bool):
        self.lowerer = lowerer
        self.qname = qname
        self.module = module
        self.local_names = local_names
        self.entry = entry
        self.out: list[GotoInstruction] = []
        self.end_lab = fresh_lab()
        self.declared: set[str] = set()
        self.tmp_count = itertools.count(1)
        self.retvar: str | None = None
        self.ret_type: VerifierType = NoneType()

    def resolve(self, name: str) -> str | Expr:
        if name in self.local_names:
            if self.entry:
                return f"{self.module}@{name}"
            return f"{self.qname}@{name}"
        info = self.lowerer.st.info
        unit = self.lowerer.st.unit
        if name in info.module_vars.get(self.module, {}):
            return self._module_var(self.module, name)
        binding = unit.bindings.get(self.module, {}).get(name)
        if binding is not None and binding[0] == "member":
            return self._module_var(binding[1], binding[2])
        raise VerifierError(f"cannot resolve name {name!r} in {self.qname}")

    def _module_var(self, module: str, name: str) -> str | Expr:
        unit = self.lowerer.st.unit
        main_runs = unit.isolated_function is None and module == unit.module_name
        if main_runs:
            return f"{module}@{name}"
        # imported (or isolated-away) module variable: constant initializer only
        sym = self.lowerer.st.symbols.get(f"{module}@{name}")
        if sym is not None and sym.value is not None:
            folded = self.lowerer.literal_const(sym.value, sym.type)
            if folded is not None:
                return folded
        raise VerifierError(
            f"module-level variable {module}.{name} has no constant initializer "
            "and its module top level is not part of the verified entry")

    def fresh_tmp(self, t: VerifierType) -> Var:
        prefix = f"{self.module}@" if self.entry else f"{self.qname}@"
        return Var(t, f"{prefix}%t{next(self.tmp_count)}")

    def emit(self, ins: GotoInstruction) -> None:
        self.out.append(ins)


class _Lowerer:
    def __init__(self, st: SymbolTable):
        self.st = st
        self.info = st.info
        self.expr_types = st.unit.expr_types

    # -- helpers --

    def literal_const(self, node: AstNode, t: VerifierType) -> Const | None:
        if node.kind == "Constant" and not isinstance(node["value"], str):
            return Const(t, node["value"])
        if node.kind == "UnaryOp" and node["op"] == "USub" \
                and node["operand"].kind == "Constant":
            return Const(t, -node["operand"]["value"])
        return None

    def type_of(self, node: AstNode) -> VerifierType:
        t = self.expr_types.get(id(node))
        if t is None:
            raise VerifierError("untyped expression reached the converter", node.loc)
        return t

    def coerce(self, e: Expr, want: VerifierType) -> Expr:
        if e.type == want:
            return e
        if isinstance(want, FloatType) and isinstance(e.type, IntType):
            return Cast(FLOAT, e)
        if isinstance(want, ListType) and isinstance(e.type, ListType):
            return e
        if isinstance(want, IntType) and isinstance(e.type, IntType) \
                and isinstance(e, Const):
            return Const(want, e.value)
        raise VerifierError(f"cannot coerce {e.type} to {want}")

    # -- program --

    def lower(self) -> GotoProgram:
        functions: dict[str, list[GotoInstruction]] = {}
        meta: dict[str, FnMeta] = {}
        for qname, fn in self.st.functions.items():
            instrs, fn_meta = self.lower_function(fn)
            functions[qname] = instrs
            meta[qname] = fn_meta
        entry_instrs, entry_meta = self.lower_entry()
        functions[self.st.entry] = entry_instrs
        meta[self.st.entry] = entry_meta
        gp = GotoProgram(functions, self.st.entry, meta, self.st)
        gp.renumber()
        return gp

    def lower_function(self, fn: FuncInfo) -> tuple[list[GotoInstruction], FnMeta]:
        local_names = set(fn.param_names) | assigned_names(fn.node["body"])
        ctx = _FnContext(self, fn.qname, fn.module, local_names, entry=False)
        params: list[tuple[str, VerifierType]] = []
        byref: set[str] = set()
        for pname, ptype in zip(fn.param_names, fn.param_types):
            pq = f"{fn.qname}@{pname}"
            params.append((pq, ptype))
            if isinstance(ptype, ClassType):
                byref.add(pq)
            else:
                ctx.emit(GotoInstruction("DECL", fresh_lab(), fn.node.loc,
                                         decl_name=pq, decl_type=ptype))
            ctx.declared.add(pq)
        retvar = None
        if not isinstance(fn.ret, NoneType):
            retvar = f"{fn.qname}@%ret"
            ctx.emit(GotoInstruction("DECL", fresh_lab(), fn.node.loc,
                                     decl_name=retvar, decl_type=fn.ret))
        ctx.retvar, ctx.ret_type = retvar, fn.ret
        for stmt in fn.node["body"]:
            self.lower_stmt(stmt, ctx)
        ctx.emit(GotoInstruction("END", ctx.end_lab, fn.node.loc))
        return ctx.out, FnMeta(fn.qname, params, retvar, fn.ret, byref)

    def lower_entry(self) -> tuple[list[GotoInstruction], FnMeta]:
        st = self.st
        module = st.unit.module_name
        ctx = _FnContext(self, st.entry, module, set(), entry=True)
        ctx.retvar, ctx.ret_type = None, NoneType()
        if st.entry_harness is not None:
            self.lower_harness(ctx)
        else:
            ctx.local_names = set(st.info.module_vars.get(module, {}))
            for stmt in st.entry_body:
                self.lower_stmt(stmt, ctx)
        ctx.emit(GotoInstruction("END", ctx.end_lab, None))
        return ctx.out, FnMeta(st.entry, [], None, NoneType())

    def lower_harness(self, ctx: _FnContext) -> None:
        harness = self.st.entry_harness
        fn = self.st.functions[harness.target]
        loc = fn.node.loc
        args: list[Expr] = []
        for pname, ptype in harness.params:
            qname = f"{self.st.entry}@{pname}"
            if isinstance(ptype, ClassType):
                # receiver object with fully nondeterministic fields
                for attr, at in self.info.record_fields(ptype.name).items():
                    fq = f"{qname}.{attr}"
                    ctx.emit(GotoInstruction("DECL", fresh_lab(), loc,
                                             decl_name=fq, decl_type=at))
                    ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), loc,
                                             target=Var(at, fq),
                                             expr=Nondet(at, f"nondet_{at}")))
                args.append(Var(ptype, qname))
            else:
                ctx.emit(GotoInstruction("DECL", fresh_lab(), loc,
                                         decl_name=qname, decl_type=ptype))
                ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), loc,
                                         target=Var(ptype, qname),
                                         expr=Nondet(ptype, f"nondet_{ptype}")))
                args.append(Var(ptype, qname))
        call = CallExpr(fn.ret, harness.target, tuple(args))
        ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), loc, target=None, expr=call))

    # -- statements --

    def lower_stmt(self, stmt: AstNode, ctx: _FnContext) -> None:
        kind = stmt.kind
        if kind == "AnnAssign":
            self.lower_assign(stmt, ctx)
        elif kind == "Assert":
            test = self.convert(stmt["test"], ctx)
            msg = stmt["msg"]
            text = msg["value"] if msg is not None else pretty(test)
            ctx.emit(GotoInstruction("ASSERT", fresh_lab(), stmt.loc, expr=test,
                                     prop_class="user-assertion", message=text))
        elif kind == "Expr":
            value = stmt["value"]
            if value.kind == "Constant":
                ctx.emit(skip(stmt.loc))  # docstring
                return
            target = self.info.call_targets.get(id(value))
            if target is not None and target.kind == "assume":
                cond = self.convert(value["args"][0], ctx)
                ctx.emit(GotoInstruction("ASSUME", fresh_lab(), stmt.loc, expr=cond))
                return
            self.lower_call_stmt(value, ctx, stmt.loc)
        elif kind == "If":
            self.lower_if(stmt, ctx)
        elif kind == "While":
            self.lower_while(stmt, ctx)
        elif kind == "For":
            self.lower_for(stmt, ctx)
        elif kind == "Return":
            if stmt["value"] is not None and ctx.retvar is not None:
                value = self.convert(stmt["value"], ctx, want=ctx.ret_type)
                ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), stmt.loc,
                                         target=Var(ctx.ret_type, ctx.retvar),
                                         expr=value))
            ctx.emit(GotoInstruction("GOTO", fresh_lab(), stmt.loc,
                                     goto_lab=ctx.end_lab))
        elif kind == "Pass":
            ctx.emit(skip(stmt.loc))
        else:
            raise VerifierError(f"cannot lower statement {kind}", stmt.loc)

    def declare(self, ctx: _FnContext, qname: str, t: VerifierType,
                loc: Loc | None) -> None:
        if qname in ctx.declared:
            return
        ctx.declared.add(qname)
        if isinstance(t, ClassType):
            for attr, at in self.info.record_fields(t.name).items():
                ctx.emit(GotoInstruction("DECL", fresh_lab(), loc,
                                         decl_name=f"{qname}.{attr}", decl_type=at))
        else:
            ctx.emit(GotoInstruction("DECL", fresh_lab(), loc,
                                     decl_name=qname, decl_type=t))

    def lower_assign(self, stmt: AstNode, ctx: _FnContext) -> None:
        target = stmt["target"]
        value = stmt["value"]
        if target.kind == "Name":
            t = self.type_of(target)
            resolved = ctx.resolve(target["id"])
            if isinstance(resolved, Expr):
                raise VerifierError("cannot assign to an imported constant", stmt.loc)
            self.declare(ctx, resolved, t, stmt.loc)
            if value is None:
                return
            self.lower_value_into(resolved, t, value, ctx, stmt.loc)
        elif target.kind == "Attribute":
            t = self.type_of(target)
            base = ctx.resolve(target["value"]["id"])
            lvalue = Var(t, f"{base}.{target['attr']}")
            rhs = self.convert(value, ctx, want=t)
            ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), stmt.loc,
                                     target=lvalue, expr=rhs))
        elif target.kind == "Subscript":
            self.lower_elem_write(target, value, ctx, stmt.loc)
        else:
            raise VerifierError("unsupported assignment target", stmt.loc)

    def lower_value_into(self, qname: str, t: VerifierType, value: AstNode,
                         ctx: _FnContext, loc: Loc | None) -> None:
        """Assign an arbitrary rhs to a declared name, expanding aggregates."""
        if isinstance(t, ClassType):
            target_ct = self.info.call_targets.get(id(value))
            if target_ct is not None and target_ct.kind == "ctor":
                self.lower_ctor(qname, t, value, target_ct, ctx, loc)
                return
            if value.kind == "Name":  # record copy, memberwise
                src = ctx.resolve(value["id"])
                for attr, at in self.info.record_fields(t.name).items():
                    ctx.emit(GotoInstruction(
                        "ASSIGN", fresh_lab(), loc,
                        target=Var(at, f"{qname}.{attr}"),
                        expr=Var(at, f"{src}.{attr}")))
                return
            raise VerifierError("unsupported class-instance assignment", loc)
        if isinstance(t, ListType):
            if value.kind == "List":
                for i, elem in enumerate(value["elts"]):
                    e = self.convert(elem, ctx, want=t.elem)
                    ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), loc,
                                             target=Var(t.elem, f"{qname}.{i}"),
                                             expr=e))
                return
            if value.kind == "Name":  # list copy
                src_t = self.type_of(value)
                src = ctx.resolve(value["id"])
                for i in range(t.length):
                    ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), loc,
                                             target=Var(t.elem, f"{qname}.{i}"),
                                             expr=Var(src_t.elem, f"{src}.{i}")))
                return
            raise VerifierError("unsupported list assignment", loc)
        rhs = self.convert(value, ctx, want=t)
        ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), loc,
                                 target=Var(t, qname), expr=rhs))

    def lower_ctor(self, qname: str, t: ClassType, value: AstNode,
                   target_ct: CallTarget, ctx: _FnContext, loc: Loc | None) -> None:
        fields = self.info.record_fields(t.name)
        # class-body defaults first (leftmost definition wins, like the lookup)
        for attr, at in fields.items():
            for cls_name in self.info.mro(t.name):
                cls = self.info.classes[cls_name]
                if attr in cls.attrs:
                    default = cls.attr_defaults.get(attr)
                    if default is not None:
                        e = self.convert(default, ctx, want=at)
                        ctx.emit(GotoInstruction(
                            "ASSIGN", fresh_lab(), loc,
                            target=Var(at, f"{qname}.{attr}"), expr=e))
                    break
        if target_ct.qname is not None:  # inline __init__ later, keep the call
            init = self.st.functions[target_ct.qname]
            args: list[Expr] = [Var(t, qname)]
            for arg_node, ptype in zip(value["args"], init.param_types[1:]):
                args.append(self.convert(arg_node, ctx, want=ptype))
            call = CallExpr(NoneType(), target_ct.qname, tuple(args))
            ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), loc, target=None, expr=call))

    def lower_elem_write(self, target: AstNode, value: AstNode,
                         ctx: _FnContext, loc: Loc | None) -> None:
        base_node = target["value"]
        list_t = self.type_of(base_node)
        if not isinstance(list_t, ListType) or list_t.length < 0:
            raise VerifierError("list length unknown at element write", loc)
        base = self._list_base(base_node, ctx)
        idx = self.convert(target["slice"], ctx)
        rhs = self.convert(value, ctx, want=list_t.elem)
        lvalue = Index(list_t.elem, base, idx, list_t.length)
        ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), loc, target=lvalue, expr=rhs))

    def _list_base(self, node: AstNode, ctx: _FnContext) -> str:
        if node.kind == "Name":
            resolved = ctx.resolve(node["id"])
            if isinstance(resolved, Expr):
                raise VerifierError("imported constants cannot be lists", node.loc)
            return resolved
        if node.kind == "Attribute" and node["value"].kind == "Name":
            base = ctx.resolve(node["value"]["id"])
            return f"{base}.{node['attr']}"
        raise VerifierError("unsupported list expression", node.loc)

    def lower_call_stmt(self, call: AstNode, ctx: _FnContext, loc: Loc | None) -> None:
        e = self.convert_call(call, ctx)
        if isinstance(e, CallExpr):
            ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), loc, target=None, expr=e))
        # non-call expressions in statement position have no effect; drop them

    def lower_if(self, stmt: AstNode, ctx: _FnContext) -> None:
        test = self.convert(stmt["test"], ctx)
        else_lab = fresh_lab()
        end_lab = fresh_lab()
        has_else = bool(stmt["orelse"])
        ctx.emit(GotoInstruction("GOTO", fresh_lab(), stmt.loc, expr=not_(test),
                                 goto_lab=else_lab if has_else else end_lab))
        for s in stmt["body"]:
            self.lower_stmt(s, ctx)
        if has_else:
            ctx.emit(GotoInstruction("GOTO", fresh_lab(), stmt.loc, goto_lab=end_lab))
            ctx.emit(skip(stmt.loc, lab=else_lab))
            for s in stmt["orelse"]:
                self.lower_stmt(s, ctx)
        ctx.emit(skip(stmt.loc, lab=end_lab))

    def lower_while(self, stmt: AstNode, ctx: _FnContext) -> None:
        head_lab = fresh_lab()
        exit_lab = fresh_lab()
        ctx.emit(skip(stmt.loc, lab=head_lab))
        test = self.convert(stmt["test"], ctx)  # hoisted calls land inside the loop
        ctx.emit(GotoInstruction("GOTO", fresh_lab(), stmt.loc, expr=not_(test),
                                 goto_lab=exit_lab))
        for s in stmt["body"]:
            self.lower_stmt(s, ctx)
        ctx.emit(GotoInstruction("GOTO", fresh_lab(), stmt.loc, goto_lab=head_lab))
        ctx.emit(skip(stmt.loc, lab=exit_lab))

    def lower_for(self, stmt: AstNode, ctx: _FnContext) -> None:
        target = stmt["target"]
        loop_t = self.type_of(target)
        resolved = ctx.resolve(target["id"])
        self.declare(ctx, resolved, loop_t, stmt.loc)
        it = stmt["iter"]
        if it.kind == "List":
            # fixed-length literal: unroll statically
            for elem in it["elts"]:
                e = self.convert(elem, ctx, want=loop_t)
                ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), stmt.loc,
                                         target=Var(loop_t, resolved), expr=e))
                for s in stmt["body"]:
                    self.lower_stmt(s, ctx)
            return
        args = it["args"]
        if len(args) == 1:
            start: Expr = Const(loop_t, 0)
            stop = self.convert(args[0], ctx, want=loop_t)
            step = 1
        else:
            start = self.convert(args[0], ctx, want=loop_t)
            stop = self.convert(args[1], ctx, want=loop_t)
            step = 1
            if len(args) == 3:
                lit = self.literal_const(args[2], loop_t)
                if lit is None or int(lit.value) == 0:
                    raise VerifierError("range() step must be a nonzero literal",
                                        stmt.loc)
                step = int(lit.value)
        induction = ctx.fresh_tmp(loop_t)
        bound = ctx.fresh_tmp(loop_t)
        for var in (induction, bound):
            ctx.emit(GotoInstruction("DECL", fresh_lab(), stmt.loc,
                                     decl_name=var.name, decl_type=loop_t))
        ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), stmt.loc,
                                 target=induction, expr=start))
        ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), stmt.loc,
                                 target=bound, expr=stop))
        head_lab = fresh_lab()
        exit_lab = fresh_lab()
        ctx.emit(skip(stmt.loc, lab=head_lab))
        cond = Compare(BOOL, "lt" if step > 0 else "gt", induction, bound)
        ctx.emit(GotoInstruction("GOTO", fresh_lab(), stmt.loc, expr=not_(cond),
                                 goto_lab=exit_lab))
        ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), stmt.loc,
                                 target=Var(loop_t, resolved), expr=induction))
        for s in stmt["body"]:
            self.lower_stmt(s, ctx)
        ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), stmt.loc, target=induction,
                                 expr=Binary(loop_t, "add", induction,
                                             Const(loop_t, step))))
        ctx.emit(GotoInstruction("GOTO", fresh_lab(), stmt.loc, goto_lab=head_lab))
        ctx.emit(skip(stmt.loc, lab=exit_lab))

    # -- expressions --

    def convert(self, node: AstNode, ctx: _FnContext,
                want: VerifierType | None = None) -> Expr:
        e = self._convert_inner(node, ctx)
        if want is not None:
            e = self.coerce(e, want)
        return e

    def _convert_inner(self, node: AstNode, ctx: _FnContext) -> Expr:
        kind = node.kind
        t = self.type_of(node)

        if _is_int_literal(node):
            return Const(t, _int_literal_value(node))

        if kind == "Constant":
            return Const(t, node["value"])

        if kind == "Name":
            resolved = ctx.resolve(node["id"])
            if isinstance(resolved, Expr):
                return resolved
            return Var(t, resolved)

        if kind == "UnaryOp":
            op = node["op"]
            if op == "Not":
                return not_(self.convert(node["operand"], ctx))
            operand = self.convert(node["operand"], ctx, want=t)
            if op == "UAdd":
                return operand
            if isinstance(operand, Const):
                from .exprs import eval_expr
                return Const(t, eval_expr(Unary(t, "neg" if op == "USub" else "bnot",
                                                operand), {}))
            return Unary(t, "neg" if op == "USub" else "bnot", operand)

        if kind == "BinOp":
            left = self.convert(node["left"], ctx, want=t)
            right = self.convert(node["right"], ctx, want=t)
            return Binary(t, _BINOP[node["op"]], left, right)

        if kind == "BoolOp":
            values = [self.convert(v, ctx) for v in node["values"]]
            out = values[0]
            opname = "and" if node["op"] == "And" else "or"
            for value in values[1:]:
                out = Binary(BOOL, opname, out, value)
            return out

        if kind == "Compare":
            operands = [node["left"]] + node["comparators"]
            parts: list[Expr] = []
            for i, op in enumerate(node["ops"]):
                le, re_ = operands[i], operands[i + 1]
                lt_, rt = self.type_of(le), self.type_of(re_)
                common = FLOAT if FLOAT in (lt_, rt) else lt_
                parts.append(Compare(BOOL, _CMPOP[op],
                                     self.convert(le, ctx, want=common),
                                     self.convert(re_, ctx, want=common)))
            out = parts[0]
            for p in parts[1:]:
                out = and_(out, p)
            return out

        if kind == "Call":
            call = self.convert_call(node, ctx)
            if isinstance(call, CallExpr):
                tmp = ctx.fresh_tmp(call.type)
                ctx.emit(GotoInstruction("DECL", fresh_lab(), node.loc,
                                         decl_name=tmp.name, decl_type=call.type))
                ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), node.loc,
                                         target=tmp, expr=call))
                return tmp
            return call

        if kind == "Attribute":
            base_name = node["value"]["id"]
            binding = self.st.unit.bindings.get(ctx.module, {}).get(base_name)
            if binding is not None and binding[0] == "module" \
                    and base_name not in ctx.local_names:
                resolved = ctx._module_var(binding[1], node["attr"])
                return resolved if isinstance(resolved, Expr) else Var(t, resolved)
            base = ctx.resolve(base_name)
            if isinstance(base, Expr):
                raise VerifierError("unsupported attribute base", node.loc)
            return Var(t, f"{base}.{node['attr']}")

        if kind == "Subscript":
            list_t = self.type_of(node["value"])
            if not isinstance(list_t, ListType) or list_t.length < 0:
                raise VerifierError("list length unknown at element read", node.loc)
            base = self._list_base(node["value"], ctx)
            idx = self.convert(node["slice"], ctx)
            return Index(list_t.elem, base, idx, list_t.length)

        if kind == "List":
            # list literal outside a declaration: materialize a temp list
            lt = t
            tmp = f"{ctx.qname if not ctx.entry else ctx.module}@%l{next(ctx.tmp_count)}"
            ctx.declared.add(tmp)
            ctx.emit(GotoInstruction("DECL", fresh_lab(), node.loc,
                                     decl_name=tmp, decl_type=lt))
            for i, elem in enumerate(node["elts"]):
                e = self.convert(elem, ctx, want=lt.elem)
                ctx.emit(GotoInstruction("ASSIGN", fresh_lab(), node.loc,
                                         target=Var(lt.elem, f"{tmp}.{i}"), expr=e))
            return Var(lt, tmp)

        raise VerifierError(f"cannot convert expression {kind}", node.loc)

    def convert_call(self, node: AstNode, ctx: _FnContext) -> Expr:
        target = self.info.call_targets.get(id(node))
        t = self.type_of(node)
        args = node["args"]

        if target is None:
            raise VerifierError("unresolved call", node.loc)
        if target.kind == "nondet":
            return Nondet(t, f"nondet_{target.detail}")
        if target.kind == "convert":
            return Cast(t, self.convert(args[0], ctx))
        if target.kind == "builtin":
            return self._convert_builtin(node, target.detail, ctx)
        if target.kind == "assume":
            raise VerifierError("__ESBMC_assume is a statement", node.loc)
        if target.kind == "ctor":
            # constructor in expression position: materialize a temp object
            cls = ClassType(target.detail)
            prefix = f"{ctx.module}@" if ctx.entry else f"{ctx.qname}@"
            tmp = f"{prefix}%o{next(ctx.tmp_count)}"
            self.declare(ctx, tmp, cls, node.loc)
            self.lower_ctor(tmp, cls, node, target, ctx, node.loc)
            return Var(cls, tmp)

        fn = self.st.functions[target.qname]
        call_args: list[Expr] = []
        if target.kind == "method":
            recv_name = ctx.resolve(node["func"]["value"]["id"])
            call_args.append(Var(fn.param_types[0], recv_name))
            rest = args
        elif target.kind == "base_method":
            recv = self.convert(args[0], ctx)
            call_args.append(recv)
            rest = args[1:]
        else:
            rest = args
        for arg_node, ptype in zip(rest, fn.param_types[len(call_args):]):
            call_args.append(self.convert(arg_node, ctx, want=ptype))
        return CallExpr(fn.ret, target.qname, tuple(call_args))

    def _convert_builtin(self, node: AstNode, name: str, ctx: _FnContext) -> Expr:
        args = node["args"]
        t = self.type_of(node)
        if name == "len":
            list_t = self.type_of(args[0])
            return Const(t, list_t.length)
        if name == "abs":
            x = self.convert(args[0], ctx, want=t)
            zero = Const(t, 0.0 if isinstance(t, FloatType) else 0)
            return ite(Compare(BOOL, "lt", x, zero), Unary(t, "neg", x), x)
        if name in ("min", "max"):
            op = "lt" if name == "min" else "gt"
            exprs = [self.convert(a, ctx, want=t) for a in args]
            out = exprs[0]
            for e in exprs[1:]:
                out = ite(Compare(BOOL, op, out, e), out, e)
            return out
        raise VerifierError(f"unsupported builtin {name}", node.loc)


def lower_to_goto(st: SymbolTable) -> GotoProgram:
    """Compile every retained function (and the entry) to GOTO instructions."""
    return _Lowerer(st).lower()


# ---------------------------------------------------------------------------
# Property instrumentation
# ---------------------------------------------------------------------------

@dataclass
class ChecksConfig:
    division_by_zero: bool = True
    bounds: bool = True
    overflow: bool = False


def _collect_checks(expr: Expr, out: list[tuple[str, Expr, str]],
                    opts: ChecksConfig) -> None:
    """Post-order: inner subexpressions are checked before outer ones."""
    if isinstance(expr, Unary):
        _collect_checks(expr.operand, out, opts)
        if opts.overflow and expr.op == "neg" and isinstance(expr.type, IntType) \
                and expr.type.signed:
            bad = Compare(BOOL, "eq", expr.operand, Const(expr.type, expr.type.min_value))
            out.append(("overflow", not_(bad), f"overflow on -{pretty(expr.operand)}"))
    elif isinstance(expr, Binary):
        _collect_checks(expr.left, out, opts)
        _collect_checks(expr.right, out, opts)
        t = expr.type
        if isinstance(t, IntType):
            if expr.op in ("floordiv", "mod") and opts.division_by_zero:
                cond = Compare(BOOL, "ne", expr.right, Const(t, 0))
                out.append(("division-by-zero", cond, pretty(cond)))
            if opts.overflow and t.signed:
                check = _signed_overflow_check(expr)
                if check is not None:
                    out.append(("overflow", check,
                                f"overflow on {pretty(expr)}"))
    elif isinstance(expr, Compare):
        _collect_checks(expr.left, out, opts)
        _collect_checks(expr.right, out, opts)
    elif isinstance(expr, Ite):
        _collect_checks(expr.cond, out, opts)
        _collect_checks(expr.then, out, opts)
        _collect_checks(expr.other, out, opts)
    elif isinstance(expr, Cast):
        _collect_checks(expr.operand, out, opts)
    elif isinstance(expr, CallExpr):
        for a in expr.args:
            _collect_checks(a, out, opts)
    elif isinstance(expr, Index):
        _collect_checks(expr.index, out, opts)
        if opts.bounds:
            it = expr.index.type
            low = Compare(BOOL, "ge", expr.index, Const(it, 0))
            high = Compare(BOOL, "lt", expr.index, Const(it, expr.length))
            cond = and_(low, high) if it.signed else high
            out.append(("bounds", cond,
                        f"index {pretty(expr.index)} within [0, {expr.length})"))


def _signed_overflow_check(expr: Binary) -> Expr | None:
    t = expr.type
    if expr.op in ("add", "sub", "mul"):
        wide = IntType(t.width * 2, True)
        exact = Binary(wide, expr.op, Cast(wide, expr.left), Cast(wide, expr.right))
        wrapped = Cast(wide, expr)
        return Compare(BOOL, "eq", exact, wrapped)
    if expr.op == "floordiv":
        bad = and_(Compare(BOOL, "eq", expr.left, Const(t, t.min_value)),
                   Compare(BOOL, "eq", expr.right, Const(t, -1)))
        return not_(bad)
    return None


def instrument_properties(gp: GotoProgram, opts: ChecksConfig | None = None) -> GotoProgram:
    """Insert division-by-zero / bounds / (optional) signed-overflow asserts."""
    opts = opts or ChecksConfig()
    for qname, instrs in gp.functions.items():
        out: list[GotoInstruction] = []
        for ins in instrs:
            checks: list[tuple[str, Expr, str]] = []
            if ins.expr is not None:
                _collect_checks(ins.expr, checks, opts)
            if ins.target is not None and isinstance(ins.target, Index):
                _collect_checks(ins.target.index, checks, opts)
                if opts.bounds:
                    it = ins.target.index.type
                    low = Compare(BOOL, "ge", ins.target.index, Const(it, 0))
                    high = Compare(BOOL, "lt", ins.target.index,
                                   Const(it, ins.target.length))
                    checks.append(("bounds", and_(low, high) if it.signed else high,
                                   f"index {pretty(ins.target.index)} within "
                                   f"[0, {ins.target.length})"))
            for prop_class, cond, message in checks:
                out.append(GotoInstruction("ASSERT", fresh_lab(), ins.loc, expr=cond,
                                           prop_class=prop_class, message=message))
            out.append(ins)
        gp.functions[qname] = out
    gp.renumber()
    return gp


# ---------------------------------------------------------------------------
# Unwinding
# ---------------------------------------------------------------------------

def back_edges(instrs: list[GotoInstruction]) -> list[tuple[int, int]]:
    """(jump position, header position) pairs for every backwards GOTO."""
    pos = {ins.lab: i for i, ins in enumerate(instrs)}
    edges = []
    for i, ins in enumerate(instrs):
        if ins.kind != "GOTO":
            continue
        target = pos.get(ins.goto_lab)  # jumps out of this slice are forward
        if target is not None and target <= i:
            edges.append((i, target))
    return edges


def _relabel(instrs: list[GotoInstruction]) -> list[GotoInstruction]:
    """Copy instructions with fresh labels; internal jumps follow the renaming."""
    mapping = {ins.lab: fresh_lab() for ins in instrs}
    out = []
    for ins in instrs:
        copy = replace(ins, lab=mapping[ins.lab])
        if copy.kind == "GOTO" and copy.goto_lab in mapping:
            copy.goto_lab = mapping[copy.goto_lab]
        out.append(copy)
    return out


def _unroll_loops(instrs: list[GotoInstruction], k: int,
                  unwinding_assertions: bool) -> list[GotoInstruction]:
    while True:
        edges = back_edges(instrs)
        if not edges:
            return instrs
        # outermost span first: one not strictly contained in another
        edges.sort(key=lambda e: (e[1], -e[0]))
        jump_pos, head_pos = next(
            (j, h) for j, h in edges
            if not any(h2 < h and j2 > j for j2, h2 in edges)
        )
        content = instrs[head_pos:jump_pos]  # back-edge GOTO excluded
        content = _unroll_loops(content, k, unwinding_assertions)
        # locate the exit test: first conditional GOTO leaving the span
        inner = {ins.lab for ins in content}
        test_end = None
        for i, ins in enumerate(content):
            if ins.kind == "GOTO" and ins.expr is not None and ins.goto_lab not in inner:
                test_end = i
                break
        copies: list[GotoInstruction] = []
        for _ in range(k):
            copies.extend(_relabel(content))
        residual: list[GotoInstruction] = []
        if test_end is not None:
            test_copy = _relabel(content[:test_end + 1])
            exit_jump = test_copy.pop()
            residual.extend(test_copy)
            cond = exit_jump.expr  # "not loop-condition"
            if unwinding_assertions:
                residual.append(GotoInstruction(
                    "ASSERT", fresh_lab(), exit_jump.loc, expr=cond,
                    prop_class="unwinding", message="unwinding assertion loop"))
            residual.append(GotoInstruction("ASSUME", fresh_lab(), exit_jump.loc,
                                            expr=cond))
        else:
            # no conditional exit at all: beyond the bound is unreachable
            if unwinding_assertions:
                residual.append(GotoInstruction(
                    "ASSERT", fresh_lab(), instrs[jump_pos].loc, expr=FALSE,
                    prop_class="unwinding", message="unwinding assertion loop"))
            residual.append(GotoInstruction("ASSUME", fresh_lab(),
                                            instrs[jump_pos].loc, expr=FALSE))
        instrs = instrs[:head_pos] + copies + residual + instrs[jump_pos + 1:]


def _rename_var(name: str, prefix: str, arg_bases: dict[str, str], suffix: str) -> str:
    """Instance-rename one qualified name from an inlined callee."""
    for param, base in arg_bases.items():
        if name == param:
            return base
        if name.startswith(param + "."):
            return base + name[len(param):]
    if name.startswith(prefix):
        rest = name[len(prefix):]
        head, dot, tail = rest.partition(".")
        return prefix + head + suffix + (dot + tail if dot else "")
    return name


def _rename_expr(e: Expr, rename) -> Expr:
    if isinstance(e, Var):
        return Var(e.type, rename(e.name))
    if isinstance(e, (Const, Nondet)):
        return e
    if isinstance(e, Unary):
        return Unary(e.type, e.op, _rename_expr(e.operand, rename))
    if isinstance(e, Binary):
        return Binary(e.type, e.op, _rename_expr(e.left, rename),
                      _rename_expr(e.right, rename))
    if isinstance(e, Compare):
        return Compare(e.type, e.op, _rename_expr(e.left, rename),
                       _rename_expr(e.right, rename))
    if isinstance(e, Ite):
        return Ite(e.type, _rename_expr(e.cond, rename),
                   _rename_expr(e.then, rename), _rename_expr(e.other, rename))
    if isinstance(e, Cast):
        return Cast(e.type, _rename_expr(e.operand, rename))
    if isinstance(e, CallExpr):
        return CallExpr(e.type, e.qname, tuple(_rename_expr(a, rename) for a in e.args))
    if isinstance(e, Index):
        return Index(e.type, rename(e.base), _rename_expr(e.index, rename), e.length)
    return e


class _Inliner:
    def __init__(self, gp: GotoProgram, k: int, unwinding_assertions: bool):
        self.gp = gp
        self.k = k
        self.unwinding_assertions = unwinding_assertions
        self.instance = itertools.count(1)
        self.bodies = {
            qname: _unroll_loops(instrs, k, unwinding_assertions)
            for qname, instrs in gp.functions.items()
        }

    def inline(self, instrs: list[GotoInstruction],
               stack: tuple[str, ...]) -> list[GotoInstruction]:
        out: list[GotoInstruction] = []
        for ins in instrs:
            if ins.kind == "ASSIGN" and isinstance(ins.expr, CallExpr):
                out.extend(self._expand_call(ins, stack))
            elif ins.kind == "END" and stack:
                out.append(replace(ins, kind="SKIP"))
            else:
                out.append(ins)
        return out

    def _expand_call(self, ins: GotoInstruction,
                     stack: tuple[str, ...]) -> list[GotoInstruction]:
        call: CallExpr = ins.expr
        qname = call.qname
        if stack.count(qname) >= self.k:
            residual = []
            if self.unwinding_assertions:
                residual.append(GotoInstruction(
                    "ASSERT", fresh_lab(), ins.loc, expr=FALSE,
                    prop_class="unwinding", message="unwinding assertion recursion"))
            residual.append(GotoInstruction("ASSUME", fresh_lab(), ins.loc, expr=FALSE))
            return residual
        meta = self.gp.meta[qname]
        n = next(self.instance)
        suffix = f"${n}"
        prefix = f"{qname}@"
        arg_bases: dict[str, str] = {}
        header: list[GotoInstruction] = []
        for (pq, ptype), arg in zip(meta.params, call.args):
            if pq in meta.byref:
                assert isinstance(arg, Var), "by-reference argument must be a variable"
                arg_bases[pq] = arg.name
            else:
                renamed = _rename_var(pq, prefix, {}, suffix)
                header.append(GotoInstruction("DECL", fresh_lab(), ins.loc,
                                              decl_name=renamed, decl_type=ptype))
                header.append(GotoInstruction("ASSIGN", fresh_lab(), ins.loc,
                                              target=Var(ptype, renamed), expr=arg))

        def rename(name: str) -> str:
            return _rename_var(name, prefix, arg_bases, suffix)

        body = _relabel(self.bodies[qname])
        renamed_body: list[GotoInstruction] = []
        for b in body:
            copy = replace(b)
            if copy.decl_name is not None:
                copy.decl_name = rename(copy.decl_name)
            if copy.target is not None:
                copy.target = _rename_expr(copy.target, rename)
            if copy.expr is not None:
                copy.expr = _rename_expr(copy.expr, rename)
            renamed_body.append(copy)
        renamed_body = self.inline(renamed_body, stack + (qname,))
        tail: list[GotoInstruction] = []
        if ins.target is not None and meta.retvar is not None:
            tail.append(GotoInstruction(
                "ASSIGN", fresh_lab(), ins.loc, target=ins.target,
                expr=Var(meta.ret_type, rename(meta.retvar))))
        return header + renamed_body + tail


def unwind(gp: GotoProgram, k: int, unwinding_assertions: bool = True) -> GotoProgram:
    """Duplicate loop bodies k times and inline calls to recursion depth k."""
    if k < 1:
        raise VerifierError(f"unwind bound must be >= 1, got {k}")
    inliner = _Inliner(gp, k, unwinding_assertions)
    entry = inliner.inline(inliner.bodies[gp.entry], ())
    result = GotoProgram({gp.entry: entry}, gp.entry, gp.meta, gp.st, unwound=k)
    result.renumber()
    if not is_acyclic(entry):
        raise VerifierError("internal: unwound program still has a cycle")
    return result


def is_acyclic(instrs: list[GotoInstruction]) -> bool:
    """Topological check over fall-through and jump edges."""
    pos = {ins.lab: i for i, ins in enumerate(instrs)}
    n = len(instrs)
    succs: list[list[int]] = []
    for i, ins in enumerate(instrs):
        edges = []
        if ins.kind == "GOTO":
            edges.append(pos[ins.goto_lab])
            if ins.expr is not None and i + 1 < n:
                edges.append(i + 1)
        elif ins.kind != "END" and i + 1 < n:
            edges.append(i + 1)
        succs.append(edges)
    state = [0] * n  # 0 unvisited, 1 in progress, 2 done
    for root in range(n):
        if state[root] != 0:
            continue
        state[root] = 1
        stack: list[tuple[int, int]] = [(root, 0)]
        while stack:
            node, edge_i = stack.pop()
            if edge_i < len(succs[node]):
                stack.append((node, edge_i + 1))
                nxt = succs[node][edge_i]
                if state[nxt] == 1:
                    return False
                if state[nxt] == 0:
                    state[nxt] = 1
                    stack.append((nxt, 0))
            else:
                state[node] = 2
    return True
