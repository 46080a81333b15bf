"""Symbolic execution of an acyclic GOTO program into an SSA trace.

One linear sweep with path merging: branches park their state at the jump
target, and when the sweep reaches a parked label every variable whose
version differs between the incoming paths gets a guarded phi step
(realized as ite over the two versions). Assumptions strengthen the path
guard of everything after them; assertions record their accumulated guard.
Fixed-length lists are expanded to one scalar per element here, so the
trace (and everything downstream) is scalar-only.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

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
    fold,
    is_const,
    ite,
    not_,
    or_,
    pretty,
    subst_vars,
    variables,
)
from .goto import GotoInstruction, GotoProgram, back_edges
from .vtypes import BOOL, ListType, VerifierType


@dataclass(frozen=True)
class SsaSymbol:
    base: str
    version: int
    type: VerifierType

    @property
    def name(self) -> str:
        return f"{self.base}!{self.version}"

    def to_var(self) -> Var:
        return Var(self.type, self.name)


@dataclass
class SsaStep:
    kind: str  # assign | assume | assert | phi
    guard: Expr
    loc: Loc | None = None
    goto_index: int = -1
    lhs: SsaSymbol | None = None
    rhs: Expr | None = None  # assign rhs; Nondet marker for inputs
    cond: Expr | None = None  # phi selector
    then_sym: SsaSymbol | None = None
    else_sym: SsaSymbol | None = None
    prop_class: str | None = None
    message: str | None = None
    is_input: bool = False


@dataclass
class SsaTrace:
    steps: list[SsaStep]
    final_versions: dict[str, int]
    var_types: dict[str, VerifierType]
    inputs: list[SsaSymbol]
    source_path: str = "<unit>"

    def assertion_indices(self) -> list[int]:
        return [i for i, s in enumerate(self.steps) if s.kind == "assert"]

    def free_symbols(self) -> list[SsaSymbol]:
        """Inputs plus any version-0 symbol that is read but never assigned."""
        assigned = {s.lhs.name for s in self.steps if s.lhs is not None}
        seen: dict[str, SsaSymbol] = {s.name: s for s in self.inputs}
        for step in self.steps:
            for e in (step.rhs, step.guard, step.cond):
                if e is None:
                    continue
                for name in variables(e):
                    if name in assigned or name in seen:
                        continue
                    base, _, version = name.rpartition("!")
                    if version == "0" and base in self.var_types:
                        seen[name] = SsaSymbol(base, 0, self.var_types[base])
        return list(seen.values())


class _State:
    __slots__ = ("versions", "guard")

    def __init__(self, versions: dict[str, int], guard: Expr):
        self.versions = versions
        self.guard = guard


class _Executor:
    def __init__(self, gp: GotoProgram):
        self.gp = gp
        self.steps: list[SsaStep] = []
        # per-path view: base -> visible version; rolled back at merges
        self.versions: dict[str, int] = {}
        # global allocator: base -> highest version ever created; never reset,
        # so divergent paths cannot reuse a version (single assignment)
        self.counters: dict[str, int] = {}
        self.var_types: dict[str, VerifierType] = {}
        self.inputs: list[SsaSymbol] = []

    # -- symbol helpers --

    def _type_of(self, base: str, hint: VerifierType | None = None) -> VerifierType:
        if base not in self.var_types:
            if hint is None:
                raise VerifierError(f"untyped variable {base}")
            self.var_types[base] = hint
        return self.var_types[base]

    def current(self, base: str, hint: VerifierType | None = None) -> SsaSymbol:
        t = self._type_of(base, hint)
        return SsaSymbol(base, self.versions.get(base, 0), t)

    def bump(self, base: str, hint: VerifierType | None = None) -> SsaSymbol:
        t = self._type_of(base, hint)
        v = self.counters.get(base, 0) + 1
        self.counters[base] = v
        self.versions[base] = v
        return SsaSymbol(base, v, t)

    # -- expression versioning --

    def subst(self, e: Expr) -> Expr:
        if isinstance(e, Var):
            return self.current(e.name, e.type).to_var()
        if isinstance(e, (Const, Nondet)):
            return e
        if isinstance(e, Unary):
            return Unary(e.type, e.op, self.subst(e.operand))
        if isinstance(e, Binary):
            return Binary(e.type, e.op, self.subst(e.left), self.subst(e.right))
        if isinstance(e, Compare):
            return Compare(e.type, e.op, self.subst(e.left), self.subst(e.right))
        if isinstance(e, Ite):
            return Ite(e.type, self.subst(e.cond), self.subst(e.then),
                       self.subst(e.other))
        if isinstance(e, Cast):
            return Cast(e.type, self.subst(e.operand))
        if isinstance(e, Index):
            return self._read_element(e)
        if isinstance(e, CallExpr):
            raise VerifierError(f"call to {e.qname} survived unwinding")
        raise VerifierError(f"cannot version {type(e).__name__}")

    def _read_element(self, e: Index) -> Expr:
        idx = self.subst(e.index)
        idx = fold(idx)
        if isinstance(idx, Const):
            j = int(idx.value)
            if not 0 <= j < e.length:
                j = e.length - 1
            return self.current(f"{e.base}.{j}", e.type).to_var()
        out: Expr = self.current(f"{e.base}.{e.length - 1}", e.type).to_var()
        for j in range(e.length - 2, -1, -1):
            cond = Compare(BOOL, "eq", idx, Const(idx.type, j))
            out = Ite(e.type, cond, self.current(f"{e.base}.{j}", e.type).to_var(), out)
        return out

    # -- execution --

    def _last_references(self, instrs: list[GotoInstruction]) -> dict[str, int]:
        """Last instruction position that mentions each base name.

        Joins only merge variables still referenced at or after the join;
        everything else (dead inline-instance locals in particular) keeps
        whatever version its path left behind.
        """
        last: dict[str, int] = {}
        for pos, ins in enumerate(instrs):
            names: set[str] = set()
            if ins.expr is not None and not isinstance(ins.expr, Nondet):
                names |= variables(ins.expr)
            target = ins.target
            if isinstance(target, Var):
                names.add(target.name)
            elif isinstance(target, Index):
                names |= {f"{target.base}.{j}" for j in range(target.length)}
                names |= variables(target.index)
            for name in names:
                last[name] = pos
        return last

    def run(self) -> SsaTrace:
        instrs = self.gp.entry_instructions()
        self.gp.renumber()
        pending: dict[int, list[_State]] = {}
        guard: Expr = TRUE
        last_ref = self._last_references(instrs)

        for pos, ins in enumerate(instrs):
            if ins.lab in pending:
                for incoming in pending.pop(ins.lab):
                    guard = self._merge(incoming, guard,
                                        lambda base: last_ref.get(base, -1) >= pos)
            kind = ins.kind
            if kind == "DECL":
                self._declare(ins)
            elif kind == "ASSIGN":
                self._assign(ins, guard)
            elif kind == "ASSUME":
                e = self.subst(ins.expr)
                self.steps.append(SsaStep("assume", guard, ins.loc, ins.index, rhs=e))
                guard = and_(guard, e)
            elif kind == "ASSERT":
                e = self.subst(ins.expr)
                self.steps.append(SsaStep(
                    "assert", guard, ins.loc, ins.index, rhs=e,
                    prop_class=ins.prop_class, message=ins.message))
            elif kind == "GOTO":
                if ins.expr is None:
                    pending.setdefault(ins.goto_lab, []).append(
                        _State(dict(self.versions), guard))
                    guard = FALSE
                else:
                    g = self.subst(ins.expr)
                    pending.setdefault(ins.goto_lab, []).append(
                        _State(dict(self.versions), and_(guard, g)))
                    guard = and_(guard, not_(g))
            # SKIP / END: nothing

        if pending:
            raise VerifierError("internal: unresolved jump targets after sweep")
        return SsaTrace(
            steps=self.steps,
            final_versions=dict(self.versions),
            var_types=dict(self.var_types),
            inputs=self.inputs,
            source_path=self.gp.st.unit.source_path,
        )

    def _declare(self, ins: GotoInstruction) -> None:
        t = ins.decl_type
        if isinstance(t, ListType):
            for j in range(max(t.length, 0)):
                self._type_of(f"{ins.decl_name}.{j}", t.elem)
        else:
            self._type_of(ins.decl_name, t)

    def _assign(self, ins: GotoInstruction, guard: Expr) -> None:
        target = ins.target
        if target is None:
            raise VerifierError("discarded call survived unwinding")
        if isinstance(ins.expr, Nondet):
            sym = self.bump(target.name, target.type)
            self.inputs.append(sym)
            self.steps.append(SsaStep("assign", guard, ins.loc, ins.index,
                                      lhs=sym, rhs=ins.expr, is_input=True))
            return
        rhs = self.subst(ins.expr)
        if isinstance(target, Var):
            sym = self.bump(target.name, target.type)
            self.steps.append(SsaStep("assign", guard, ins.loc, ins.index,
                                      lhs=sym, rhs=rhs))
            return
        # element write through a (possibly symbolic) index
        assert isinstance(target, Index)
        idx = fold(self.subst(target.index))
        if isinstance(idx, Const):
            j = int(idx.value)
            if not 0 <= j < target.length:
                j = target.length - 1
            sym = self.bump(f"{target.base}.{j}", target.type)
            self.steps.append(SsaStep("assign", guard, ins.loc, ins.index,
                                      lhs=sym, rhs=rhs))
            return
        for j in range(target.length):
            old = self.current(f"{target.base}.{j}", target.type)
            cond = Compare(BOOL, "eq", idx, Const(idx.type, j))
            sym = self.bump(f"{target.base}.{j}", target.type)
            self.steps.append(SsaStep(
                "assign", guard, ins.loc, ins.index, lhs=sym,
                rhs=Ite(target.type, cond, rhs, old.to_var())))

    def _merge(self, incoming: _State, guard: Expr, live) -> Expr:
        if is_const(guard, False):
            self.versions = dict(incoming.versions)
            return incoming.guard
        if is_const(incoming.guard, False):
            return guard
        bases = set(self.versions) | set(incoming.versions)
        for base in sorted(bases):
            cur_v = self.versions.get(base, 0)
            inc_v = incoming.versions.get(base, 0)
            if cur_v == inc_v or not live(base):
                continue
            t = self.var_types[base]
            then_sym = SsaSymbol(base, inc_v, t)
            else_sym = SsaSymbol(base, cur_v, t)
            merged = self.bump(base)
            self.steps.append(SsaStep(
                "phi", or_(incoming.guard, guard), cond=incoming.guard,
                lhs=merged, then_sym=then_sym, else_sym=else_sym))
        return or_(incoming.guard, guard)


def execute(gp: GotoProgram) -> SsaTrace:
    """Single-pass symbolic execution with join-point phi merging."""
    if back_edges(gp.entry_instructions()):
        raise VerifierError("symbolic execution needs an acyclic (unwound) program")
    return _Executor(gp).run()


def step_formula(step: SsaStep) -> Expr | None:
    """The constraint one step contributes to C (None for pure inputs)."""
    if step.kind == "assign":
        if isinstance(step.rhs, Nondet):
            return None
        return Compare(BOOL, "eq", step.lhs.to_var(), step.rhs)
    if step.kind == "phi":
        return Compare(BOOL, "eq", step.lhs.to_var(),
                       ite(step.cond, step.then_sym.to_var(), step.else_sym.to_var()))
    if step.kind == "assume":
        return _implies(step.guard, step.rhs)
    return None


def _implies(guard: Expr, e: Expr) -> Expr:
    if is_const(guard, True):
        return e
    return or_(not_(guard), e)


def simplify(trace: SsaTrace) -> SsaTrace:
    """Fold constants (propagating through the single-assignment chain) and
    drop steps on dead paths; verdict-preserving by construction."""
    consts: dict[str, Const] = {}
    folded: list[SsaStep] = []
    for step in trace.steps:
        s = replace(step)
        s.guard = fold(subst_vars(s.guard, consts))
        if s.rhs is not None and not isinstance(s.rhs, Nondet):
            s.rhs = fold(subst_vars(s.rhs, consts))
        if s.cond is not None:
            s.cond = fold(subst_vars(s.cond, consts))
        if s.kind == "phi" and isinstance(s.cond, Const):
            chosen = s.then_sym if s.cond.value else s.else_sym
            rhs: Expr = consts.get(chosen.name, chosen.to_var())
            s = replace(s, kind="assign", rhs=rhs,
                        cond=None, then_sym=None, else_sym=None)
        if s.kind == "assign" and isinstance(s.rhs, Const) and not s.is_input:
            consts[s.lhs.name] = s.rhs
        folded.append(s)

    referenced: set[str] = set()
    for s in folded:
        for e in (s.rhs, s.guard, s.cond):
            if e is not None and not isinstance(e, Nondet):
                referenced.update(variables(e))
        for sym in (s.then_sym, s.else_sym):
            if sym is not None:
                referenced.add(sym.name)

    # dead-path steps drop once nothing alive references their symbol; iterate
    # to a fixpoint so chains of dead definitions disappear together
    kept = folded
    while True:
        referenced = set()
        for s in kept:
            if is_const(s.guard, False) and s.kind in ("assume", "assert"):
                continue
            for e in (s.rhs, s.guard, s.cond):
                if e is not None and not isinstance(e, Nondet):
                    referenced.update(variables(e))
            for sym in (s.then_sym, s.else_sym):
                if sym is not None:
                    referenced.add(sym.name)
        next_kept = []
        for s in kept:
            if is_const(s.guard, False):
                if s.lhs is None or s.lhs.name not in referenced:
                    continue
            next_kept.append(s)
        if len(next_kept) == len(kept):
            break
        kept = next_kept
    return SsaTrace(kept, trace.final_versions, trace.var_types,
                    [i for i in trace.inputs
                     if any(k.lhs is not None and k.lhs.name == i.name for k in kept)],
                    trace.source_path)


def render_ssa(trace: SsaTrace) -> str:
    lines = []
    for step in trace.steps:
        where = f"  // {trace.source_path}:{step.loc.line}" if step.loc else ""
        guard = pretty(step.guard, name_fn=lambda n: n)
        if step.kind == "assign":
            rhs = "nondet" if isinstance(step.rhs, Nondet) else \
                pretty(step.rhs, name_fn=lambda n: n)
            lines.append(f"{guard} ⊢ {step.lhs.name} := {rhs}{where}")
        elif step.kind == "phi":
            lines.append(
                f"{guard} ⊢ {step.lhs.name} := "
                f"phi({pretty(step.cond, name_fn=lambda n: n)} -> "
                f"{step.then_sym.name}, {step.else_sym.name}){where}")
        else:
            tag = "assume" if step.kind == "assume" else f"assert[{step.prop_class}]"
            lines.append(f"{guard} ⊢ {tag} "
                         f"{pretty(step.rhs, name_fn=lambda n: n)}{where}")
    return "\n".join(lines)
