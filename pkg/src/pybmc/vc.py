"""Verification conditions: C (constraints) and P (property), query C AND not P.

One VC per assertion: C conjoins every assignment equality, phi equality and
guarded assumption that precedes the assertion in the trace; P is the
assertion's expression weakened by its accumulated path guard.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import Loc
from .exprs import Compare, Expr, TRUE, Var, and_, is_const, not_, or_
from .symex import SsaSymbol, SsaTrace, step_formula
from .vtypes import VerifierType


@dataclass
class Vc:
    constraints: list[Expr]  # ordered conjuncts of C
    prop: Expr  # P
    loc: Loc | None
    prop_class: str
    message: str
    inputs: list[SsaSymbol]  # unconstrained symbols to model
    symbols: dict[str, VerifierType]  # every referenced symbol's sort
    source_path: str = "<unit>"
    assertion_index: int = -1

    @property
    def constraint_formula(self) -> Expr:
        out: Expr = TRUE
        for c in self.constraints:
            out = and_(out, c)
        return out

    @property
    def query(self) -> Expr:
        return and_(self.constraint_formula, not_(self.prop))


def _implies(guard: Expr, e: Expr) -> Expr:
    if is_const(guard, True):
        return e
    return or_(not_(guard), e)


def generate_vc(trace: SsaTrace, assertion_index: int) -> Vc:
    """Build the VC for the assertion at the given step index."""
    step = trace.steps[assertion_index]
    if step.kind != "assert":
        raise ValueError(f"step {assertion_index} is not an assertion")
    constraints: list[Expr] = []
    assigned: set[str] = set()
    for s in trace.steps[:assertion_index]:
        formula = step_formula(s)
        if s.lhs is not None:
            assigned.add(s.lhs.name)
        if formula is not None:
            constraints.append(formula)
    prop = _implies(step.guard, step.rhs)

    symbols: dict[str, VerifierType] = {}
    order: list[str] = []
    for e in constraints + [prop]:
        for name in _ordered_vars(e):
            if name not in symbols:
                base = name.rpartition("!")[0]
                symbols[name] = trace.var_types[base]
                order.append(name)

    input_names = {s.lhs.name for s in trace.steps[:assertion_index]
                   if s.is_input and s.lhs is not None}
    inputs: list[SsaSymbol] = []
    for name in order:
        base, _, version = name.rpartition("!")
        if name in input_names or (name not in assigned and version == "0"):
            inputs.append(SsaSymbol(base, int(version), symbols[name]))
    return Vc(constraints, prop, step.loc, step.prop_class or "assertion",
              step.message or "", inputs, symbols, trace.source_path,
              assertion_index)


def _ordered_vars(e: Expr) -> list[str]:
    """Variables in a deterministic left-to-right traversal order."""
    out: list[str] = []
    seen: set[str] = set()

    def go(x: Expr) -> None:
        if isinstance(x, Var):
            if x.name not in seen:
                seen.add(x.name)
                out.append(x.name)
            return
        for name in ("operand", "left", "right", "cond", "then", "other", "index"):
            child = getattr(x, name, None)
            if child is not None and not isinstance(child, (str, int)):
                go(child)
        for child in getattr(x, "args", ()):
            go(child)

    go(e)
    return out


def generate_all_vcs(trace: SsaTrace) -> list[Vc]:
    return [generate_vc(trace, i) for i in trace.assertion_indices()]


def evaluate_query(vc: Vc, model: dict[str, int | float | bool]) -> bool:
    """Concretely evaluate C AND not P under an input model (definitional walk)."""
    from .exprs import eval_expr

    env: dict[str, int | float | bool] = dict(model)
    for c in vc.constraints:
        if isinstance(c, Compare) and c.op == "eq" and isinstance(c.left, Var) \
                and c.left.name not in env:
            env[c.left.name] = eval_expr(c.right, env)
            continue
        if not eval_expr(c, env):
            return False
    return not eval_expr(vc.prop, env)
