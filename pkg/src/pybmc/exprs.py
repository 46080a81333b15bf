"""Typed expression IR shared by the GOTO program, SSA trace and VC.

Leaves are constants and named variables (qualified names before SSA,
``base!version`` names after). Integer semantics are fixed-width two's
complement with wraparound; ``floordiv``/``mod`` follow SMT-LIB
bvsdiv/bvsrem (truncating, remainder sign follows the dividend), including
the defined results for zero divisors, so the concrete evaluator and an
SMT solver agree bit-exactly. Floats are IEEE binary64, round to nearest
even, with division by zero producing inf/NaN rather than an error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .vtypes import BOOL, BoolType, FloatType, IntType, VerifierType


@dataclass(frozen=True)
class Const:
    type: VerifierType
    value: int | float | bool


@dataclass(frozen=True)
class Var:
    type: VerifierType
    name: str


@dataclass(frozen=True)
class Nondet:
    """Unconstrained input marker; only valid as an assignment rhs."""

    type: VerifierType
    hint: str  # e.g. "nondet_int"


@dataclass(frozen=True)
class Unary:
    type: VerifierType
    op: str  # neg | not | bnot
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    type: VerifierType
    op: str  # add sub mul floordiv mod div band bor bxor shl shr and or
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Compare:
    type: VerifierType  # always BOOL
    op: str  # eq ne lt le gt ge
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Ite:
    type: VerifierType
    cond: "Expr"
    then: "Expr"
    other: "Expr"


@dataclass(frozen=True)
class Cast:
    """Value conversion; semantics depend on source and target types."""

    type: VerifierType
    operand: "Expr"


@dataclass(frozen=True)
class CallExpr:
    """Unresolved call site; eliminated by inlining during unwinding."""

    type: VerifierType
    qname: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Index:
    """Read of one element of a fixed-length list variable."""

    type: VerifierType
    base: str  # list variable name
    index: "Expr"
    length: int


Expr = Const | Var | Nondet | Unary | Binary | Compare | Ite | Cast | CallExpr | Index

TRUE = Const(BOOL, True)
FALSE = Const(BOOL, False)


def is_const(e: Expr, value: object = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# --- smart boolean constructors (light on-the-fly simplification) ---

def not_(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(BOOL, not e.value)
    if isinstance(e, Unary) and e.op == "not":
        return e.operand
    return Unary(BOOL, "not", e)


def and_(a: Expr, b: Expr) -> Expr:
    if is_const(a, True):
        return b
    if is_const(b, True):
        return a
    if is_const(a, False) or is_const(b, False):
        return FALSE
    return Binary(BOOL, "and", a, b)


def or_(a: Expr, b: Expr) -> Expr:
    if is_const(a, False):
        return b
    if is_const(b, False):
        return a
    if is_const(a, True) or is_const(b, True):
        return TRUE
    return Binary(BOOL, "or", a, b)


def ite(cond: Expr, then: Expr, other: Expr) -> Expr:
    if is_const(cond, True):
        return then
    if is_const(cond, False):
        return other
    if then == other:
        return then
    return Ite(then.type, cond, then, other)


# --- concrete evaluation ---

class EvalError(Exception):
    pass


def wrap_int(value: int, t: IntType) -> int:
    value &= (1 << t.width) - 1
    if t.signed and value >= 1 << (t.width - 1):
        value -= 1 << t.width
    return value


def _unsigned(value: int, width: int) -> int:
    return value & ((1 << width) - 1)


def _trunc_div(a: int, b: int, t: IntType) -> int:
    if b == 0:
        if not t.signed:
            return t.max_value  # bvudiv x 0 = all ones
        return -1 if a >= 0 else 1  # bvsdiv via bvudiv on magnitudes
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return wrap_int(q, t)


def _trunc_rem(a: int, b: int, t: IntType) -> int:
    if b == 0:
        return a  # bvurem/bvsrem x 0 = x
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return wrap_int(a - q * b, t)


def _shift(op: str, a: int, b: int, t: IntType) -> int:
    amount = _unsigned(b, t.width)
    if op == "shl":
        return wrap_int(a << amount, t) if amount < t.width else 0
    if op == "shr" and not t.signed:
        return a >> amount if amount < t.width else 0
    # arithmetic right shift on the signed value
    if amount >= t.width:
        return -1 if a < 0 else 0
    return wrap_int(a >> amount, t)


def _float_div(a: float, b: float) -> float:
    if b == 0.0:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)
    return a / b


def cast_value(value: int | float | bool, src: VerifierType, dst: VerifierType):
    if isinstance(dst, BoolType):
        return bool(value != 0) if not isinstance(src, BoolType) else bool(value)
    if isinstance(dst, FloatType):
        return float(value)
    assert isinstance(dst, IntType)
    if isinstance(src, FloatType):
        f = value
        if math.isnan(f):
            return 0
        if math.isinf(f):
            return dst.max_value if f > 0 else dst.min_value
        return wrap_int(int(f), dst)  # truncate toward zero
    return wrap_int(int(value), dst)


_CMP = {
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
}


def eval_expr(expr: Expr, env: dict[str, int | float | bool]):
    """Evaluate under a concrete environment with the semantics above."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, Var):
        if expr.name not in env:
            raise EvalError(f"unbound variable {expr.name}")
        return env[expr.name]
    if isinstance(expr, Unary):
        v = eval_expr(expr.operand, env)
        if expr.op == "not":
            return not v
        if expr.op == "neg":
            return wrap_int(-v, expr.type) if isinstance(expr.type, IntType) else -v
        return wrap_int(~v, expr.type)  # bnot
    if isinstance(expr, Binary):
        op = expr.op
        if op == "and":
            return bool(eval_expr(expr.left, env)) and bool(eval_expr(expr.right, env))
        if op == "or":
            return bool(eval_expr(expr.left, env)) or bool(eval_expr(expr.right, env))
        a = eval_expr(expr.left, env)
        b = eval_expr(expr.right, env)
        t = expr.type
        if isinstance(t, FloatType):
            if op == "add":
                return a + b
            if op == "sub":
                return a - b
            if op == "mul":
                return a * b
            if op == "div":
                return _float_div(a, b)
            raise EvalError(f"float op {op}")
        assert isinstance(t, IntType)
        if op == "add":
            return wrap_int(a + b, t)
        if op == "sub":
            return wrap_int(a - b, t)
        if op == "mul":
            return wrap_int(a * b, t)
        if op == "floordiv":
            return _trunc_div(a, b, t)
        if op == "mod":
            return _trunc_rem(a, b, t)
        if op == "band":
            return wrap_int(a & b, t)
        if op == "bor":
            return wrap_int(a | b, t)
        if op == "bxor":
            return wrap_int(a ^ b, t)
        if op in ("shl", "shr"):
            return _shift(op, a, b, t)
        raise EvalError(f"int op {op}")
    if isinstance(expr, Compare):
        a = eval_expr(expr.left, env)
        b = eval_expr(expr.right, env)
        return _CMP[expr.op](a, b)
    if isinstance(expr, Ite):
        if eval_expr(expr.cond, env):
            return eval_expr(expr.then, env)
        return eval_expr(expr.other, env)
    if isinstance(expr, Cast):
        return cast_value(eval_expr(expr.operand, env), expr.operand.type, expr.type)
    if isinstance(expr, Index):
        i = int(eval_expr(expr.index, env))
        if not 0 <= i < expr.length:
            i = expr.length - 1  # same fallback as the ite-chain expansion
        return env[f"{expr.base}.{i}"]
    if isinstance(expr, Nondet):
        raise EvalError("nondet value reached the evaluator")
    raise EvalError(f"cannot evaluate {type(expr).__name__}")


# --- constant folding ---

def fold(expr: Expr) -> Expr:
    """Bottom-up constant folding; preserves semantics exactly."""
    if isinstance(expr, (Const, Var, Nondet)):
        return expr
    if isinstance(expr, Unary):
        x = fold(expr.operand)
        e = Unary(expr.type, expr.op, x)
        if isinstance(x, Const):
            return Const(expr.type, eval_expr(e, {}))
        if expr.op == "not":
            return not_(x)
        return e
    if isinstance(expr, Binary):
        left = fold(expr.left)
        right = fold(expr.right)
        if expr.op == "and":
            return and_(left, right)
        if expr.op == "or":
            return or_(left, right)
        e = Binary(expr.type, expr.op, left, right)
        if isinstance(left, Const) and isinstance(right, Const):
            return Const(expr.type, eval_expr(e, {}))
        return e
    if isinstance(expr, Compare):
        left = fold(expr.left)
        right = fold(expr.right)
        e = Compare(BOOL, expr.op, left, right)
        if isinstance(left, Const) and isinstance(right, Const):
            return Const(BOOL, eval_expr(e, {}))
        return e
    if isinstance(expr, Ite):
        cond = fold(expr.cond)
        return ite(cond, fold(expr.then), fold(expr.other))
    if isinstance(expr, Cast):
        x = fold(expr.operand)
        if x.type == expr.type:
            return x
        e = Cast(expr.type, x)
        if isinstance(x, Const):
            return Const(expr.type, eval_expr(e, {}))
        return e
    if isinstance(expr, Index):
        idx = fold(expr.index)
        if isinstance(idx, Const) and 0 <= idx.value < expr.length:
            return Var(expr.type, f"{expr.base}.{int(idx.value)}")
        return Index(expr.type, expr.base, idx, expr.length)
    if isinstance(expr, CallExpr):
        return CallExpr(expr.type, expr.qname, tuple(fold(a) for a in expr.args))
    return expr


def subst_vars(expr: Expr, mapping: dict[str, Expr]) -> Expr:
    """Replace variables by expressions (used for constant propagation)."""
    if isinstance(expr, Var):
        return mapping.get(expr.name, expr)
    if isinstance(expr, (Const, Nondet)):
        return expr
    if isinstance(expr, Unary):
        return Unary(expr.type, expr.op, subst_vars(expr.operand, mapping))
    if isinstance(expr, Binary):
        return Binary(expr.type, expr.op, subst_vars(expr.left, mapping),
                      subst_vars(expr.right, mapping))
    if isinstance(expr, Compare):
        return Compare(expr.type, expr.op, subst_vars(expr.left, mapping),
                       subst_vars(expr.right, mapping))
    if isinstance(expr, Ite):
        return Ite(expr.type, subst_vars(expr.cond, mapping),
                   subst_vars(expr.then, mapping), subst_vars(expr.other, mapping))
    if isinstance(expr, Cast):
        return Cast(expr.type, subst_vars(expr.operand, mapping))
    if isinstance(expr, CallExpr):
        return CallExpr(expr.type, expr.qname,
                        tuple(subst_vars(a, mapping) for a in expr.args))
    if isinstance(expr, Index):
        return Index(expr.type, expr.base, subst_vars(expr.index, mapping),
                     expr.length)
    return expr


def variables(expr: Expr, out: set[str] | None = None) -> set[str]:
    if out is None:
        out = set()
    if isinstance(expr, Var):
        out.add(expr.name)
    elif isinstance(expr, Index):
        for j in range(expr.length):
            out.add(f"{expr.base}.{j}")
        variables(expr.index, out)
    elif isinstance(expr, Unary):
        variables(expr.operand, out)
    elif isinstance(expr, (Binary, Compare)):
        variables(expr.left, out)
        variables(expr.right, out)
    elif isinstance(expr, Ite):
        variables(expr.cond, out)
        variables(expr.then, out)
        variables(expr.other, out)
    elif isinstance(expr, Cast):
        variables(expr.operand, out)
    elif isinstance(expr, CallExpr):
        for a in expr.args:
            variables(a, out)
    return out


# --- rendering ---

def display_name(name: str) -> str:
    """Strip qualification, inline-instance and SSA-version suffixes."""
    short = name.split("@")[-1]
    short = short.split("!")[0]
    if "$" in short:
        short = short.split("$")[0]
    return short


def is_synthetic(name: str) -> bool:
    return display_name(name).startswith("%")


_PREC = {
    "or": 1, "and": 2, "not": 3,
    "eq": 4, "ne": 4, "lt": 4, "le": 4, "gt": 4, "ge": 4,
    "bor": 5, "bxor": 6, "band": 7, "shl": 8, "shr": 8,
    "add": 9, "sub": 9,
    "mul": 10, "div": 10, "floordiv": 10, "mod": 10,
    "neg": 11, "bnot": 11,
}

_OP_TEXT = {
    "add": "+", "sub": "-", "mul": "*", "div": "/", "floordiv": "//",
    "mod": "%", "band": "&", "bor": "|", "bxor": "^", "shl": "<<",
    "shr": ">>", "and": "and", "or": "or",
    "eq": "==", "ne": "!=", "lt": "<", "le": "<=", "gt": ">", "ge": ">=",
}


def pretty(expr: Expr, name_fn: Callable[[str], str] = display_name) -> str:
    """Python-ish rendering, used for properties and --show dumps."""

    def go(e: Expr, parent_prec: int) -> str:
        if isinstance(e, Const):
            if isinstance(e.type, BoolType):
                return "True" if e.value else "False"
            return repr(e.value)
        if isinstance(e, Var):
            return name_fn(e.name)
        if isinstance(e, Nondet):
            return f"{e.hint}()"
        if isinstance(e, Unary):
            prec = _PREC[e.op]
            inner = go(e.operand, prec)
            text = f"not {inner}" if e.op == "not" else \
                f"-{inner}" if e.op == "neg" else f"~{inner}"
            return f"({text})" if prec < parent_prec else text
        if isinstance(e, (Binary, Compare)):
            prec = _PREC[e.op]
            text = f"{go(e.left, prec)} {_OP_TEXT[e.op]} {go(e.right, prec + 1)}"
            return f"({text})" if prec < parent_prec else text
        if isinstance(e, Ite):
            text = f"{go(e.then, 1)} if {go(e.cond, 1)} else {go(e.other, 1)}"
            return f"({text})"
        if isinstance(e, Cast):
            return f"{e.type}({go(e.operand, 0)})"
        if isinstance(e, CallExpr):
            args = ", ".join(go(a, 0) for a in e.args)
            return f"{name_fn(e.qname)}({args})"
        if isinstance(e, Index):
            return f"{name_fn(e.base)}[{go(e.index, 0)}]"
        return "?"

    return go(expr, 0)
