"""SMT-LIB v2 script emission for verification conditions.

Sorts: Bool, (_ BitVec w) and (_ FloatingPoint 11 53); logic QF_BV, or
QF_BVFP when a float appears. Symbol names are ``base!version`` (the
characters @ . $ % ! are all legal in SMT-LIB simple symbols). Emission is
deterministic: byte-identical output for the same VC.
"""
from __future__ import annotations

import struct

from .errors import UnsupportedSort
from .exprs import (
    Binary,
    Cast,
    Compare,
    Const,
    Expr,
    Index,
    Ite,
    Nondet,
    Unary,
    Var,
)
from .vc import Vc
from .vtypes import BoolType, FloatType, IntType, VerifierType

FP_SORT = "(_ FloatingPoint 11 53)"

_INT_BIN = {
    "add": "bvadd", "sub": "bvsub", "mul": "bvmul", "band": "bvand",
    "bor": "bvor", "bxor": "bvxor", "shl": "bvshl",
}
_FP_BIN = {"add": "fp.add", "sub": "fp.sub", "mul": "fp.mul", "div": "fp.div"}
_SIGNED_CMP = {"lt": "bvslt", "le": "bvsle", "gt": "bvsgt", "ge": "bvsge"}
_UNSIGNED_CMP = {"lt": "bvult", "le": "bvule", "gt": "bvugt", "ge": "bvuge"}
_FP_CMP = {"lt": "fp.lt", "le": "fp.leq", "gt": "fp.gt", "ge": "fp.geq"}


def sort_text(t: VerifierType) -> str:
    if isinstance(t, BoolType):
        return "Bool"
    if isinstance(t, IntType):
        return f"(_ BitVec {t.width})"
    if isinstance(t, FloatType):
        return FP_SORT
    raise UnsupportedSort(f"no SMT sort for {t}")


def _bv_const(value: int, width: int) -> str:
    return f"(_ bv{value & ((1 << width) - 1)} {width})"


def _fp_const(value: float) -> str:
    if value != value:  # NaN
        return "(_ NaN 11 53)"
    if value == float("inf"):
        return "(_ +oo 11 53)"
    if value == float("-inf"):
        return "(_ -oo 11 53)"
    bits = struct.unpack(">Q", struct.pack(">d", value))[0]
    sign = (bits >> 63) & 1
    exp = (bits >> 52) & 0x7FF
    mant = bits & ((1 << 52) - 1)
    return f"(fp #b{sign} #b{exp:011b} #b{mant:052b})"


def emit_expr(e: Expr) -> str:
    if isinstance(e, Const):
        t = e.type
        if isinstance(t, BoolType):
            return "true" if e.value else "false"
        if isinstance(t, IntType):
            return _bv_const(int(e.value), t.width)
        return _fp_const(float(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        x = emit_expr(e.operand)
        if e.op == "not":
            return f"(not {x})"
        if e.op == "bnot":
            return f"(bvnot {x})"
        if isinstance(e.type, FloatType):
            return f"(fp.neg {x})"
        return f"(bvneg {x})"
    if isinstance(e, Binary):
        left, right = emit_expr(e.left), emit_expr(e.right)
        t = e.type
        if isinstance(t, BoolType):
            return f"({e.op} {left} {right})"  # and / or
        if isinstance(t, FloatType):
            return f"({_FP_BIN[e.op]} RNE {left} {right})"
        assert isinstance(t, IntType)
        if e.op in _INT_BIN:
            return f"({_INT_BIN[e.op]} {left} {right})"
        if e.op == "floordiv":
            return f"({'bvsdiv' if t.signed else 'bvudiv'} {left} {right})"
        if e.op == "mod":
            return f"({'bvsrem' if t.signed else 'bvurem'} {left} {right})"
        if e.op == "shr":
            return f"({'bvashr' if t.signed else 'bvlshr'} {left} {right})"
        raise UnsupportedSort(f"operator {e.op} on {t}")
    if isinstance(e, Compare):
        left, right = emit_expr(e.left), emit_expr(e.right)
        ot = e.left.type
        if isinstance(ot, FloatType):
            if e.op == "eq":
                return f"(fp.eq {left} {right})"
            if e.op == "ne":
                return f"(not (fp.eq {left} {right}))"
            return f"({_FP_CMP[e.op]} {left} {right})"
        if e.op == "eq":
            return f"(= {left} {right})"
        if e.op == "ne":
            return f"(not (= {left} {right}))"
        table = _SIGNED_CMP if isinstance(ot, IntType) and ot.signed else _UNSIGNED_CMP
        return f"({table[e.op]} {left} {right})"
    if isinstance(e, Ite):
        return f"(ite {emit_expr(e.cond)} {emit_expr(e.then)} {emit_expr(e.other)})"
    if isinstance(e, Cast):
        return _emit_cast(e)
    if isinstance(e, (Nondet, Index)):
        raise UnsupportedSort(f"{type(e).__name__} cannot be emitted")
    raise UnsupportedSort(f"cannot emit {type(e).__name__}")


def _emit_cast(e: Cast) -> str:
    src, dst = e.operand.type, e.type
    x = emit_expr(e.operand)
    if src == dst:
        return x
    if isinstance(dst, BoolType):
        if isinstance(src, IntType):
            return f"(distinct {x} {_bv_const(0, src.width)})"
        raise UnsupportedSort(f"cast {src} -> bool")
    if isinstance(dst, IntType):
        if isinstance(src, BoolType):
            return f"(ite {x} {_bv_const(1, dst.width)} {_bv_const(0, dst.width)})"
        if isinstance(src, IntType):
            if dst.width == src.width:
                return x
            if dst.width > src.width:
                ext = "sign_extend" if src.signed else "zero_extend"
                return f"((_ {ext} {dst.width - src.width}) {x})"
            return f"((_ extract {dst.width - 1} 0) {x})"
        # float -> int, truncate toward zero
        conv = "fp.to_sbv" if dst.signed else "fp.to_ubv"
        return f"((_ {conv} {dst.width}) RTZ {x})"
    if isinstance(dst, FloatType):
        if isinstance(src, BoolType):
            return f"(ite {x} {_fp_const(1.0)} {_fp_const(0.0)})"
        if isinstance(src, IntType):
            conv = "to_fp" if src.signed else "to_fp_unsigned"
            return f"((_ {conv} 11 53) RNE {x})"
    raise UnsupportedSort(f"cast {src} -> {dst}")


def _uses_float(vc: Vc) -> bool:
    return any(isinstance(t, FloatType) for t in vc.symbols.values())


def script_header(vcs: list[Vc]) -> list[str]:
    logic = "QF_BVFP" if any(_uses_float(vc) for vc in vcs) else "QF_BV"
    return ["(set-option :produce-models true)", f"(set-logic {logic})"]


def declarations(vc: Vc, already: set[str] | None = None) -> list[str]:
    lines = []
    for name, t in vc.symbols.items():
        if already is not None:
            if name in already:
                continue
            already.add(name)
        lines.append(f"(declare-const {name} {sort_text(t)})")
    return lines


def emit_smtlib(vc: Vc) -> str:
    """One self-contained script: C, not P, check-sat, model query."""
    lines = script_header([vc])
    lines += declarations(vc)
    for c in vc.constraints:
        lines.append(f"(assert {emit_expr(c)})")
    lines.append(f"(assert (not {emit_expr(vc.prop)}))")
    lines.append("(check-sat)")
    if vc.inputs:
        names = " ".join(s.name for s in vc.inputs)
        lines.append(f"(get-value ({names}))")
    return "\n".join(lines) + "\n"


def emit_smtlib_batch(vcs: list[Vc]) -> str:
    """Multi-property script: shared prefix, one push/pop block per assertion.

    Constraints are added incrementally in trace order; the block for
    assertion i sees exactly the constraints that precede it.
    """
    if not vcs:
        return ""
    lines = script_header(vcs)
    declared: set[str] = set()
    asserted = 0
    for vc in sorted(vcs, key=lambda v: v.assertion_index):
        lines += declarations(vc, declared)
        for c in vc.constraints[asserted:]:
            lines.append(f"(assert {emit_expr(c)})")
        asserted = max(asserted, len(vc.constraints))
        lines.append("(push 1)")
        lines.append(f"(assert (not {emit_expr(vc.prop)}))")
        lines.append("(check-sat)")
        if vc.inputs:
            names = " ".join(s.name for s in vc.inputs)
            lines.append(f"(get-value ({names}))")
        lines.append("(pop 1)")
    return "\n".join(lines) + "\n"
