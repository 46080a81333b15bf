"""VC construction and SMT-LIB emission."""
import pytest

from pybmc.errors import UnsupportedSort
from pybmc.exprs import Binary, Compare, Const, Var, and_, not_
from pybmc.smtlib import emit_expr, emit_smtlib, emit_smtlib_batch
from pybmc.vc import evaluate_query, generate_all_vcs, generate_vc
from pybmc.vtypes import BOOL, FLOAT, IntType

from helpers import to_trace

LISTING_SRC = """\
def factorial(n:int) -> int:
  if n == 0 or n == 1:
    return 1
  else:
    return n * factorial(n - 1)

n:int = nondet_int()
__ESBMC_assume(n > 0 and n < 6)
result:int = factorial(n)
assert(result != 120)
"""


def _listing_vcs():
    trace = to_trace(LISTING_SRC, k=5)
    return trace, generate_all_vcs(trace)


def test_vc_query_is_c_and_not_p():
    trace, vcs = _listing_vcs()
    vc = vcs[-1]
    query = vc.query
    assert isinstance(query, Binary) and query.op == "and"
    assert query.right == not_(vc.prop)
    rebuilt = vc.constraint_formula
    assert query.left == rebuilt


def test_user_assertion_vc_matches_paper_shape():
    trace, vcs = _listing_vcs()
    vc = vcs[-1]
    assert vc.prop_class == "user-assertion"
    assert vc.message == "result != 120"
    # P mentions the final result version; C carries the assume bounds
    from pybmc.exprs import variables
    prop_vars = variables(vc.prop)
    assert any(name.startswith("main@result!") for name in prop_vars)
    n_input = trace.inputs[0].name
    assert any(n_input in variables(c) for c in vc.constraints)


def test_vc_count_equals_assert_steps():
    trace = to_trace(LISTING_SRC, k=5, do_simplify=False)
    vcs = generate_all_vcs(trace)
    assert len(vcs) == sum(1 for s in trace.steps if s.kind == "assert")


def test_assert_true_is_trivially_unsat():
    trace = to_trace("x: int = nondet_int()\nassert True\n")
    vc = generate_all_vcs(trace)[0]
    from pybmc.solver import solve_oracle, UNSAT
    # oracle sees no counterexample regardless of C
    assert solve_oracle(vc).status == UNSAT


def test_model_substitution_evaluates_query():
    trace = to_trace(
        "x: int = nondet_int()\n__ESBMC_assume(x > 0 and x < 4)\nassert x != 2\n")
    vc = generate_all_vcs(trace)[0]
    name = trace.inputs[0].name
    assert evaluate_query(vc, {name: 2}) is True
    assert evaluate_query(vc, {name: 3}) is False


# --- emission ---

def test_emission_is_deterministic():
    _, vcs = _listing_vcs()
    first = emit_smtlib(vcs[-1])
    _, vcs2 = _listing_vcs()
    second = emit_smtlib(vcs2[-1])
    assert first == second
    assert emit_smtlib_batch(vcs) == emit_smtlib_batch(vcs2)


def test_listing_script_declares_32bit_input():
    trace, vcs = _listing_vcs()
    script = emit_smtlib(vcs[-1])
    name = trace.inputs[0].name
    assert f"(declare-const {name} (_ BitVec 32))" in script
    assert "(set-logic QF_BV)" in script
    assert script.count("(check-sat)") == 1
    assert f"(get-value ({name}))" in script
    # deterministic symbol naming: base!version
    assert "!" in name and name.rsplit("!", 1)[1].isdigit()


def test_float_programs_use_fp_logic():
    trace = to_trace("f: float = nondet_float()\nassert f == f or f != f\n")
    script = emit_smtlib(generate_all_vcs(trace)[0])
    assert "(set-logic QF_BVFP)" in script
    assert "(_ FloatingPoint 11 53)" in script


def test_signed_and_unsigned_operators():
    i32 = IntType(32, True)
    u64 = IntType(64, False)
    signed = Binary(i32, "floordiv", Var(i32, "a!0"), Var(i32, "b!0"))
    unsigned = Binary(u64, "floordiv", Var(u64, "c!0"), Var(u64, "d!0"))
    assert emit_expr(signed) == "(bvsdiv a!0 b!0)"
    assert emit_expr(unsigned) == "(bvudiv c!0 d!0)"
    assert emit_expr(Compare(BOOL, "lt", Var(i32, "a!0"), Var(i32, "b!0"))) == \
        "(bvslt a!0 b!0)"
    assert emit_expr(Compare(BOOL, "lt", Var(u64, "c!0"), Var(u64, "d!0"))) == \
        "(bvult c!0 d!0)"


def test_negative_constant_two_complement():
    i32 = IntType(32, True)
    assert emit_expr(Const(i32, -1)) == "(_ bv4294967295 32)"
    assert emit_expr(Const(i32, -2147483648)) == "(_ bv2147483648 32)"


def test_float_constant_exact_bits():
    assert emit_expr(Const(FLOAT, 1.0)) == \
        "(fp #b0 #b01111111111 " + "#b" + "0" * 52 + ")"
    assert emit_expr(Const(FLOAT, float("nan"))) == "(_ NaN 11 53)"


def test_unemittable_raises():
    from pybmc.exprs import Nondet
    with pytest.raises(UnsupportedSort):
        emit_expr(Nondet(IntType(32, True), "nondet_int"))


# --- parse-back: emitted scripts satisfy an independent SMT-LIB grammar check ---

_COMMANDS = {
    "set-option", "set-logic", "declare-const", "assert",
    "check-sat", "get-value", "push", "pop",
}


def _parse_sexprs(text: str):
    """Tiny independent SMT-LIB reader: tokenize and build nested lists."""
    tokens = []
    i = 0
    while i < len(text):
        c = text[i]
        if c in "()":
            tokens.append(c)
            i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            tokens.append(text[i:j])
            i = j
    stack = [[]]
    for tok in tokens:
        if tok == "(":
            stack.append([])
        elif tok == ")":
            done = stack.pop()
            assert stack, "unbalanced parenthesis"
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    assert len(stack) == 1, "unbalanced parenthesis"
    return stack[0]


def _well_formed(commands) -> None:
    for cmd in commands:
        assert isinstance(cmd, list) and cmd, f"not a command: {cmd}"
        assert cmd[0] in _COMMANDS, f"unknown command {cmd[0]}"
        if cmd[0] == "declare-const":
            assert len(cmd) == 3
        if cmd[0] == "assert":
            assert len(cmd) == 2


@pytest.mark.parametrize("source,k", [
    (LISTING_SRC, 5),
    ("xs: list[int] = [1, 2]\ni: int = nondet_int()\n"
     "__ESBMC_assume(i >= 0 and i < 2)\nassert xs[i] <= 2\n", 1),
    ("u: uint64 = 18446744073709551615\nassert u + 1 == 0\n", 1),
    ("f: float = nondet_float()\n__ESBMC_assume(f > 0.0)\nassert not f < 0.0\n", 1),
])
def test_scripts_reparse_under_grammar_check(source, k):
    trace = to_trace(source, k=k)
    for vc in generate_all_vcs(trace):
        _well_formed(_parse_sexprs(emit_smtlib(vc)))
    batch = emit_smtlib_batch(generate_all_vcs(trace))
    _well_formed(_parse_sexprs(batch))
