"""SSA trace construction: single assignment, phi merging, guards, simplify."""
import itertools
import math

import pytest

from pybmc.exprs import Const, Nondet, eval_expr
from pybmc.goto import unwind
from pybmc.report import replay_final_env
from pybmc.solver import SAT, solve_oracle
from pybmc.symex import execute, render_ssa, simplify
from pybmc.vc import generate_all_vcs

from helpers import run_goto, to_goto, to_trace

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


def test_straight_line_has_no_phi():
    trace = to_trace("x: int = 1\nx = x + 1\n", do_simplify=False)
    assert [s.kind for s in trace.steps if s.kind == "phi"] == []
    assigns = [s for s in trace.steps if s.kind == "assign"]
    assert [s.lhs.version for s in assigns] == [1, 2]
    assert assigns[0].lhs.base == assigns[1].lhs.base == "main@x"


def test_if_else_produces_exactly_one_phi():
    source = """\
c: bool = nondet_bool()
y: int = 0
if c:
    y = 1
else:
    y = 2
assert y >= 1
"""
    gp = unwind(to_goto(source), 1)
    # join-point oracle: count labels targeted by more than one incoming edge
    instrs = gp.entry_instructions()
    gp.renumber()
    incoming: dict[int, int] = {}
    for i, ins in enumerate(instrs):
        if ins.kind == "GOTO":
            incoming[ins.target_index] = incoming.get(ins.target_index, 0) + 1
            if ins.expr is not None:
                incoming[i + 1] = incoming.get(i + 1, 0) + 1
        elif ins.kind != "END":
            incoming[i + 1] = incoming.get(i + 1, 0) + 1
    joins = sum(1 for count in incoming.values() if count > 1)

    trace = execute(gp)
    phis = [s for s in trace.steps if s.kind == "phi"]
    assert len(phis) == 1
    assert joins == 1
    assert phis[0].lhs.base == "main@y"


def test_single_static_assignment_invariant():
    trace = to_trace(LISTING_SRC, k=5, do_simplify=False)
    seen = set()
    for step in trace.steps:
        if step.lhs is not None:
            assert step.lhs.name not in seen, f"{step.lhs.name} assigned twice"
            seen.add(step.lhs.name)


def test_versions_consecutive_from_zero():
    trace = to_trace(LISTING_SRC, k=3, do_simplify=False)
    by_base: dict[str, list[int]] = {}
    for step in trace.steps:
        if step.lhs is not None:
            by_base.setdefault(step.lhs.base, []).append(step.lhs.version)
    for base, versions in by_base.items():
        assert versions == list(range(1, len(versions) + 1)), base


def test_no_forward_references():
    trace = to_trace(LISTING_SRC, k=5, do_simplify=False)
    from pybmc.exprs import variables
    defined: set[str] = set()
    for step in trace.steps:
        for e in (step.rhs, step.guard, step.cond):
            if e is None or isinstance(e, Nondet):
                continue
            for name in variables(e):
                base, _, version = name.rpartition("!")
                if version != "0":
                    assert name in defined, f"forward reference to {name}"
        for sym in (step.then_sym, step.else_sym):
            if sym is not None and sym.version != 0:
                assert sym.name in defined
        if step.lhs is not None:
            defined.add(step.lhs.name)


def test_listing_constraints_match_phi_table():
    # the factorial map over the assumed range: 1->1 ... 5->120
    trace = to_trace(LISTING_SRC, k=5)
    result_base = "main@result"
    final = trace.final_versions[result_base]
    for n in range(1, 6):
        env = replay_final_env({trace.inputs[0].name: n}, trace)
        assert env[f"{result_base}!{final}"] == math.factorial(n)


# --- guard correctness / phi soundness vs concrete execution ---

GUARD_PROGRAMS = [
    ("""\
x: int = nondet_int()
__ESBMC_assume(x >= 0 and x <= 7)
y: int = 0
if x > 3:
    y = x * 2
else:
    y = x + 10
assert y >= 0
""", [("x", range(0, 8))]),
    ("""\
a: int = nondet_int()
b: int = nondet_int()
__ESBMC_assume(a >= 0 and a <= 3)
__ESBMC_assume(b >= 0 and b <= 3)
m: int = a
if b > a:
    m = b
assert m >= a
""", [("a", range(0, 4)), ("b", range(0, 4))]),
]


@pytest.mark.parametrize("source,domains", GUARD_PROGRAMS)
def test_guards_select_exactly_the_executed_steps(source, domains):
    gp = unwind(to_goto(source), 1)
    trace = execute(gp)
    for values in itertools.product(*[d for _, d in domains]):
        run = run_goto(gp, list(values))
        executed = set(run.executed)
        model = {trace.inputs[i].name: v for i, v in enumerate(values)}
        env = replay_final_env(model, trace)
        for step in trace.steps:
            if step.goto_index < 0:
                continue  # phis have no originating instruction
            live = bool(eval_expr(step.guard, env))
            assert live == (step.goto_index in executed), (
                f"step at GOTO {step.goto_index} guard={live} for inputs {values}")


@pytest.mark.parametrize("source,domains", GUARD_PROGRAMS)
def test_phi_reproduces_concrete_final_values(source, domains):
    gp = unwind(to_goto(source), 1)
    trace = execute(gp)
    for values in itertools.product(*[d for _, d in domains]):
        run = run_goto(gp, list(values))
        model = {trace.inputs[i].name: v for i, v in enumerate(values)}
        env = replay_final_env(model, trace)
        for base, version in trace.final_versions.items():
            if base in run.env:
                assert env[f"{base}!{version}"] == run.env[base], base


# --- simplify ---

def test_simplify_folds_constants():
    trace = to_trace("x: int = 2 + 3\n", do_simplify=False)
    folded = simplify(trace)
    assign = next(s for s in folded.steps if s.kind == "assign")
    assert assign.rhs == Const(assign.lhs.type, 5)


def test_simplify_drops_false_guard_steps():
    source = """\
x: int = 1
if x > 5:
    x = 99
assert x == 1
"""
    raw = to_trace(source, do_simplify=False)
    slim = simplify(raw)
    assert len(slim.steps) < len(raw.steps)
    assert not any(
        s.kind == "assign" and s.rhs == Const(s.lhs.type, 99) for s in slim.steps)


def _any_sat(trace) -> bool:
    """Overall verdict of a trace, oracle first, external solver as fallback
    (raw traces keep dead-path symbols whose domains the oracle refuses)."""
    from pybmc.errors import DomainTooLarge
    from pybmc.smtlib import emit_smtlib
    from pybmc.solver import solve_external
    from conftest import external_solver

    for vc in generate_all_vcs(trace):
        try:
            status = solve_oracle(vc).status
        except DomainTooLarge:
            cmd = external_solver()
            if cmd is None:
                pytest.skip("raw trace needs an external solver")
            status = solve_external(emit_smtlib(vc), cmd).status
        if status == SAT:
            return True
    return False


@pytest.mark.parametrize("source,k", [
    (LISTING_SRC, 5),
    ("x: int = nondet_int()\n__ESBMC_assume(x > 0 and x < 4)\nassert x * x != 9\n", 1),
    ("i: int = 0\nwhile i < 4:\n    i = i + 1\nassert i == 4\n", 4),
])
def test_simplify_preserves_verdicts(source, k):
    raw = to_trace(source, k=k, do_simplify=False)
    slim = to_trace(source, k=k, do_simplify=True)
    assert _any_sat(raw) == _any_sat(slim)


def test_render_ssa_format():
    text = render_ssa(to_trace("x: int = 1\nassert x == 1\n"))
    assert "⊢" in text and ":=" in text and "// main.py:1" in text
