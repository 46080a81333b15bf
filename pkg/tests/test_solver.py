"""Oracle and external solver: verdicts, models, differential agreement."""
import pytest

from pybmc.errors import DomainTooLarge, UnsupportedSortForOracle
from pybmc.smtlib import emit_smtlib, emit_smtlib_batch
from pybmc.solver import (
    SAT,
    UNSAT,
    default_solver_command,
    solve_external,
    solve_external_multi,
    solve_oracle,
    typed_model,
)
from pybmc.vc import evaluate_query, generate_all_vcs

from conftest import external_solver, requires_solver
from helpers import random_program, to_trace

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


def _user_vc(source: str, k: int = 1):
    trace = to_trace(source, k=k)
    vcs = generate_all_vcs(trace)
    return trace, [vc for vc in vcs if vc.prop_class == "user-assertion"][-1]


def test_oracle_finds_factorial_counterexample():
    trace, vc = _user_vc(LISTING_SRC, k=5)
    verdict = solve_oracle(vc)
    assert verdict.status == SAT
    assert verdict.model[trace.inputs[0].name] == 5


def test_oracle_respects_lexicographic_order():
    trace, vc = _user_vc(
        "x: int = nondet_int()\n__ESBMC_assume(x > 0 and x < 10)\nassert x != 4 and x != 7\n")
    verdict = solve_oracle(vc)
    assert verdict.status == SAT
    assert verdict.model[trace.inputs[0].name] == 4  # the smaller witness


def test_oracle_bool_tautology_unsat():
    _, vc = _user_vc("b: bool = nondet_bool()\nassert b or not b\n")
    assert solve_oracle(vc).status == UNSAT


def test_oracle_domain_cap():
    _, vc = _user_vc("x: int = nondet_int()\nassert x != 5\n")
    with pytest.raises(DomainTooLarge):
        solve_oracle(vc)


def test_oracle_refuses_floats():
    _, vc = _user_vc("f: float = nondet_float()\nassert not f > 1.0\n")
    with pytest.raises(UnsupportedSortForOracle):
        solve_oracle(vc)


def test_oracle_contradictory_assumes_unsat():
    _, vc = _user_vc(
        "x: int = nondet_int()\n__ESBMC_assume(x > 5)\n__ESBMC_assume(x < 3)\nassert False\n")
    assert solve_oracle(vc).status == UNSAT


@requires_solver
def test_external_factorial_model():
    trace, vc = _user_vc(LISTING_SRC, k=5)
    verdict = solve_external(emit_smtlib(vc), external_solver())
    assert verdict.status == SAT
    model = typed_model(vc, verdict.model)
    assert model[trace.inputs[0].name] == 5


@requires_solver
def test_external_trivial_unsat():
    _, vc = _user_vc("x: int = 1\nassert x == 1\n")
    assert solve_external(emit_smtlib(vc), external_solver()).status == UNSAT


@requires_solver
def test_external_multi_verdicts_in_order():
    source = """\
x: int = nondet_int()
__ESBMC_assume(x >= 0 and x < 4)
assert x >= 0
assert x != 2
assert x < 4
"""
    trace = to_trace(source)
    vcs = generate_all_vcs(trace)
    verdicts = solve_external_multi(emit_smtlib_batch(vcs), external_solver(),
                                    expected=len(vcs))
    statuses = [v.status for v in verdicts]
    assert statuses == [UNSAT, SAT, UNSAT]
    model = typed_model(vcs[1], verdicts[1].model)
    assert model[trace.inputs[0].name] == 2


@requires_solver
def test_external_float_query():
    _, vc = _user_vc(
        "f: float = nondet_float()\n__ESBMC_assume(f > 0.0)\nassert f > 0.5\n")
    verdict = solve_external(emit_smtlib(vc), external_solver())
    assert verdict.status == SAT
    model = typed_model(vc, verdict.model)
    value = next(iter(model.values()))
    assert 0.0 < value <= 0.5


def test_solver_crash_reported():
    from pybmc.errors import SolverCrashed
    with pytest.raises(SolverCrashed):
        solve_external("(check-sat)", [__import__("sys").executable, "-c",
                                       "import sys; sys.exit(7)"])


# --- differential: oracle vs external on random small programs ---

@requires_solver
def test_random_program_agreement():
    cmd = external_solver()
    checked = 0
    sat_models = 0
    for seed in range(40):
        source = random_program(seed)
        try:
            trace = to_trace(source)
        except Exception as e:  # pragma: no cover - generator bug guard
            pytest.fail(f"seed {seed} produced an unprocessable program: {e}\n{source}")
        vcs = generate_all_vcs(trace)
        if not vcs:
            continue
        verdicts = solve_external_multi(emit_smtlib_batch(vcs), cmd,
                                        timeout=120, expected=len(vcs))
        for vc, external in zip(vcs, verdicts):
            oracle = solve_oracle(vc)
            assert oracle.status == external.status, (
                f"seed {seed}: oracle {oracle.status} vs solver {external.status}\n"
                f"{source}\n{emit_smtlib(vc)}")
            checked += 1
            if external.status == SAT:
                model = typed_model(vc, external.model)
                assert evaluate_query(vc, model) is True, (
                    f"seed {seed}: solver model does not satisfy the query\n{source}")
                assert evaluate_query(vc, solve_oracle(vc).model) is True
                sat_models += 1
    assert checked >= 40
    assert sat_models >= 5  # the generator must produce real violations too
