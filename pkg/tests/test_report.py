"""Counterexample traces and result rendering."""
import json

import pytest

from pybmc.errors import IncompleteModel
from pybmc.report import (
    CounterexampleState,
    VerificationResult,
    ViolatedProperty,
    binary_pattern,
    build_trace,
    decimal_text,
    parse_binary_pattern,
    render,
)
from pybmc.solver import solve_oracle
from pybmc.vc import evaluate_query, generate_all_vcs
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


def _failing(source: str, k: int = 1):
    trace = to_trace(source, k=k)
    for vc in generate_all_vcs(trace):
        verdict = solve_oracle(vc)
        if verdict.status == "SAT":
            return trace, vc, verdict
    raise AssertionError("expected a violated assertion")


def test_listing_first_state_is_the_input():
    trace, vc, verdict = _failing(LISTING_SRC, k=5)
    states = build_trace(verdict.model, trace, until_step=vc.assertion_index)
    first = states[0]
    assert first.ordinal == 1
    assert first.line == 7
    assert first.file == "main.py"
    assert first.assignments == {
        "n": ("5", "00000000 00000000 00000000 00000101")}


def test_single_assignment_single_state():
    trace, vc, verdict = _failing(
        "x: int = nondet_int()\n__ESBMC_assume(x == 3)\nassert x != 3\n")
    states = build_trace(verdict.model, trace, until_step=vc.assertion_index)
    assert len(states) == 1
    assert states[0].assignments["x"][0] == "3"


def test_state_ordinals_count_every_step():
    trace, vc, verdict = _failing(LISTING_SRC, k=5)
    states = build_trace(verdict.model, trace, until_step=vc.assertion_index)
    ordinals = [s.ordinal for s in states]
    assert ordinals == sorted(ordinals)
    assert ordinals[0] == 1
    # assume steps occupy ordinals, so printed numbers skip
    assert ordinals[-1] > len(ordinals)


def test_replayed_values_satisfy_the_query():
    trace, vc, verdict = _failing(LISTING_SRC, k=5)
    assert evaluate_query(vc, verdict.model) is True


def test_temporaries_suppressed():
    trace, vc, verdict = _failing(
        "def f(v: int) -> int:\n    return v * 2\n"
        "x: int = nondet_int()\n__ESBMC_assume(x == 2)\n"
        "y: int = f(x)\nassert y != 4\n")
    states = build_trace(verdict.model, trace, until_step=vc.assertion_index)
    for state in states:
        for name in state.assignments:
            assert not name.startswith("%")


def test_incomplete_model_detected():
    trace, vc, verdict = _failing(LISTING_SRC, k=5)
    with pytest.raises(IncompleteModel):
        build_trace({}, trace, until_step=vc.assertion_index)


# --- value rendering ---

@pytest.mark.parametrize("value,t,expected", [
    (5, IntType(32, True), "00000000 00000000 00000000 00000101"),
    (-1, IntType(32, True), "11111111 11111111 11111111 11111111"),
    (2**64 - 1, IntType(64, False), " ".join(["11111111"] * 8)),
    (True, BOOL, "1"),
    (False, BOOL, "0"),
])
def test_binary_pattern_widths(value, t, expected):
    pattern = binary_pattern(value, t)
    assert pattern == expected
    if not isinstance(t, type(BOOL)):
        assert len(pattern.replace(" ", "")) == t.width


@pytest.mark.parametrize("value,t", [
    (5, IntType(32, True)),
    (-120, IntType(32, True)),
    (2**63 + 17, IntType(64, False)),
    (0, IntType(128, False)),
    (True, BOOL),
    (1.5, FLOAT),
    (-0.25, FLOAT),
])
def test_binary_pattern_round_trips(value, t):
    assert parse_binary_pattern(binary_pattern(value, t), t) == value
    assert decimal_text(value, t)  # renders without error


def test_corpus_states_round_trip():
    trace, vc, verdict = _failing(LISTING_SRC, k=5)
    states = build_trace(verdict.model, trace, until_step=vc.assertion_index)
    int32 = IntType(32, True)
    for state in states:
        for name, (dec, pattern) in state.assignments.items():
            assert int(dec) == parse_binary_pattern(pattern, int32)


# --- rendering ---

def _failed_result() -> VerificationResult:
    return VerificationResult(
        outcome="FAILED",
        violated=ViolatedProperty("user-assertion", "result != 120",
                                  "main.py", 10, 0, 29),
        states=[CounterexampleState(1, "main.py", 7, 0, 0,
                                    {"n": ("5", "00000000 00000000 00000000 00000101")})],
        timings={"goto": 0.001},
        source_path="main.py",
    )


def test_failed_rendering_matches_expected_layout():
    text, code = render(_failed_result())
    assert code == 1
    assert "[Counterexample]" in text
    assert "State 1 file main.py line 7 column 0 thread 0" in text
    assert "n = 5 (00000000 00000000 00000000 00000101)" in text
    assert "Violated property:" in text
    assert "assertion" in text
    assert "result != 120" in text
    assert text.rstrip().endswith("VERIFICATION FAILED")
    assert text.count("Violated property:") == 1


def test_successful_rendering_has_no_counterexample():
    text, code = render(VerificationResult("SUCCESSFUL", source_path="ok.py"))
    assert code == 0
    assert "[Counterexample]" not in text
    assert text.rstrip().endswith("VERIFICATION SUCCESSFUL")


def test_json_rendering():
    text, code = render(_failed_result(), output="json")
    assert code == 1
    doc = json.loads(text)
    assert doc["outcome"] == "FAILED"
    assert doc["violated_property"]["expression"] == "result != 120"
    assert doc["violated_property"]["display"] == "assertion"
    assert doc["counterexample"][0]["assignments"]["n"]["value"] == "5"
