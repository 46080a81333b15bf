"""Counterexample construction and result rendering.

A SAT model is replayed through the SSA trace: every assignment whose path
guard holds under the model becomes a numbered state (ordinals count every
trace step, so printed state numbers may skip). Values render as decimal
plus the byte-grouped two's-complement pattern of the variable's declared
width. Exit codes: 0 verified, 1 property violated, 2 front-end error,
3 solver error or timeout.
"""
from __future__ import annotations

import json
import platform
import struct
from dataclasses import dataclass, field

from . import __version__
from .errors import IncompleteModel
from .exprs import Nondet, display_name, eval_expr, is_synthetic
from .symex import SsaTrace
from .vtypes import BoolType, FloatType, VerifierType

PROPERTY_DISPLAY = {
    "user-assertion": "assertion",
    "division-by-zero": "division by zero",
    "bounds": "array bounds violated",
    "overflow": "arithmetic overflow",
    "unwinding": "unwinding assertion",
}

EXIT_SUCCESSFUL = 0
EXIT_FAILED = 1
EXIT_FRONTEND_ERROR = 2
EXIT_SOLVER_ERROR = 3


@dataclass
class CounterexampleState:
    ordinal: int
    file: str
    line: int
    column: int
    thread: int = 0
    assignments: dict[str, tuple[str, str]] = field(default_factory=dict)


@dataclass
class ViolatedProperty:
    prop_class: str
    message: str
    file: str
    line: int
    column: int
    ordinal: int


@dataclass
class VerificationResult:
    outcome: str  # SUCCESSFUL | FAILED | ERROR
    violated: ViolatedProperty | None = None
    states: list[CounterexampleState] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    diagnostic: str | None = None
    source_path: str = "<unit>"
    solver_name: str = ""


def binary_pattern(value: int | float | bool, t: VerifierType) -> str:
    """Byte-grouped bit pattern at the declared width."""
    if isinstance(t, BoolType):
        return "1" if value else "0"
    if isinstance(t, FloatType):
        bits = struct.unpack(">Q", struct.pack(">d", float(value)))[0]
        text = f"{bits:064b}"
    else:
        width = t.width
        bits = int(value) & ((1 << width) - 1)
        text = f"{bits:0{width}b}"
    return " ".join(text[i:i + 8] for i in range(0, len(text), 8))


def decimal_text(value: int | float | bool, t: VerifierType) -> str:
    if isinstance(t, BoolType):
        return "TRUE" if value else "FALSE"
    if isinstance(t, FloatType):
        return repr(float(value))
    return str(int(value))


def parse_binary_pattern(pattern: str, t: VerifierType) -> int | float | bool:
    """Inverse of binary_pattern, for the self-check invariant."""
    bits = int(pattern.replace(" ", ""), 2)
    if isinstance(t, BoolType):
        return bool(bits)
    if isinstance(t, FloatType):
        return struct.unpack(">d", struct.pack(">Q", bits))[0]
    from .exprs import wrap_int
    return wrap_int(bits, t)


def build_trace(model: dict[str, int | float | bool], trace: SsaTrace,
                until_step: int | None = None) -> list[CounterexampleState]:
    """Replay the trace under the model; one printed state per live assignment."""
    for sym in trace.inputs:
        if until_step is not None and not any(
                s.lhs is not None and s.lhs.name == sym.name
                for s in trace.steps[:until_step + 1]):
            continue
        if sym.name not in model:
            raise IncompleteModel(sym.name)
    env: dict[str, int | float | bool] = dict(model)
    states: list[CounterexampleState] = []
    last = until_step if until_step is not None else len(trace.steps) - 1
    for pos, step in enumerate(trace.steps[:last + 1]):
        live = bool(eval_expr(step.guard, env))
        if step.kind == "assign":
            if isinstance(step.rhs, Nondet):
                value = env.get(step.lhs.name)
                if value is None:
                    break  # beyond the modelled prefix
            else:
                value = eval_expr(step.rhs, env)
            env[step.lhs.name] = value
            if live and not is_synthetic(step.lhs.base) and step.loc is not None:
                name = display_name(step.lhs.base)
                states.append(CounterexampleState(
                    ordinal=pos + 1,
                    file=trace.source_path,
                    line=step.loc.line,
                    column=step.loc.col,
                    assignments={name: (decimal_text(value, step.lhs.type),
                                        binary_pattern(value, step.lhs.type))},
                ))
        elif step.kind == "phi":
            chosen = step.then_sym if eval_expr(step.cond, env) else step.else_sym
            env[step.lhs.name] = env.get(chosen.name, 0)
    return states


def replay_final_env(model: dict, trace: SsaTrace) -> dict:
    """Concrete value of every SSA symbol after replay (oracle helper)."""
    env: dict[str, int | float | bool] = dict(model)
    for step in trace.steps:
        if step.kind == "assign":
            if isinstance(step.rhs, Nondet):
                continue
            env[step.lhs.name] = eval_expr(step.rhs, env)
        elif step.kind == "phi":
            chosen = step.then_sym if eval_expr(step.cond, env) else step.else_sym
            env[step.lhs.name] = env.get(chosen.name, 0)
    return env


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def banner() -> str:
    bits = platform.architecture()[0].replace("bit", "-bit")
    return (f"PyBMC version {__version__} {bits} "
            f"{platform.machine()} {platform.system().lower()}")


def render(result: VerificationResult, output: str = "text") -> tuple[str, int]:
    if output == "json":
        return _render_json(result)
    return _render_text(result)


def _exit_code(result: VerificationResult) -> int:
    if result.outcome == "SUCCESSFUL":
        return EXIT_SUCCESSFUL
    if result.outcome == "FAILED":
        return EXIT_FAILED
    return EXIT_SOLVER_ERROR


def _render_text(result: VerificationResult) -> tuple[str, int]:
    lines = [banner()]
    lines.append(f"Parsing {result.source_path}")
    lines.append("Converting")
    lines.append("Generating GOTO Program")
    if "goto" in result.timings:
        lines.append(f"GOTO program creation time: {result.timings['goto']:.3f}s")
    lines.append("Symbolic execution")
    if "symex" in result.timings:
        lines.append(f"SSA generation time: {result.timings['symex']:.3f}s")
    if result.solver_name:
        lines.append(f"Solving with {result.solver_name}")
    if "solve" in result.timings:
        lines.append(f"Decision procedure time: {result.timings['solve']:.3f}s")

    if result.outcome == "ERROR":
        lines.append(result.diagnostic or "verification error")
        lines.append("VERIFICATION ERROR")
        return "\n".join(lines) + "\n", EXIT_SOLVER_ERROR

    if result.outcome == "FAILED":
        lines.append("Building error trace")
        lines.append("")
        lines.append("[Counterexample]")
        for state in result.states:
            lines.append("")
            lines.append(f"State {state.ordinal} file {state.file} "
                         f"line {state.line} column {state.column} "
                         f"thread {state.thread}")
            lines.append("----------------------------------------------------")
            for name, (dec, pattern) in state.assignments.items():
                lines.append(f"  {name} = {dec} ({pattern})")
        violated = result.violated
        lines.append("")
        lines.append(f"State {violated.ordinal} file {violated.file} "
                     f"line {violated.line} column {violated.column} thread 0")
        lines.append("----------------------------------------------------")
        lines.append("Violated property:")
        lines.append(f"  {PROPERTY_DISPLAY.get(violated.prop_class, violated.prop_class)}")
        lines.append(f"  {violated.message}")
        lines.append("")
        lines.append("VERIFICATION FAILED")
        return "\n".join(lines) + "\n", EXIT_FAILED

    lines.append("")
    lines.append("VERIFICATION SUCCESSFUL")
    return "\n".join(lines) + "\n", EXIT_SUCCESSFUL


def _render_json(result: VerificationResult) -> tuple[str, int]:
    doc = {
        "tool": "pybmc",
        "version": __version__,
        "outcome": result.outcome,
        "source": result.source_path,
        "timings": result.timings,
        "diagnostic": result.diagnostic,
        "violated_property": None,
        "counterexample": None,
    }
    if result.violated is not None:
        doc["violated_property"] = {
            "class": result.violated.prop_class,
            "display": PROPERTY_DISPLAY.get(result.violated.prop_class,
                                            result.violated.prop_class),
            "expression": result.violated.message,
            "file": result.violated.file,
            "line": result.violated.line,
            "column": result.violated.column,
        }
    if result.outcome == "FAILED":
        doc["counterexample"] = [
            {
                "state": s.ordinal,
                "file": s.file,
                "line": s.line,
                "column": s.column,
                "thread": s.thread,
                "assignments": {
                    name: {"value": dec, "binary": pattern}
                    for name, (dec, pattern) in s.assignments.items()
                },
            }
            for s in result.states
        ]
    return json.dumps(doc, indent=2, sort_keys=True) + "\n", _exit_code(result)
