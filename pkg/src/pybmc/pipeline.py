"""End-to-end verification pipeline.

load -> resolve imports -> isolate -> annotate -> check -> symbol table ->
entry synthesis -> GOTO -> instrumentation -> unwind -> symex -> simplify ->
one VC per assertion -> solve (external or oracle) -> report. Assertions
are checked in trace order and the first satisfiable one is reported.
"""
from __future__ import annotations

import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .astnodes import to_json_dict
from .errors import SolverError, VerifierError
from .exprs import fold, is_const
from .goto import ChecksConfig, instrument_properties, lower_to_goto, render_goto, unwind
from .ingest import isolate_function, load_file, render_parse_tree, resolve_imports
from .report import (
    EXIT_FRONTEND_ERROR,
    EXIT_SOLVER_ERROR,
    VerificationResult,
    ViolatedProperty,
    build_trace,
    render,
)
from .smtlib import emit_smtlib_batch
from .solver import (
    SAT,
    TIMEOUT,
    UNKNOWN,
    Verdict,
    default_solver_command,
    solve_external_multi,
    solve_oracle,
    typed_model,
)
from .symex import execute, render_ssa, simplify
from .symtab import build_symbol_table, render_symbol_table, synthesize_entry
from .typeinfer import check_types, infer_and_annotate
from .vc import Vc, generate_all_vcs


@dataclass
class RunConfig:
    input_path: str
    unwind: int = 1
    function: str | None = None
    int_width: int = 32
    overflow_check: bool = False
    unwinding_assertions: bool = True
    solver: str | None = None  # None = auto-detect; "oracle" = enumeration
    timeout: float = 60.0
    output: str = "text"
    multi_property: bool = False
    smt_lib_out: str | None = None
    parse_tree: bool = False
    dump_annotated: bool = False
    show_symbol_table: bool = False
    show_goto: bool = False
    show_ssa: bool = False
    no_simplify: bool = False

    def __post_init__(self):
        if self.unwind < 1:
            raise ValueError("unwind bound must be >= 1")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


def _emit(out, text: str) -> None:
    out.write(text)
    if not text.endswith("\n"):
        out.write("\n")


def run(config: RunConfig, out=None) -> int:
    """Execute the whole pipeline; returns the documented exit code."""
    out = out if out is not None else sys.stdout
    timings: dict[str, float] = {}
    try:
        result = _run_pipeline(config, out, timings)
    except VerifierError as e:
        print(f"{config.input_path}: error: {e}", file=sys.stderr)
        return EXIT_FRONTEND_ERROR
    except SolverError as e:
        print(f"{config.input_path}: solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER_ERROR
    text, code = render(result, config.output)
    _emit(out, text)
    return code


def _run_pipeline(config: RunConfig, out, timings: dict[str, float]) -> VerificationResult:
    t0 = time.perf_counter()
    unit = load_file(config.input_path)
    resolve_imports(unit, Path(config.input_path).parent)
    if config.function:
        isolate_function(unit, config.function)
    if config.parse_tree:
        _emit(out, render_parse_tree(unit))
    timings["parse"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    diagnostics = check_types(unit, config.int_width)
    if diagnostics:
        raise VerifierError("; ".join(str(d) for d in diagnostics))
    infer_and_annotate(unit, config.int_width)
    if config.dump_annotated:
        import json as _json
        doc = to_json_dict(unit.main_module)
        _emit(out, _json.dumps(doc, indent=2, sort_keys=True))
    timings["typing"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    st = build_symbol_table(unit)
    synthesize_entry(st, unit.isolated_function)
    if config.show_symbol_table:
        _emit(out, render_symbol_table(st))
    gp = lower_to_goto(st)
    checks = ChecksConfig(overflow=config.overflow_check)
    gp = instrument_properties(gp, checks)
    if config.show_goto:
        _emit(out, render_goto(gp))
    gp = unwind(gp, config.unwind, config.unwinding_assertions)
    timings["goto"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    trace = execute(gp)
    if not config.no_simplify:
        trace = simplify(trace)
    if config.show_ssa:
        _emit(out, render_ssa(trace))
    timings["symex"] = time.perf_counter() - t0

    vcs = generate_all_vcs(trace)
    solver_cmd, solver_name = _resolve_solver(config)
    if config.smt_lib_out and vcs:
        Path(config.smt_lib_out).write_text(emit_smtlib_batch(vcs))

    t0 = time.perf_counter()
    failed: tuple[Vc, Verdict] | None = None
    # assertions whose property folded to true are unsatisfiable by inspection
    open_vcs = [vc for vc in vcs if not is_const(fold(vc.prop), True)]
    if not open_vcs:
        pass
    elif solver_cmd == "oracle":
        for vc in open_vcs:
            verdict = solve_oracle(vc)
            if verdict.status == SAT:
                failed = (vc, verdict)
                break
    else:
        # one query (check-sat + model) per assertion; one solver process for
        # the whole run, since process startup dominates these small queries
        script = emit_smtlib_batch(open_vcs)
        verdicts = solve_external_multi(script, solver_cmd, config.timeout,
                                        expected=len(open_vcs))
        for vc, verdict in zip(open_vcs, verdicts):
            _check_definitive(verdict)
            if verdict.status == SAT:
                failed = (vc, verdict)
                break
    timings["solve"] = time.perf_counter() - t0

    if failed is None:
        return VerificationResult("SUCCESSFUL", timings=timings,
                                  source_path=unit.source_path,
                                  solver_name=solver_name)
    vc, verdict = failed
    model = typed_model(vc, verdict.model or {})
    states = build_trace(model, trace, until_step=vc.assertion_index)
    violated = ViolatedProperty(
        prop_class=vc.prop_class,
        message=vc.message,
        file=unit.source_path,
        line=vc.loc.line if vc.loc else 0,
        column=vc.loc.col if vc.loc else 0,
        ordinal=vc.assertion_index + 1,
    )
    return VerificationResult("FAILED", violated=violated, states=states,
                              timings=timings, source_path=unit.source_path,
                              solver_name=solver_name)


def _check_definitive(verdict: Verdict) -> None:
    if verdict.status == TIMEOUT:
        raise SolverError("solver timeout")
    if verdict.status == UNKNOWN:
        raise SolverError(f"solver answered unknown: {verdict.reason or ''}")


def _resolve_solver(config: RunConfig) -> tuple[str | list[str], str]:
    if config.solver == "oracle":
        return "oracle", "builtin enumeration oracle"
    if config.solver:
        return config.solver, config.solver
    cmd = default_solver_command()
    if cmd is None:
        return "oracle", "builtin enumeration oracle (no solver found)"
    name = "z3 (bundled shim)" if cmd[0] == "node" else " ".join(cmd)
    return cmd, name
