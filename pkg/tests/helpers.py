"""Shared test machinery: snippet-to-unit loading, a concrete GOTO
interpreter, an exec-based Python reference runner, and a random program
generator for differential solver testing.

The JSON dumping here intentionally duplicates the standalone dumper tool:
unit tests must not depend on it being installed.
"""
from __future__ import annotations

import ast as host_ast
import json
import random
import sys
import textwrap
from pathlib import Path

from pybmc.errors import Loc
from pybmc.exprs import Index, Nondet, Var, eval_expr
from pybmc.goto import ChecksConfig, GotoProgram, instrument_properties, lower_to_goto, unwind
from pybmc.ingest import ProgramUnit, load_ast, resolve_imports, isolate_function
from pybmc.symex import SsaTrace, execute, simplify
from pybmc.symtab import SymbolTable, build_symbol_table, synthesize_entry
from pybmc.typeinfer import check_types, infer_and_annotate

REPO_ROOT = Path(__file__).resolve().parent.parent
SUITE_DIR = REPO_ROOT / "suite"


def dump_doc(source: str) -> dict:
    """Host-interpreter AST as the JSON document shape the verifier reads."""
    def conv(node):
        if isinstance(node, host_ast.AST):
            out = {"_type": type(node).__name__}
            for name, value in host_ast.iter_fields(node):
                out[name] = conv(value)
            for name in ("lineno", "col_offset", "end_lineno", "end_col_offset"):
                value = getattr(node, name, None)
                if value is not None:
                    out[name] = value
            return out
        if isinstance(node, list):
            return [conv(item) for item in node]
        return node

    doc = conv(host_ast.parse(textwrap.dedent(source)))
    doc["python_version"] = "%d.%d.%d" % sys.version_info[:3]
    return doc


def make_unit(source: str, name: str = "main",
              imports: dict[str, str] | None = None,
              tmp_path: Path | None = None,
              function: str | None = None) -> ProgramUnit:
    """Load a source snippet (plus optional importable modules) into a unit."""
    module = load_ast(dump_doc(source))
    unit = ProgramUnit(main_module=module, module_name=name,
                       source_path=f"{name}.py", bindings={name: {}})
    if imports:
        assert tmp_path is not None, "imports need a tmp_path"
        for mod_name, mod_src in imports.items():
            (tmp_path / f"{mod_name}.json").write_text(
                json.dumps(dump_doc(mod_src)))
        resolve_imports(unit, tmp_path)
    else:
        resolve_imports(unit, tmp_path or Path("."))
    if function:
        isolate_function(unit, function)
    return unit


def annotated(source: str, int_width: int = 32, **kwargs) -> ProgramUnit:
    unit = make_unit(source, **kwargs)
    diags = check_types(unit, int_width)
    assert not diags, f"unexpected diagnostics: {[str(d) for d in diags]}"
    return infer_and_annotate(unit, int_width)


def to_symtab(source: str, function: str | None = None, **kwargs) -> SymbolTable:
    unit = annotated(source, function=function, **kwargs)
    st = build_symbol_table(unit)
    return synthesize_entry(st, unit.isolated_function)


def to_goto(source: str, checks: ChecksConfig | None = None,
            **kwargs) -> GotoProgram:
    gp = lower_to_goto(to_symtab(source, **kwargs))
    return instrument_properties(gp, checks or ChecksConfig())


def to_trace(source: str, k: int = 1, unwinding_assertions: bool = True,
             do_simplify: bool = True, checks: ChecksConfig | None = None,
             **kwargs) -> SsaTrace:
    gp = unwind(to_goto(source, checks=checks, **kwargs), k, unwinding_assertions)
    trace = execute(gp)
    return simplify(trace) if do_simplify else trace


# ---------------------------------------------------------------------------
# concrete GOTO interpreter (reference semantics for differential tests)
# ---------------------------------------------------------------------------

class GotoRun:
    def __init__(self):
        self.env: dict[str, object] = {}
        self.executed: list[int] = []  # instruction indices in execution order
        self.violations: list[tuple[int, str]] = []  # (index, property class)
        self.assume_blocked = False
        self.steps = 0


def run_goto(gp: GotoProgram, nondet_values: list, max_steps: int = 200_000) -> GotoRun:
    """Execute the entry function concretely, feeding nondets from the list."""
    gp.renumber()
    instrs = gp.entry_instructions()
    lab_pos = {ins.lab: i for i, ins in enumerate(instrs)}
    feed = iter(nondet_values)
    run = GotoRun()
    pc = 0
    while pc < len(instrs):
        run.steps += 1
        if run.steps > max_steps:
            raise RuntimeError("GOTO interpreter step limit exceeded")
        ins = instrs[pc]
        run.executed.append(ins.index)
        kind = ins.kind
        if kind == "END":
            break
        if kind == "DECL":
            pass
        elif kind == "ASSIGN":
            if isinstance(ins.expr, Nondet):
                value = next(feed)
            else:
                value = eval_expr(ins.expr, run.env)
            target = ins.target
            if isinstance(target, Var):
                run.env[target.name] = value
            else:
                assert isinstance(target, Index)
                idx = int(eval_expr(target.index, run.env))
                if 0 <= idx < target.length:
                    run.env[f"{target.base}.{idx}"] = value
        elif kind == "ASSUME":
            if not eval_expr(ins.expr, run.env):
                run.assume_blocked = True
                break
        elif kind == "ASSERT":
            if not eval_expr(ins.expr, run.env):
                run.violations.append((ins.index, ins.prop_class))
        elif kind == "GOTO":
            if ins.expr is None or eval_expr(ins.expr, run.env):
                pc = lab_pos[ins.goto_lab]
                continue
        pc += 1
    return run


def module_env(run_env: dict[str, object], module: str = "main") -> dict[str, object]:
    """User-visible module variables from a GOTO environment."""
    out = {}
    prefix = f"{module}@"
    for name, value in run_env.items():
        short = name[len(prefix):] if name.startswith(prefix) else None
        if short and "@" not in short and "%" not in short:
            out[short] = value
    return out


# ---------------------------------------------------------------------------
# exec-based Python reference (independent of the verifier entirely)
# ---------------------------------------------------------------------------

class AssumeBlocked(Exception):
    pass


def run_python(source: str, nondet_values: list) -> dict[str, object] | None:
    """Run the subset program under CPython with nondet stubs.

    Returns module variables, or None when an assume blocked the run.
    Only meaningful for programs whose values stay well inside int32.
    """
    feed = iter(nondet_values)
    namespace: dict[str, object] = {
        "nondet_int": lambda: next(feed),
        "nondet_bool": lambda: next(feed),
        "nondet_float": lambda: next(feed),
        "__ESBMC_assume": _assume,
    }
    try:
        exec(compile(textwrap.dedent(source), "<test>", "exec"), namespace)
    except AssumeBlocked:
        return None
    return {
        name: value
        for name, value in namespace.items()
        if not name.startswith("__") and isinstance(value, (int, float, bool))
    }


def _assume(cond: bool) -> None:
    if not cond:
        raise AssumeBlocked


# ---------------------------------------------------------------------------
# random subset programs for differential solver testing
# ---------------------------------------------------------------------------

def random_program(seed: int) -> str:
    """Small typed program: <= 3 bounded inputs, straight-line + one branch."""
    rng = random.Random(seed)
    lines: list[str] = []
    int_vars: list[str] = []
    bool_vars: list[str] = []

    n_inputs = rng.randint(1, 3)
    budget = 1 << 12  # keep the oracle domain product small
    for i in range(n_inputs):
        if rng.random() < 0.3:
            name = f"b{i}"
            lines.append(f"{name}: bool = nondet_bool()")
            bool_vars.append(name)
            budget //= 2
        else:
            name = f"x{i}"
            hi = rng.choice([7, 15, 31]) if budget >= 64 else 3
            lines.append(f"{name}: int = nondet_int()")
            lines.append(f"__ESBMC_assume({name} >= 0 and {name} <= {hi})")
            int_vars.append(name)
            budget //= hi + 1

    def int_expr(depth: int = 0) -> str:
        if depth > 2 or rng.random() < 0.35 or not int_vars:
            if int_vars and rng.random() < 0.7:
                return rng.choice(int_vars)
            return str(rng.randint(0, 12))
        op = rng.choice(["+", "-", "*", "&", "|", "^", "//", "%", "<<"])
        left = int_expr(depth + 1)
        if op in ("//", "%"):
            return f"({left} {op} {rng.randint(1, 7)})"
        if op == "<<":
            return f"({left} << {rng.randint(0, 3)})"
        if op == "*":
            return f"({left} * {rng.randint(0, 5)})"
        return f"({left} {op} {int_expr(depth + 1)})"

    def bool_expr(depth: int = 0) -> str:
        if depth > 1 and bool_vars and rng.random() < 0.4:
            return rng.choice(bool_vars)
        choice = rng.random()
        if choice < 0.55 or depth > 2:
            op = rng.choice(["==", "!=", "<", "<=", ">", ">="])
            return f"{int_expr(depth + 1)} {op} {int_expr(depth + 1)}"
        if choice < 0.75:
            return f"({bool_expr(depth + 1)} and {bool_expr(depth + 1)})"
        if choice < 0.95:
            return f"({bool_expr(depth + 1)} or {bool_expr(depth + 1)})"
        return f"(not {bool_expr(depth + 1)})"

    for i in range(rng.randint(1, 3)):
        name = f"t{i}"
        lines.append(f"{name}: int = {int_expr()}")
        int_vars.append(name)

    if rng.random() < 0.6:
        branch_var = f"t{len(int_vars)}"
        lines.append(f"{branch_var}: int = 0")
        lines.append(f"if {bool_expr()}:")
        lines.append(f"    {branch_var} = {int_expr()}")
        lines.append("else:")
        lines.append(f"    {branch_var} = {int_expr()}")
        int_vars.append(branch_var)

    for _ in range(rng.randint(1, 2)):
        lines.append(f"assert {bool_expr()}")
    return "\n".join(lines) + "\n"
