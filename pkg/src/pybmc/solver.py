"""Solver drivers: external SMT-LIB process and the exhaustive oracle.

``solve_external`` pipes a script into whatever command the configuration
names (default: the bundled Node shim over the z3-solver WASM build, or a
``z3``/``boolector`` binary when one is on PATH) and parses the verdict plus
``get-value`` bindings. ``solve_oracle`` enumerates every assignment of the
VC's input symbols (after syntactic assume-bound extraction) and evaluates
C AND not P concretely; it is the ground truth the external route is checked
against.
"""
from __future__ import annotations

import functools
import os
import shlex
import shutil
import subprocess
from dataclasses import dataclass
from importlib import resources

from .errors import (
    DomainTooLarge,
    ModelParseError,
    SolverCrashed,
    UnsupportedSortForOracle,
)
from .exprs import Binary, Compare, Const, Expr, Unary, Var, eval_expr, wrap_int
from .vc import Vc
from .vtypes import BoolType, FloatType, IntType

ORACLE_DOMAIN_CAP = 1 << 20

SAT, UNSAT, UNKNOWN, TIMEOUT = "SAT", "UNSAT", "UNKNOWN", "TIMEOUT"


@dataclass
class Verdict:
    status: str  # SAT | UNSAT | UNKNOWN | TIMEOUT
    model: dict[str, int | float | bool] | None = None
    reason: str | None = None


# ---------------------------------------------------------------------------
# external solver
# ---------------------------------------------------------------------------

def bundled_shim_path() -> str:
    return str(resources.files("pybmc").joinpath("data/z3smt.cjs"))


@functools.lru_cache(maxsize=1)
def _npm_global_root() -> str | None:
    npm = shutil.which("npm")
    if npm is None:
        return None
    try:
        proc = subprocess.run([npm, "root", "-g"], capture_output=True,
                              text=True, timeout=30)
    except (OSError, subprocess.TimeoutExpired):
        return None
    return proc.stdout.strip() or None


def default_solver_command() -> list[str] | None:
    """Pick a usable solver command for this machine."""
    env_cmd = os.environ.get("PYBMC_SOLVER")
    if env_cmd:
        return shlex.split(env_cmd)
    if shutil.which("node") is not None:
        return ["node", bundled_shim_path()]
    if shutil.which("z3") is not None:
        return ["z3", "-in"]
    if shutil.which("boolector") is not None:
        return ["boolector", "--smt2"]
    return None


def solve_external(script: str, solver_cmd: list[str] | str,
                   timeout: float = 60.0) -> Verdict:
    """Run one script through the solver process; first verdict wins."""
    verdicts = solve_external_multi(script, solver_cmd, timeout, expected=1)
    return verdicts[0] if verdicts else Verdict(UNKNOWN, reason="no solver output")


def solve_external_multi(script: str, solver_cmd: list[str] | str,
                         timeout: float = 60.0,
                         expected: int | None = None) -> list[Verdict]:
    """Run a (possibly multi-check) script and collect one verdict per check."""
    cmd = shlex.split(solver_cmd) if isinstance(solver_cmd, str) else list(solver_cmd)
    env = os.environ.copy()
    if cmd and cmd[0] == "node" and "NODE_PATH" not in env:
        root = _npm_global_root()
        if root:
            env["NODE_PATH"] = root
    try:
        proc = subprocess.run(cmd, input=script, capture_output=True,
                              text=True, timeout=timeout, env=env)
    except subprocess.TimeoutExpired:
        return [Verdict(TIMEOUT, reason=f"solver exceeded {timeout}s")]
    except OSError as e:
        raise SolverCrashed(-1, f"cannot launch {cmd[0]}: {e}")

    verdicts = _parse_solver_output(proc.stdout)
    if not verdicts:
        raise SolverCrashed(proc.returncode, proc.stderr or proc.stdout)
    if expected is not None and len(verdicts) < expected:
        raise SolverCrashed(proc.returncode,
                            f"expected {expected} verdicts, got {len(verdicts)}")
    return verdicts


def _parse_solver_output(text: str) -> list[Verdict]:
    tokens = _tokenize(text)
    verdicts: list[Verdict] = []
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in ("sat", "unsat", "unknown"):
            verdict = Verdict({"sat": SAT, "unsat": UNSAT, "unknown": UNKNOWN}[tok])
            # a model s-expression may follow a sat answer
            if tok == "sat":
                j = i + 1
                if j < len(tokens) and tokens[j] == "(":
                    sexpr, j = _read_sexpr(tokens, j)
                    verdict.model = _model_from_sexpr(sexpr)
                    i = j - 1
            verdicts.append(verdict)
        elif tok == "(":
            sexpr, j = _read_sexpr(tokens, i)
            if sexpr and sexpr[0] == "error" and verdicts \
                    and verdicts[-1].status in (UNSAT, UNKNOWN):
                pass  # e.g. "model is not available" after unsat; ignore
            i = j - 1
        i += 1
    return verdicts


def _tokenize(text: str) -> list[str]:
    out: list[str] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in "()":
            out.append(c)
            i += 1
        elif c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            out.append(text[i:j + 1])
            i = j + 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def _read_sexpr(tokens: list[str], i: int):
    """tokens[i] must be '('; returns (nested list, next index)."""
    assert tokens[i] == "("
    out: list = []
    i += 1
    while i < len(tokens):
        tok = tokens[i]
        if tok == "(":
            sub, i = _read_sexpr(tokens, i)
            out.append(sub)
        elif tok == ")":
            return out, i + 1
        else:
            out.append(tok)
            i += 1
    raise ModelParseError("unbalanced model s-expression")


def _decode_value(value) -> int | float | bool | None:
    if isinstance(value, str):
        if value == "true":
            return True
        if value == "false":
            return False
        if value.startswith("#x"):
            return int(value[2:], 16)
        if value.startswith("#b"):
            return int(value[2:], 2)
        if value.lstrip("-").isdigit():
            return int(value)
        return None
    if isinstance(value, list) and value:
        if value[0] == "_":
            if len(value) >= 2 and value[1].startswith("bv"):
                return int(value[1][2:])
            if value[1] in ("NaN",):
                return float("nan")
            if value[1] in ("+oo",):
                return float("inf")
            if value[1] in ("-oo",):
                return float("-inf")
            if value[1] in ("+zero",):
                return 0.0
            if value[1] in ("-zero",):
                return -0.0
        if value[0] == "fp" and len(value) == 4:
            sign = _decode_value(value[1])
            exp = _decode_value(value[2])
            mant = _decode_value(value[3])
            if None in (sign, exp, mant):
                return None
            import struct
            bits = (int(sign) << 63) | (int(exp) << 52) | int(mant)
            return struct.unpack(">d", struct.pack(">Q", bits))[0]
        if value[0] == "-" and len(value) == 2:
            inner = _decode_value(value[1])
            return None if inner is None else -inner
    return None


def _model_from_sexpr(sexpr: list) -> dict[str, int | float | bool]:
    model: dict[str, int | float | bool] = {}
    for pair in sexpr:
        if not isinstance(pair, list) or len(pair) != 2:
            continue
        name, raw = pair
        value = _decode_value(raw)
        if not isinstance(name, str) or value is None:
            raise ModelParseError(f"cannot decode model binding {pair}")
        model[name] = value
    return model


def typed_model(vc: Vc, model: dict[str, int | float | bool]) -> dict:
    """Reinterpret raw solver values under the VC's declared sorts."""
    out: dict[str, int | float | bool] = {}
    for sym in vc.inputs:
        if sym.name not in model:
            continue
        value = model[sym.name]
        t = sym.type
        if isinstance(t, IntType) and isinstance(value, (int, bool)):
            out[sym.name] = wrap_int(int(value), t)
        elif isinstance(t, BoolType):
            out[sym.name] = bool(value)
        else:
            out[sym.name] = value
    return out


# ---------------------------------------------------------------------------
# enumeration oracle
# ---------------------------------------------------------------------------

def _input_bounds(vc: Vc) -> dict[str, tuple[int, int]]:
    """Syntactic [lo, hi] ranges from assume comparisons against literals.

    A conjunct restricts the domain when it holds unconditionally: either a
    plain comparison, or an implication ``g => e`` whose guard consists only
    of conjuncts already established earlier in the trace (the shape chained
    assumes produce).
    """
    bounds: dict[str, tuple[int, int]] = {}
    for sym in vc.inputs:
        if isinstance(sym.type, IntType):
            bounds[sym.name] = (sym.type.min_value, sym.type.max_value)

    def tighten(name: str, lo: int | None, hi: int | None) -> None:
        if name not in bounds:
            return
        cur_lo, cur_hi = bounds[name]
        bounds[name] = (max(cur_lo, lo) if lo is not None else cur_lo,
                        min(cur_hi, hi) if hi is not None else cur_hi)

    def scan(e: Expr) -> None:
        if isinstance(e, Compare):
            var, const, op = None, None, e.op
            if isinstance(e.left, Var) and isinstance(e.right, Const):
                var, const = e.left, int(e.right.value)
            elif isinstance(e.right, Var) and isinstance(e.left, Const):
                var, const = e.right, int(e.left.value)
                op = {"lt": "gt", "le": "ge", "gt": "lt", "ge": "le"}.get(op, op)
            if var is None or not isinstance(var.type, IntType):
                return
            if op == "lt":
                tighten(var.name, None, const - 1)
            elif op == "le":
                tighten(var.name, None, const)
            elif op == "gt":
                tighten(var.name, const + 1, None)
            elif op == "ge":
                tighten(var.name, const, None)
            elif op == "eq":
                tighten(var.name, const, const)
        elif isinstance(e, Binary) and e.op == "and":
            scan(e.left)
            scan(e.right)

    established: set[Expr] = set()
    input_names = {s.name for s in vc.inputs}

    def is_established(g: Expr) -> bool:
        if g in established:
            return True
        if isinstance(g, Binary) and g.op == "and":
            return is_established(g.left) and is_established(g.right)
        return False

    for c in vc.constraints:
        body = None
        if isinstance(c, Binary) and c.op == "or" \
                and isinstance(c.left, Unary) and c.left.op == "not" \
                and is_established(c.left.operand):
            body = c.right
        elif isinstance(c, Compare):
            definitional = (c.op == "eq" and isinstance(c.left, Var)
                            and c.left.name not in input_names)
            if not definitional:
                body = c
        elif isinstance(c, Binary) and c.op == "and":
            body = c
        if body is not None:
            scan(body)
            established.add(body)
    return bounds


def solve_oracle(vc: Vc, cap: int = ORACLE_DOMAIN_CAP) -> Verdict:
    """Enumerate input assignments in lexicographic order; exact and slow."""
    domains: list[tuple[str, list]] = []
    bounds = _input_bounds(vc)
    total = 1
    for sym in vc.inputs:
        if isinstance(sym.type, BoolType):
            domains.append((sym.name, [False, True]))
            total *= 2
        elif isinstance(sym.type, IntType):
            lo, hi = bounds[sym.name]
            if lo > hi:
                return Verdict(UNSAT)  # assumes already contradict each other
            size = hi - lo + 1
            total *= size
            if total > cap:
                raise DomainTooLarge(
                    f"domain product exceeds {cap} at input {sym.name}")
            domains.append((sym.name, [lo, hi]))
        elif isinstance(sym.type, FloatType):
            raise UnsupportedSortForOracle("oracle does not enumerate floats")
        else:
            raise UnsupportedSortForOracle(f"oracle cannot handle {sym.type}")
    if total > cap:
        raise DomainTooLarge(f"domain product {total} exceeds {cap}")

    names = [name for name, _ in domains]
    env: dict[str, int | float | bool] = {}

    def assign(i: int) -> Verdict | None:
        if i == len(domains):
            if _query_holds(vc, env):
                return Verdict(SAT, model=dict(env))
            return None
        name, dom = domains[i]
        if len(dom) == 2 and isinstance(dom[0], bool):
            values = dom
        else:
            values = range(dom[0], dom[1] + 1)
        for value in values:
            env[name] = value
            result = assign(i + 1)
            if result is not None:
                return result
        env.pop(name, None)
        return None

    result = assign(0)
    if result is not None:
        return result
    return Verdict(UNSAT)


def _query_holds(vc: Vc, inputs: dict) -> bool:
    env = dict(inputs)
    for c in vc.constraints:
        if isinstance(c, Compare) and c.op == "eq" and isinstance(c.left, Var) \
                and c.left.name not in env:
            env[c.left.name] = eval_expr(c.right, env)
            continue
        if not eval_expr(c, env):
            return False
    return not eval_expr(vc.prop, env)
