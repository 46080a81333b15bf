import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from pybmc.solver import default_solver_command

_SOLVER = default_solver_command()
_CRITERIA: list[tuple[str, bool, str]] = []


def external_solver():
    return _SOLVER


def record_criterion(name: str, ok: bool, detail: str = "") -> None:
    _CRITERIA.append((name, ok, detail))


requires_solver = pytest.mark.skipif(
    _SOLVER is None, reason="no external SMT solver available on this machine")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _CRITERIA:
        status = "PASS" if ok else "FAIL"
        extra = f"  [{detail}]" if detail else ""
        terminalreporter.write_line(f"{status}  {name}{extra}")
