"""Regression-suite harness with wall-time and peak-memory measurement.

Suite layout: ``<suite>/<category>/<test>/{main.py, main.json, expect}``.
The ``expect`` file holds the expected verdict (FAILED or SUCCESSFUL) on the
first line and optional extra CLI flags on the second. Every test runs in
its own process; peak resident set comes from the child's own rusage
counters so parallel runs do not distort each other.
"""
from __future__ import annotations

import shlex
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MissingExpectation

# runs the verifier in-process, then reports its own peak RSS on stderr
_WRAPPER = """
import resource, sys
from pybmc.cli import main
code = main(sys.argv[1:])
peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
print(f"##MAXRSS_KB={peak}", file=sys.stderr)
sys.exit(code)
"""


@dataclass
class CaseResult:
    category: str
    name: str
    expected: str
    actual: str
    ok: bool
    wall_s: float
    mem_bytes: int
    detail: str = ""


@dataclass
class BenchReport:
    results: list[CaseResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def categories(self) -> dict[str, list[CaseResult]]:
        out: dict[str, list[CaseResult]] = {}
        for r in self.results:
            out.setdefault(r.category, []).append(r)
        return out

    def rows(self) -> list[tuple[str, int, float, float]]:
        rows = []
        for category, results in sorted(self.categories().items()):
            mem = sum(r.mem_bytes for r in results) / len(results)
            wall = sum(r.wall_s for r in results) / len(results)
            rows.append((category, len(results), mem, wall))
        return rows


_HYPHENATED = {
    "built_in_functions": "Built-in functions",
    "non_determinism": "Non-determinism",
}


def category_display(dirname: str) -> str:
    if dirname in _HYPHENATED:
        return _HYPHENATED[dirname]
    return dirname.replace("_", " ").capitalize()


def discover_tests(suite_dir: Path) -> list[tuple[str, str, Path]]:
    """(category display name, test name, test dir) sorted for determinism."""
    tests = []
    for cat_dir in sorted(p for p in suite_dir.iterdir() if p.is_dir()):
        for test_dir in sorted(p for p in cat_dir.iterdir() if p.is_dir()):
            tests.append((category_display(cat_dir.name), test_dir.name, test_dir))
    return tests


def read_expectation(test_dir: Path) -> tuple[str, list[str]]:
    expect_file = test_dir / "expect"
    if not expect_file.exists():
        raise MissingExpectation(f"{test_dir} has no expect file")
    lines = expect_file.read_text().splitlines()
    verdict = lines[0].strip()
    if verdict not in ("FAILED", "SUCCESSFUL"):
        raise MissingExpectation(f"{expect_file}: bad verdict {verdict!r}")
    flags = shlex.split(lines[1]) if len(lines) > 1 else []
    return verdict, flags


def _input_file(test_dir: Path) -> Path:
    json_file = test_dir / "main.json"
    if json_file.exists():
        return json_file
    return test_dir / "main.py"


def run_test(category: str, name: str, test_dir: Path,
             base_flags: list[str]) -> CaseResult:
    expected, flags = read_expectation(test_dir)
    cmd = [sys.executable, "-c", _WRAPPER, str(_input_file(test_dir))] + flags + base_flags
    start = time.perf_counter()
    proc = subprocess.run(cmd, capture_output=True, text=True, timeout=300)
    wall = time.perf_counter() - start
    mem = 0
    for line in proc.stderr.splitlines():
        if line.startswith("##MAXRSS_KB="):
            mem = int(line.split("=", 1)[1]) * 1024  # linux reports KB
    actual = {0: "SUCCESSFUL", 1: "FAILED"}.get(proc.returncode,
                                                f"ERROR({proc.returncode})")
    detail = "" if actual in ("SUCCESSFUL", "FAILED") else proc.stderr.strip()[:300]
    return CaseResult(category, name, expected, actual, actual == expected,
                      wall, mem, detail)


def run_suite(suite_dir: str | Path, base_flags: list[str] | None = None,
              jobs: int = 1) -> BenchReport:
    suite = Path(suite_dir)
    tests = discover_tests(suite)
    # one solver process per test: every assertion still gets its own
    # check-sat, batched with push/pop
    base = ["--multi-property"] + list(base_flags or [])
    report = BenchReport()
    if jobs <= 1:
        for category, name, test_dir in tests:
            report.results.append(run_test(category, name, test_dir, base))
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_test, c, n, d, base) for c, n, d in tests]
            report.results = [f.result() for f in futures]
    return report


def render_report(report: BenchReport) -> str:
    lines = []
    lines.append(f"{'Category':<22} {'Test Cases':>10} {'Mem. Usage':>12} {'Exec. Time':>12}")
    lines.append("-" * 60)
    for category, count, mem, wall in report.rows():
        lines.append(f"{category:<22} {count:>10} {mem / (1 << 20):>9.1f} MB "
                     f"{wall * 1000:>9.1f} ms")
    lines.append("")
    mismatches = [r for r in report.results if not r.ok]
    for r in report.results:
        status = "ok" if r.ok else "MISMATCH"
        lines.append(f"[{status:>8}] {r.category}/{r.name}: expected {r.expected}, "
                     f"got {r.actual} ({r.wall_s * 1000:.0f} ms)")
        if r.detail:
            lines.append(f"           {r.detail}")
    lines.append("")
    lines.append(f"{len(report.results)} tests, {len(mismatches)} mismatches")
    return "\n".join(lines)


def bench_main(argv: list[str]) -> int:
    import argparse

    p = argparse.ArgumentParser(prog="pybmc bench")
    p.add_argument("suite", help="suite directory")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--solver", default=None)
    p.add_argument("--timeout", type=float, default=None)
    args = p.parse_args(argv)
    base: list[str] = []
    if args.solver:
        base += ["--solver", args.solver]
    if args.timeout:
        base += ["--timeout", str(args.timeout)]
    report = run_suite(args.suite, base, args.jobs)
    print(render_report(report))
    return 0 if report.ok else 1
