"""Suite harness: discovery, expectations, the Table-1-shaped report."""
import pytest

from pybmc.bench import (
    BenchReport,
    CaseResult,
    category_display,
    discover_tests,
    read_expectation,
    render_report,
    run_suite,
)
from pybmc.errors import MissingExpectation

from helpers import SUITE_DIR

TABLE_CATEGORIES = {
    "Arith operations", "Assignments", "Assume", "Binary operations",
    "Binary types", "Built-in functions", "Classes", "Conditionals",
    "Functions", "Imports", "Logical operations", "Loops",
    "Non-determinism", "Numeric types", "Type annotation",
}


def test_shipped_suite_has_all_categories():
    tests = discover_tests(SUITE_DIR)
    categories = {c for c, _, _ in tests}
    assert categories == TABLE_CATEGORIES


def test_each_category_has_failing_and_passing_tests():
    by_category: dict[str, list[str]] = {}
    for category, _, test_dir in discover_tests(SUITE_DIR):
        verdict, _ = read_expectation(test_dir)
        by_category.setdefault(category, []).append(verdict)
    for category, verdicts in by_category.items():
        assert len(verdicts) >= 2, category
        assert "FAILED" in verdicts, f"{category} has no failing test"
        assert "SUCCESSFUL" in verdicts, f"{category} has no passing test"


def test_every_test_has_checked_in_ast(tmp_path):
    for _, _, test_dir in discover_tests(SUITE_DIR):
        assert (test_dir / "main.json").exists(), test_dir
        assert (test_dir / "main.py").exists(), test_dir


def test_expectation_parsing(tmp_path):
    d = tmp_path / "cat" / "t1"
    d.mkdir(parents=True)
    (d / "expect").write_text("FAILED\n--unwind 5 --function f\n")
    verdict, flags = read_expectation(d)
    assert verdict == "FAILED"
    assert flags == ["--unwind", "5", "--function", "f"]


def test_missing_expectation(tmp_path):
    d = tmp_path / "cat" / "t1"
    d.mkdir(parents=True)
    with pytest.raises(MissingExpectation):
        read_expectation(d)


def test_bad_expectation(tmp_path):
    d = tmp_path / "cat" / "t1"
    d.mkdir(parents=True)
    (d / "expect").write_text("MAYBE\n")
    with pytest.raises(MissingExpectation):
        read_expectation(d)


def test_empty_suite_is_ok(tmp_path):
    report = run_suite(tmp_path)
    assert report.ok
    assert report.results == []


def test_category_display_names():
    assert category_display("arith_operations") == "Arith operations"
    assert category_display("built_in_functions") == "Built-in functions"
    assert category_display("non_determinism") == "Non-determinism"


def test_report_rows_aggregate_per_category():
    report = BenchReport(results=[
        CaseResult("Loops", "a", "FAILED", "FAILED", True, 0.2, 10 << 20),
        CaseResult("Loops", "b", "SUCCESSFUL", "SUCCESSFUL", True, 0.4, 30 << 20),
        CaseResult("Assume", "c", "SUCCESSFUL", "SUCCESSFUL", True, 0.1, 8 << 20),
    ])
    rows = report.rows()
    assert rows[0][0] == "Assume" and rows[0][1] == 1
    loops = rows[1]
    assert loops[1] == 2
    assert loops[2] == 20 << 20  # mean bytes
    assert abs(loops[3] - 0.3) < 1e-9  # mean seconds


def test_render_report_shape():
    report = BenchReport(results=[
        CaseResult("Loops", "a", "FAILED", "FAILED", True, 0.2, 10 << 20),
        CaseResult("Loops", "b", "SUCCESSFUL", "FAILED", False, 0.4, 30 << 20),
    ])
    text = render_report(report)
    assert "Category" in text and "Test Cases" in text
    assert "Mem. Usage" in text and "Exec. Time" in text
    assert "MISMATCH" in text
    assert "1 mismatches" in text
    assert not report.ok


def test_mini_suite_runs_in_process(tmp_path):
    import json

    from helpers import dump_doc

    d = tmp_path / "smoke" / "trivial_ok"
    d.mkdir(parents=True)
    (d / "main.py").write_text("x: int = 1\nassert x == 1\n")
    (d / "main.json").write_text(json.dumps(dump_doc("x: int = 1\nassert x == 1\n")))
    (d / "expect").write_text("SUCCESSFUL\n")
    report = run_suite(tmp_path, base_flags=["--solver", "oracle"])
    assert report.ok
    assert report.results[0].category == "Smoke"
    assert report.results[0].mem_bytes > 0
    assert report.results[0].wall_s > 0


def test_run_suite_verdicts_deterministic(tmp_path):
    import shutil as _shutil

    # two consecutive runs over a small slice produce identical verdict columns
    for test in ("assume/range_leak_bug", "conditionals/sign_ok"):
        src = SUITE_DIR / test
        dst = tmp_path / test
        _shutil.copytree(src, dst)
    first = run_suite(tmp_path, base_flags=["--solver", "oracle"])
    second = run_suite(tmp_path, base_flags=["--solver", "oracle"])
    col = lambda r: [(t.category, t.name, t.actual) for t in r.results]
    assert col(first) == col(second)
    assert first.ok and second.ok
