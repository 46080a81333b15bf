"""Unit tests for the ast-dump tool."""
import ast
import json
import subprocess
import sys
from pathlib import Path

import pytest

from astdump.cli import dump_source, main

LISTING = """\
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


def test_annotated_assignment_shape():
    doc = json.loads(dump_source("n:int = nondet_int()"))
    node = doc["body"][0]
    assert node["_type"] == "AnnAssign"
    assert node["annotation"] == {
        "_type": "Name", "id": "int", "ctx": {"_type": "Load"},
        "lineno": 1, "col_offset": 2, "end_lineno": 1, "end_col_offset": 5}
    assert node["target"]["_type"] == "Name"
    assert node["target"]["id"] == "n"
    assert node["value"]["_type"] == "Call"
    assert node["value"]["func"]["id"] == "nondet_int"


def test_empty_file_is_empty_module():
    doc = json.loads(dump_source(""))
    assert doc["_type"] == "Module"
    assert doc["body"] == []


def test_root_records_interpreter_version():
    doc = json.loads(dump_source("x = 1"))
    assert doc["python_version"] == "%d.%d.%d" % sys.version_info[:3]


def test_every_node_has_type_field():
    doc = json.loads(dump_source(LISTING))

    def check(obj):
        if isinstance(obj, dict):
            assert "_type" in obj, obj
            for value in obj.values():
                check(value)
        elif isinstance(obj, list):
            for item in obj:
                check(item)

    check(doc)


def test_node_count_matches_independent_walk():
    doc = json.loads(dump_source(LISTING))
    host_count = sum(1 for _ in ast.walk(ast.parse(LISTING)))

    def count(obj):
        if isinstance(obj, dict):
            own = 1 if "_type" in obj and obj["_type"] not in ("bytes", "complex") else 0
            return own + sum(count(v) for v in obj.values())
        if isinstance(obj, list):
            return sum(count(v) for v in obj)
        return 0

    assert count(doc) == host_count


def test_line_numbers_within_source():
    doc = json.loads(dump_source(LISTING))
    lines = LISTING.count("\n")

    def check(obj):
        if isinstance(obj, dict):
            if "lineno" in obj:
                assert 1 <= obj["lineno"] <= lines
            for value in obj.values():
                check(value)
        elif isinstance(obj, list):
            for item in obj:
                check(item)

    check(doc)


def test_dump_is_deterministic():
    assert dump_source(LISTING) == dump_source(LISTING)


def test_keys_are_sorted():
    doc = dump_source("x = 1")
    reloaded = json.loads(doc)
    assert doc == json.dumps(reloaded, indent=2, sort_keys=True) + "\n"


# --- CLI ---

def test_cli_stdout(tmp_path, capsys):
    source = tmp_path / "prog.py"
    source.write_text("x: int = 5\n")
    assert main([str(source)]) == 0
    out = capsys.readouterr().out
    assert json.loads(out)["_type"] == "Module"


def test_cli_output_file(tmp_path):
    source = tmp_path / "prog.py"
    source.write_text("x: int = 5\n")
    out = tmp_path / "prog.json"
    assert main([str(source), "-o", str(out)]) == 0
    assert json.loads(out.read_text())["_type"] == "Module"


def test_cli_syntax_error_exit_2(tmp_path, capsys):
    source = tmp_path / "broken.py"
    source.write_text("def f(:\n")
    assert main([str(source)]) == 2
    assert "broken.py" in capsys.readouterr().err


def test_cli_missing_file_exit_3(tmp_path, capsys):
    assert main([str(tmp_path / "ghost.py")]) == 3
    err = capsys.readouterr().err
    assert "ghost.py" in err


def test_cli_unwritable_output_exit_3(tmp_path):
    source = tmp_path / "prog.py"
    source.write_text("x = 1\n")
    assert main([str(source), "-o", str(tmp_path / "no" / "dir.json")]) == 3


def test_installed_entry_point(tmp_path):
    source = tmp_path / "prog.py"
    source.write_text("x: int = 5\n")
    proc = subprocess.run(["ast-dump", str(source)], capture_output=True, text=True)
    if proc.returncode != 0 and "No such file" in proc.stderr:
        pytest.skip("ast-dump not installed")
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["_type"] == "Module"
