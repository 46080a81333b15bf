"""Loading, subset validation, imports and isolation."""
import json

import pytest

from pybmc.astnodes import count_nodes, node_from_json
from pybmc.errors import (
    FunctionNotFound,
    ImportCycle,
    MalformedAst,
    ModuleLookupError,
    UnsupportedConstruct,
)
from pybmc.ingest import isolate_function, load_ast, load_file, render_parse_tree, resolve_imports

from helpers import dump_doc, make_unit

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


def test_load_annotated_assignment_shape():
    module = load_ast(dump_doc("n:int = nondet_int()"))
    stmt = module["body"][0]
    assert stmt.kind == "AnnAssign"
    assert stmt["target"].kind == "Name" and stmt["target"]["id"] == "n"
    assert stmt["annotation"]["id"] == "int"
    call = stmt["value"]
    assert call.kind == "Call" and call["func"]["id"] == "nondet_int"


def test_load_empty_module():
    module = load_ast({"_type": "Module", "body": []})
    assert module.kind == "Module"
    assert module["body"] == []


def test_lambda_rejected_with_location():
    doc = dump_doc("f = lambda x: x")
    with pytest.raises(UnsupportedConstruct) as err:
        load_ast(doc)
    assert err.value.loc is not None and err.value.loc.line == 1


@pytest.mark.parametrize("source", [
    "try:\n    x = 1\nexcept Exception:\n    pass",
    "with open('f') as f:\n    pass",
    "x = [i for i in range(3)]",
    "async def f():\n    pass",
    "x, y = 1, 2",
    "del x",
    "x += 1",
    "while True:\n    break",
    "def f(*args):\n    pass",
])
def test_outside_subset_rejected(source):
    with pytest.raises(UnsupportedConstruct):
        load_ast(dump_doc(source))


def test_missing_type_field_is_malformed():
    with pytest.raises(MalformedAst):
        node_from_json({"body": []})
    with pytest.raises(MalformedAst):
        load_ast({"_type": "Expr"})


def test_python_version_gate():
    doc = dump_doc("x = 1")
    doc["python_version"] = "3.4.0"
    with pytest.raises(MalformedAst):
        load_ast(doc)
    doc["python_version"] = "2.7.18"
    with pytest.raises(MalformedAst):
        load_ast(doc)


def test_locations_preserved_and_bounded():
    module = load_ast(dump_doc(LISTING))
    line_count = LISTING.count("\n")
    for node in module.walk():
        if node.loc is not None:
            assert 1 <= node.loc.line <= line_count
            assert node.loc.col >= 0


def test_load_file_missing(tmp_path):
    with pytest.raises(ModuleLookupError):
        load_file(tmp_path / "absent.json")


def test_load_file_json(tmp_path):
    path = tmp_path / "prog.json"
    path.write_text(json.dumps(dump_doc("x: int = 1")))
    unit = load_file(path)
    assert unit.module_name == "prog"
    assert unit.source_path == "prog.py"


# --- imports ---

def test_import_resolves_sibling_module(tmp_path):
    unit = make_unit("import helper\nx: int = 1\n",
                     imports={"helper": "H: int = 2\n"}, tmp_path=tmp_path)
    assert set(unit.imported_modules) == {"helper"}
    assert len(unit.all_modules()) == 2


def test_import_chain_three_deep(tmp_path):
    unit = make_unit(
        "import a\nx: int = 1\n",
        imports={
            "a": "import b\ndef fa(v: int) -> int:\n    return b.fb(v)\n",
            "b": "import c\ndef fb(v: int) -> int:\n    return c.fc(v)\n",
            "c": "def fc(v: int) -> int:\n    return v + 1\n",
        },
        tmp_path=tmp_path)
    assert set(unit.imported_modules) == {"a", "b", "c"}
    assert len(unit.imported_modules) == 3
    # topological availability: the whole chain type-checks and resolves
    from helpers import annotated
    src = "import a\nr: int = a.fa(1)\nassert r == 2\n"
    unit2 = annotated(src, imports={
        "a": "import b\ndef fa(v: int) -> int:\n    return b.fb(v)\n",
        "b": "import c\ndef fb(v: int) -> int:\n    return c.fc(v)\n",
        "c": "def fc(v: int) -> int:\n    return v + 1\n",
    }, tmp_path=tmp_path)
    assert unit2.type_info.functions["c@fc"].ret is not None


def test_self_import_is_a_cycle(tmp_path):
    with pytest.raises(ImportCycle):
        make_unit("import main\n", imports={"main": "x: int = 1\n"},
                  tmp_path=tmp_path)


def test_mutual_import_cycle(tmp_path):
    with pytest.raises(ImportCycle):
        make_unit("import p\n",
                  imports={"p": "import q\n", "q": "import p\n"},
                  tmp_path=tmp_path)


def test_missing_module(tmp_path):
    unit = make_unit("x: int = 1")
    unit.main_module = load_ast(dump_doc("import ghost\n"))
    with pytest.raises(ModuleLookupError):
        resolve_imports(unit, tmp_path)


# --- isolation ---

def test_isolate_marks_function():
    unit = make_unit(LISTING)
    isolate_function(unit, "factorial")
    assert unit.isolated_function == "factorial"


def test_isolate_missing_function():
    unit = make_unit(LISTING)
    with pytest.raises(FunctionNotFound):
        isolate_function(unit, "fibonacci")


def test_isolating_method_keeps_bases_in_scope():
    from helpers import to_symtab
    src = """\
class Base:
    def ping(self) -> int:
        return 1

class Child(Base):
    def pong(self) -> int:
        return self.ping() + 1
"""
    st = to_symtab(src, function="Child.pong")
    assert "main@Base" in st.symbols
    assert "main@Base@ping" in st.functions
    assert "main@Child@pong" in st.functions


# --- parse tree rendering ---

def test_render_empty_module_single_line():
    unit = make_unit("")
    assert render_parse_tree(unit) == "Module"


def test_render_listing_mentions_constructs():
    unit = make_unit(LISTING)
    text = render_parse_tree(unit)
    assert sum(1 for line in text.splitlines() if "FunctionDef" in line) == 1
    assert sum(1 for line in text.splitlines() if "Assert" in line) == 1


def test_render_line_count_equals_node_count():
    # independent oracle: count node objects in the raw JSON document
    def json_nodes(obj):
        if isinstance(obj, dict):
            own = 1 if "_type" in obj and obj["_type"] in _SUPPORTED else 0
            return own + sum(json_nodes(v) for v in obj.values())
        if isinstance(obj, list):
            return sum(json_nodes(v) for v in obj)
        return 0

    from pybmc.astnodes import NODE_SCHEMA
    global _SUPPORTED
    _SUPPORTED = set(NODE_SCHEMA)
    doc = dump_doc(LISTING)
    unit = make_unit(LISTING)
    rendered_lines = len(render_parse_tree(unit).splitlines())
    assert rendered_lines == count_nodes(unit.main_module)
    assert rendered_lines == json_nodes(doc)


def test_corpus_loads_without_unsupported_constructs():
    from helpers import SUITE_DIR

    # totality over the shipped benchmark corpus
    paths = sorted(SUITE_DIR.glob("*/*/*.json"))
    assert len(paths) >= 30
    for path in paths:
        load_ast(json.loads(path.read_text()))


def test_raw_source_uses_sibling_dump_when_dumper_missing(tmp_path, monkeypatch):
    import pybmc.ingest as ingest_mod

    py = tmp_path / "prog.py"
    py.write_text("x: int = 1\n")
    (tmp_path / "prog.json").write_text(json.dumps(dump_doc("x: int = 1\n")))
    monkeypatch.setattr(ingest_mod.shutil, "which", lambda _: None)
    unit = load_file(py)
    assert unit.main_module["body"][0].kind == "AnnAssign"

    lonely = tmp_path / "alone.py"
    lonely.write_text("x: int = 1\n")
    with pytest.raises(ModuleLookupError):
        load_file(lonely)
