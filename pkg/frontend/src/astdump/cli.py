"""Parse a Python source file with the host interpreter and emit its AST
as JSON.

Every node object carries ``_type``, the node's fields, and source
locations where the host AST defines them. The document root additionally
records ``python_version`` so consumers can reject dialects they were not
tested against. Keys are sorted and the output is 2-space indented, so a
fixed source file and interpreter produce byte-identical dumps.

Exit codes: 0 ok, 2 syntax error, 3 I/O error.
"""
import argparse
import ast
import json
import sys

LOCATION_FIELDS = ("lineno", "col_offset", "end_lineno", "end_col_offset")


def node_to_json(node):
    if isinstance(node, ast.AST):
        out = {"_type": type(node).__name__}
        for name, value in ast.iter_fields(node):
            out[name] = node_to_json(value)
        for name in LOCATION_FIELDS:
            value = getattr(node, name, None)
            if value is not None:
                out[name] = value
        return out
    if isinstance(node, list):
        return [node_to_json(item) for item in node]
    if isinstance(node, bytes):
        return {"_type": "bytes", "value": list(node)}
    if isinstance(node, complex):
        return {"_type": "complex", "real": node.real, "imag": node.imag}
    return node


def dump_source(source, filename="<source>"):
    tree = ast.parse(source, filename=filename)
    doc = node_to_json(tree)
    doc["python_version"] = "%d.%d.%d" % sys.version_info[:3]
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="ast-dump", description="dump a Python file's AST as JSON")
    parser.add_argument("source", help="Python source file")
    parser.add_argument("-o", "--output", default=None,
                        help="output path (default: standard output)")
    args = parser.parse_args(argv)

    try:
        with open(args.source, "r", encoding="utf-8") as f:
            source = f.read()
    except OSError as e:
        print("ast-dump: cannot read %s: %s" % (args.source, e), file=sys.stderr)
        return 3
    try:
        text = dump_source(source, args.source)
    except SyntaxError as e:
        print("ast-dump: %s" % e, file=sys.stderr)
        return 2
    if args.output is None:
        sys.stdout.write(text)
        return 0
    try:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as e:
        print("ast-dump: cannot write %s: %s" % (args.output, e), file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
