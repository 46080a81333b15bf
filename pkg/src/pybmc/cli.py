"""Command-line entry point.

    pybmc <file.py|file.json> [options]     verify one program
    pybmc bench <suite-dir> [--jobs N]      run the regression suite
"""
from __future__ import annotations

import argparse
import sys

from .pipeline import RunConfig, run
from .report import EXIT_FRONTEND_ERROR


def _verify_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pybmc", description=__doc__)
    p.add_argument("input", help="Python source (.py) or dumped AST (.json)")
    p.add_argument("--unwind", type=int, default=1, metavar="N",
                   help="loop/recursion bound (default 1)")
    p.add_argument("--function", metavar="NAME", default=None,
                   help="verify one function with nondeterministic arguments")
    p.add_argument("--int-width", type=int, choices=(32, 64), default=32,
                   help="width of the default signed int type")
    p.add_argument("--overflow-check", action="store_true",
                   help="assert absence of signed arithmetic overflow")
    p.add_argument("--no-unwinding-assertions", action="store_true",
                   help="assume (instead of assert) that the bound suffices")
    p.add_argument("--solver", metavar="CMD", default=None,
                   help="external SMT-LIB v2 solver command; 'oracle' for the "
                        "builtin enumerator")
    p.add_argument("--timeout", type=float, default=60.0, metavar="S",
                   help="per-query solver timeout in seconds")
    p.add_argument("--output", choices=("text", "json"), default="text")
    p.add_argument("--multi-property", action="store_true",
                   help="batch all assertion queries into one solver process "
                        "(the default behavior; flag kept for compatibility)")
    p.add_argument("--smt-lib-out", metavar="FILE", default=None,
                   help="persist the generated SMT-LIB script")
    p.add_argument("--parse-tree-too", action="store_true", dest="parse_tree",
                   help="print the parse tree and continue")
    p.add_argument("--dump-annotated", action="store_true",
                   help="print the annotated AST as JSON and continue")
    p.add_argument("--show-symbol-table", action="store_true")
    p.add_argument("--show-goto", action="store_true")
    p.add_argument("--show-ssa", action="store_true")
    p.add_argument("--no-simplify", action="store_true",
                   help="skip SSA constant folding")
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and argv[0] == "bench":
        from .bench import bench_main
        return bench_main(argv[1:])
    args = _verify_parser().parse_args(argv)
    try:
        config = RunConfig(
            input_path=args.input,
            unwind=args.unwind,
            function=args.function,
            int_width=args.int_width,
            overflow_check=args.overflow_check,
            unwinding_assertions=not args.no_unwinding_assertions,
            solver=args.solver,
            timeout=args.timeout,
            output=args.output,
            multi_property=args.multi_property,
            smt_lib_out=args.smt_lib_out,
            parse_tree=args.parse_tree,
            dump_annotated=args.dump_annotated,
            show_symbol_table=args.show_symbol_table,
            show_goto=args.show_goto,
            show_ssa=args.show_ssa,
            no_simplify=args.no_simplify,
        )
    except ValueError as e:
        print(f"pybmc: {e}", file=sys.stderr)
        return EXIT_FRONTEND_ERROR
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
