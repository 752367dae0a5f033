"""Command line interface.

Exit codes: 0 accept or success, 1 reject / failed check / refusal to run
uncertified, 2 bad usage or unreadable input, 3 internal error or exhausted
search budget.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from . import bench as bench_mod
from . import formats
from .automaton import Dfa, TypedAutomaton
from .errors import (BudgetExhausted, ChecksumMismatch, EmptyExpression,
                     EpsilonLanguage, GraphfaError, InvariantViolation,
                     MixedRankSubset, ParseError, SemanticError, SubsetConflict,
                     TypeMismatch, UncertifiedDfa, VersionMismatch)
from .langs import LANGUAGES, generate, lang
from .pipeline import compile_automaton, compile_regex_text
from .recognizer import recognize

INPUT_ERRORS = (ParseError, SemanticError, TypeMismatch, EmptyExpression,
                EpsilonLanguage, VersionMismatch, ChecksumMismatch,
                InvariantViolation, MixedRankSubset, SubsetConflict)


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write_output(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _looks_like_automaton(text: str) -> bool:
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line.startswith(("state ", "state\t", "start ", "start\t")) or "->" in line:
            return True
    return False


def _load_automaton_file(text: str) -> TypedAutomaton:
    if text.lstrip().startswith("dfa-format"):
        return formats.read_dfa(text)
    return formats.parse_automaton_spec(text)


def _cmd_compile(args) -> int:
    text = _read_input(args.input)
    if _looks_like_automaton(text):
        result = compile_automaton(formats.parse_automaton_spec(text))
    else:
        result = compile_regex_text(text)
    dfa = result.dfa

    report_to = sys.stderr if args.out in (None, "-") else sys.stdout
    print(result.ts.render(dfa), file=report_to)
    print(result.fec.render(dfa), file=report_to)
    print(f"states: {dfa.n_states}  transitions: {len(dfa.transitions)}  "
          f"certified: {'yes' if dfa.certified else 'no'}", file=report_to)

    if dfa.certified or args.allow_uncertified:
        _write_output(args.out, formats.write_dfa(dfa))
    return 0 if dfa.certified else 1


def _cmd_recognize(args) -> int:
    auto = _load_automaton_file(_read_input(args.automaton))
    g = formats.parse_graph(_read_input(args.graph))
    kw = {}
    if args.mode == "backtracking":
        kw["want_trace"] = args.trace
        if args.budget is not None:
            kw["budget"] = args.budget
    else:
        kw.update(engine=args.engine, audit=args.audit, want_trace=args.trace)
    out = recognize(auto, g, mode=args.mode, **kw)
    if not out.accepted:
        print(f"reject: {out.reason}")
        return 1
    print("accept")
    if args.witness:
        print(out.witness.text)
    if args.trace and out.trace is not None:
        names = auto.names
        for step in out.trace:
            edge = "-" if step.edge is None else str(step.edge)
            front = "[" + ", ".join(str(v) for v in step.front) + "]"
            print(f"step {step.step}: {names[step.state]}, {step.sym}, "
                  f"edge {edge}, F={front}")
    return 0


def _cmd_gen(args) -> int:
    arrays = generate(args.language, args.edges, seed=args.seed, variant=args.variant)
    if args.shuffle_seed is not None:
        arrays = arrays.shuffled(args.shuffle_seed)
    _write_output(args.out, formats.write_graph(arrays.to_graph()))
    return 0


def _cmd_bench(args) -> int:
    sizes = []
    for part in args.sizes.split(","):
        part = part.strip()
        if part:
            try:
                sizes.append(int(part))
            except ValueError:
                raise InvariantViolation(f"bad size {part!r}")
    spec = lang(args.language)
    snapped = tuple(spec.snap(s) for s in sizes)
    config = bench_mod.BenchConfig(
        language=args.language, sizes=snapped, reps=args.reps, drops=args.drops,
        seed=args.seed, mode=args.mode, engine=args.engine, variant=args.variant)
    results = bench_mod.run_bench(config)
    if args.csv:
        bench_mod.write_csv(results, args.csv)
    sys.stdout.write(bench_mod.format_table(results))
    return 0


def _cmd_export(args) -> int:
    text = _read_input(args.input)
    stripped = text.lstrip()
    if stripped.startswith("{"):
        obj = formats.parse_graph(text)
    else:
        obj = _load_automaton_file(text)
    _write_output(args.out, formats.export_dot(obj, name=args.name))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="graphfa",
        description="Compile graph regexes to checked deterministic automata "
                    "and recognize hypergraphs.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="compile a regex or automaton file")
    c.add_argument("input", help="regex or automaton file, - for stdin")
    c.add_argument("-o", "--out", help="write the compiled file here (default stdout)")
    c.add_argument("--allow-uncertified", action="store_true",
                   help="write the compiled file even when a check fails")
    c.set_defaults(func=_cmd_compile)

    r = sub.add_parser("recognize", help="test whether a graph is accepted")
    r.add_argument("--automaton", "-a", required=True,
                   help="compiled or plain automaton file")
    r.add_argument("graph", help="graph file (JSON), - for stdin")
    r.add_argument("--mode", choices=("efficient", "simple", "backtracking"),
                   default="efficient")
    r.add_argument("--engine", choices=("python", "numba"), default=None)
    r.add_argument("--audit", action="store_true",
                   help="run with internal consistency auditing (python engine)")
    r.add_argument("--witness", action="store_true",
                   help="print the witness word on acceptance")
    r.add_argument("--trace", action="store_true",
                   help="print state, symbol, edge and front per step")
    r.add_argument("--budget", type=int, default=None,
                   help="step budget for backtracking mode")
    r.set_defaults(func=_cmd_recognize)

    g = sub.add_parser("gen", help="generate a member of a built-in language")
    g.add_argument("language", choices=sorted(LANGUAGES))
    g.add_argument("--edges", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--variant", type=int, default=1)
    g.add_argument("--shuffle-seed", type=int, default=None,
                   help="permute the edge list with this seed")
    g.add_argument("-o", "--out", help="output file (default stdout)")
    g.set_defaults(func=_cmd_gen)

    b = sub.add_parser("bench", help="time the recognizer on generated members")
    b.add_argument("language", choices=sorted(LANGUAGES))
    b.add_argument("--sizes", required=True,
                   help="comma-separated edge counts (snapped to valid sizes)")
    b.add_argument("--reps", type=int, default=40)
    b.add_argument("--drops", type=int, default=4)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--mode", choices=("efficient", "simple"), default="efficient")
    b.add_argument("--engine", choices=("python", "numba"), default=None)
    b.add_argument("--variant", type=int, default=1)
    b.add_argument("--csv", help="also write results to this CSV file")
    b.set_defaults(func=_cmd_bench)

    e = sub.add_parser("export", help="export an automaton or graph to DOT")
    e.add_argument("input", help="automaton, compiled, or graph file; - for stdin")
    e.add_argument("--name", default="g", help="DOT graph name")
    e.add_argument("-o", "--out", help="output file (default stdout)")
    e.set_defaults(func=_cmd_export)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UncertifiedDfa as e:
        print(f"refused: {e}", file=sys.stderr)
        return 1
    except INPUT_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except BudgetExhausted as e:
        print(f"gave up: {e}", file=sys.stderr)
        return 3
    except GraphfaError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
