"""Batch command-line front end for the grammar/machine/coloring pipeline.

Exit codes: 0 success, 1 domain failure (conflicted machine where one is
forbidden, exceeded search budget, failed verification), 2 I/O or parse
errors and bad usage.  All emitted output is deterministic for fixed
inputs, flags and seed; progress summaries go to stderr only.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .automaton import (ConflictError, build_lr0, build_lr1, dump_automaton,
                        export_dot)
from .grammar import (CyclicGrammarError, Grammar, GrammarError, grammar_stats,
                      parse_grammar, serialize_grammar)
from .minimize import (BudgetExceeded, InvalidSchemeError, SchemeFormatError,
                       apply_scheme, build_conflict_graph, merge_all_similar,
                       minimize_exact, minimize_greedy, parse_scheme,
                       serialize_scheme, validate_scheme)
from .reduction import (DimacsError, ReductionError, chromatic_oracle,
                        graph_to_grammar, parse_dimacs, recover_coloring,
                        serialize_coloring, serialize_trace, state_node_mapping,
                        verify_reduction)


@dataclass
class RunConfig:
    command: str
    inputs: tuple[Path, ...] = ()
    output: Optional[Path] = None
    mode: str = "exact"
    budget: int = 24
    seed: int = 0
    show_items: bool = False
    verify: bool = False
    scheme: Optional[Path] = None
    trace: Optional[Path] = None
    dump: Optional[Path] = None
    limit: int = 12


def _emit(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def _load_grammar(path: Path) -> Grammar:
    return parse_grammar(path.read_text(encoding="utf-8"))


def _cmd_lr1(cfg: RunConfig) -> int:
    g = _load_grammar(cfg.inputs[0])
    m = build_lr1(g)
    _emit(dump_automaton(m), cfg.output)
    s = grammar_stats(g)
    _info(f"{len(m.states)} states, {len(m.conflicts())} conflicts; "
          f"{s.n_nonterminals} nonterminals, {s.n_terminals} terminals, "
          f"{s.n_productions} productions")
    return 0


def _cmd_lr0(cfg: RunConfig) -> int:
    g = _load_grammar(cfg.inputs[0])
    m = build_lr0(g)
    _emit(dump_automaton(m), cfg.output)
    _info(f"{len(m.states)} states")
    return 0


def _cmd_lalr(cfg: RunConfig) -> int:
    m = build_lr1(_load_grammar(cfg.inputs[0]))
    merged, introduced = merge_all_similar(m)
    _emit(dump_automaton(merged), cfg.output)
    for entry in introduced:
        _info(str(entry))
    _info(f"{len(m.states)} -> {len(merged.states)} states, "
          f"{len(introduced)} conflicts introduced")
    return 1 if introduced else 0


def _cmd_minimize(cfg: RunConfig) -> int:
    m = build_lr1(_load_grammar(cfg.inputs[0]))
    if cfg.mode == "exact":
        scheme = minimize_exact(m, budget=cfg.budget)
    else:
        scheme = minimize_greedy(m, seed=cfg.seed)
    _emit(serialize_scheme(scheme), cfg.output)
    if cfg.dump is not None:
        cfg.dump.write_text(dump_automaton(apply_scheme(m, scheme)), encoding="utf-8")
    _info(f"{len(m.states)} states -> {len(scheme.blocks)} blocks ({cfg.mode})")
    return 0


def _cmd_conflict_graph(cfg: RunConfig) -> int:
    m = build_lr1(_load_grammar(cfg.inputs[0]))
    _emit(build_conflict_graph(m).to_dimacs(), cfg.output)
    return 0


def _cmd_reduce(cfg: RunConfig) -> int:
    f = parse_dimacs(cfg.inputs[0].read_text(encoding="utf-8"))
    grammar, trace = graph_to_grammar(f)
    _emit(serialize_grammar(grammar), cfg.output)
    if cfg.trace is not None:
        cfg.trace.write_text(serialize_trace(trace), encoding="utf-8")
    if cfg.verify:
        report = verify_reduction(f)
        for line in report.render().splitlines():
            _info(line)
        return 0 if report.all_passed else 1
    return 0


def _cmd_recover(cfg: RunConfig) -> int:
    f = parse_dimacs(cfg.inputs[0].read_text(encoding="utf-8"))
    grammar, _ = graph_to_grammar(f)
    m = build_lr1(grammar)
    mapping = state_node_mapping(f, m)
    scheme = parse_scheme(cfg.scheme.read_text(encoding="utf-8"))
    violations = validate_scheme(m, scheme)
    if violations:
        raise InvalidSchemeError(violations)
    coloring = recover_coloring(scheme, mapping)
    _emit(serialize_coloring(coloring), cfg.output)
    _info(f"{coloring.k} colors")
    return 0


def _cmd_oracle_color(cfg: RunConfig) -> int:
    f = parse_dimacs(cfg.inputs[0].read_text(encoding="utf-8"))
    k, coloring = chromatic_oracle(f, limit=cfg.limit)
    _emit(serialize_coloring(coloring), cfg.output)
    _info(f"chromatic number {k}")
    return 0


def _cmd_verify(cfg: RunConfig) -> int:
    paths: list[Path] = []
    for p in cfg.inputs:
        if p.is_dir():
            paths.extend(sorted(p.glob("*.col")))
        else:
            paths.append(p)
    if not paths:
        raise DimacsError("no instances to verify")
    ok = True
    out_lines = []
    for path in paths:
        report = verify_reduction(parse_dimacs(path.read_text(encoding="utf-8")),
                                  oracle_limit=cfg.limit)
        out_lines.append(f"== {path}")
        out_lines.append(report.render().rstrip("\n"))
        ok = ok and report.all_passed
    _emit("\n".join(out_lines) + "\n", cfg.output)
    return 0 if ok else 1


def _cmd_dot(cfg: RunConfig) -> int:
    m = build_lr1(_load_grammar(cfg.inputs[0]))
    _emit(export_dot(m, show_items=cfg.show_items), cfg.output)
    return 0


def _cmd_stats(cfg: RunConfig) -> int:
    s = grammar_stats(_load_grammar(cfg.inputs[0]))
    _emit(f"nonterminals {s.n_nonterminals}\nterminals {s.n_terminals}\n"
          f"productions {s.n_productions}\n", cfg.output)
    return 0


_HANDLERS = {
    "lr1": _cmd_lr1,
    "lr0": _cmd_lr0,
    "lalr": _cmd_lalr,
    "minimize": _cmd_minimize,
    "conflict-graph": _cmd_conflict_graph,
    "reduce": _cmd_reduce,
    "recover": _cmd_recover,
    "oracle-color": _cmd_oracle_color,
    "verify": _cmd_verify,
    "dot": _cmd_dot,
    "stats": _cmd_stats,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lrmin",
        description="LR(1) machines, similar-state merging, and graph-coloring reductions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def grammar_cmd(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("grammar", type=Path, help="grammar file")
        p.add_argument("-o", "--output", type=Path, default=None)
        return p

    def graph_cmd(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("graph", type=Path, help="DIMACS .col file")
        p.add_argument("-o", "--output", type=Path, default=None)
        return p

    grammar_cmd("lr1", "build the canonical LR(1) machine and dump it")
    grammar_cmd("lr0", "build the LR(0) machine and dump it")
    grammar_cmd("lalr", "merge every pair of similar states and report conflicts")

    p = grammar_cmd("minimize", "compute a merge scheme and the minimized machine")
    p.add_argument("--mode", choices=("exact", "greedy"), default="exact")
    p.add_argument("--budget", type=int, default=24, help="exact-search node limit")
    p.add_argument("--seed", type=int, default=0, help="greedy shuffle seed")
    p.add_argument("--dump", type=Path, default=None, help="write the minimized machine here")

    grammar_cmd("conflict-graph", "emit the machine's conflict graph as DIMACS")

    p = graph_cmd("reduce", "generate the grammar encoding a coloring instance")
    p.add_argument("--trace", type=Path, default=None, help="write the generation trace here")
    p.add_argument("--verify", action="store_true", help="run the end-to-end checks too")

    p = graph_cmd("recover", "turn a merge scheme back into a node coloring")
    p.add_argument("--scheme", type=Path, required=True, help="scheme file for the generated machine")

    p = graph_cmd("oracle-color", "brute-force chromatic number and witness coloring")
    p.add_argument("--limit", type=int, default=12)

    p = sub.add_parser("verify", help="end-to-end checks for instances or directories of them")
    p.add_argument("graphs", type=Path, nargs="+", help=".col files or directories")
    p.add_argument("--limit", type=int, default=12)
    p.add_argument("-o", "--output", type=Path, default=None)

    p = grammar_cmd("dot", "emit the LR(1) machine as Graphviz DOT")
    p.add_argument("--show-items", action="store_true")

    grammar_cmd("stats", "print grammar size counts")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.command == "verify":
        inputs = tuple(args.graphs)
    elif hasattr(args, "grammar"):
        inputs = (args.grammar,)
    else:
        inputs = (args.graph,)
    return RunConfig(
        command=args.command,
        inputs=inputs,
        output=getattr(args, "output", None),
        mode=getattr(args, "mode", "exact"),
        budget=getattr(args, "budget", 24),
        seed=getattr(args, "seed", 0),
        show_items=getattr(args, "show_items", False),
        verify=getattr(args, "verify", False),
        scheme=getattr(args, "scheme", None),
        trace=getattr(args, "trace", None),
        dump=getattr(args, "dump", None),
        limit=getattr(args, "limit", 12),
    )


def run(config: RunConfig) -> int:
    return _HANDLERS[config.command](config)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return run(_config_from_args(args))
    except (GrammarError, CyclicGrammarError, DimacsError, SchemeFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConflictError, BudgetExceeded, InvalidSchemeError, ReductionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def cli_main() -> None:
    sys.exit(main())
