"""From an undirected graph to a grammar whose LR(1) machine mirrors its coloring.

``graph_to_grammar`` grows the grammar one node at a time.  Node indices
become integer terminals, each node contributes a pair of fresh
nonterminals deriving "@", and one trailing terminal is shared between two
chain rules exactly when the corresponding nodes are joined by an edge.
The machine then contains one reduce state per node, all similar to one
another, and two of them collide exactly on the planted shared terminals:
its conflict graph reproduces the input graph, so merge schemes of the
machine correspond one-to-one with proper colorings.

A brute-force chromatic-number oracle and an end-to-end verifier close the
loop at desk scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .automaton import Automaton, build_lr1, similarity_classes
from .grammar import Grammar, grammar_stats
from .minimize import (BudgetExceeded, MergeScheme, build_conflict_graph,
                       minimize_exact)


class DimacsError(ValueError):
    """Malformed DIMACS graph text."""


class ReductionError(ValueError):
    """A generated machine does not have the expected shape."""


@dataclass(frozen=True)
class ColorGraph:
    """Undirected graph on nodes 1..n with normalized (u < v) edges."""

    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (1 <= u < v <= self.n):
                raise ValueError(f"edge ({u}, {v}) out of range or unordered")

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges


def color_graph(n: int, edges: Iterable[tuple[int, int]]) -> ColorGraph:
    return ColorGraph(n, frozenset((min(u, v), max(u, v)) for u, v in edges))


def parse_dimacs(text: str) -> ColorGraph:
    """DIMACS .col: one "p edge n m" line, "e i j" edges, "c" comments."""
    n: Optional[int] = None
    edges: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            if n is not None:
                raise DimacsError(f"line {lineno}: duplicate problem line")
            if len(parts) != 4 or parts[1] != "edge":
                raise DimacsError(f"line {lineno}: expected 'p edge <nodes> <edges>'")
            try:
                n = int(parts[2])
                int(parts[3])
            except ValueError:
                raise DimacsError(f"line {lineno}: node/edge counts must be integers")
            if n < 0:
                raise DimacsError(f"line {lineno}: negative node count")
        elif parts[0] == "e":
            if n is None:
                raise DimacsError(f"line {lineno}: edge before the problem line")
            if len(parts) != 3:
                raise DimacsError(f"line {lineno}: expected 'e <node> <node>'")
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise DimacsError(f"line {lineno}: edge endpoints must be integers")
            if u == v:
                raise DimacsError(f"line {lineno}: self-loop on node {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise DimacsError(f"line {lineno}: edge endpoint out of range 1..{n}")
            edges.add((min(u, v), max(u, v)))
        else:
            raise DimacsError(f"line {lineno}: unrecognized line kind {parts[0]!r}")
    if n is None:
        raise DimacsError("missing problem line")
    return ColorGraph(n, frozenset(edges))


def to_dimacs(f: ColorGraph) -> str:
    lines = [f"p edge {f.n} {len(f.edges)}"]
    lines += [f"e {u} {v}" for u, v in sorted(f.edges)]
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Coloring:
    """A partition of the node set; proper when no edge stays inside a block."""

    blocks: tuple[tuple[int, ...], ...]

    @property
    def k(self) -> int:
        return len(self.blocks)

    def color_of(self) -> dict[int, int]:
        return {node: i for i, b in enumerate(self.blocks) for node in b}

    def is_proper(self, f: ColorGraph) -> bool:
        of = self.color_of()
        if sorted(of) != list(range(1, f.n + 1)):
            return False
        return all(of[u] != of[v] for u, v in f.edges)


def serialize_coloring(c: Coloring) -> str:
    return "\n".join(" ".join(str(node) for node in b) for b in c.blocks) + "\n"


def parse_coloring(text: str) -> Coloring:
    blocks = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        try:
            blocks.append(tuple(sorted(int(p) for p in line.split())))
        except ValueError:
            raise DimacsError(f"line {lineno}: expected space-separated node indices")
    return Coloring(tuple(sorted(blocks)))


@dataclass(frozen=True)
class NodeStateMap:
    """states[i] is the machine's reduce state standing for node i+1."""

    states: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.states)

    def state_of(self, node: int) -> int:
        return self.states[node - 1]

    def node_of(self) -> dict[int, int]:
        return {s: i + 1 for i, s in enumerate(self.states)}


@dataclass(frozen=True)
class IterationRecord:
    node: int
    nonterminals: tuple[str, ...]
    terminals: tuple[str, ...]
    rules: tuple[tuple[str, tuple[str, ...]], ...]
    back_edges: int  # edges from this node to earlier nodes


@dataclass(frozen=True)
class GenTrace:
    iterations: tuple[IterationRecord, ...]        # the first record covers the 2-node seed
    generated_nonterminals: tuple[str, ...]        # creation order; all but the 2 fixed ones


def serialize_trace(trace: GenTrace) -> str:
    lines = []
    for rec in trace.iterations:
        tag = f"node={rec.node}"
        lines += [f"{tag} nonterminal {nm}" for nm in rec.nonterminals]
        lines += [f"{tag} terminal {nm}" for nm in rec.terminals]
        lines += [f"{tag} rule {lhs} ::= {' '.join(rhs)}" for lhs, rhs in rec.rules]
        lines.append(f"{tag} back-edges {rec.back_edges}")
    return "\n".join(lines) + "\n"


def graph_to_grammar(f: ColorGraph) -> tuple[Grammar, GenTrace]:
    """Grammar whose machine has one reduce state per node and one conflict per edge.

    For n nodes and e edges the result always has 2n nonterminals,
    2n^2-n+2-e terminals and 2n^2-1 productions; each extension step for
    node k adds 2 nonterminals, 4k-3-(back edges of k) terminals and 4k-2
    productions.
    """
    if f.n < 2:
        raise ReductionError("grammar generation needs at least two nodes")
    counter = 0

    def fresh() -> str:
        nonlocal counter
        counter += 1
        return f"t{counter}"

    # trailing terminal of the chain rule (S ::= node pair_nt tail), per node
    tail: dict[int, dict[str, str]] = {1: {}, 2: {}}
    pair_nts = ["X2", "Y2"]
    x2, y2 = pair_nts
    records = []

    # the two seed nodes share one tail terminal exactly when they are joined
    tail[1][x2] = fresh()
    tail[1][y2] = fresh()
    tail[2][x2] = fresh()
    tail[2][y2] = tail[1][x2] if f.has_edge(1, 2) else fresh()
    seed_rules = (
        ("P", ("S", "$")),
        ("S", ("1", x2, tail[1][x2])),
        ("S", ("1", y2, tail[1][y2])),
        ("S", ("2", x2, tail[2][x2])),
        ("S", ("2", y2, tail[2][y2])),
        (x2, ("@",)),
        (y2, ("@",)),
    )
    seed_terms = ["$", "1", "2", "@", tail[1][x2], tail[1][y2], tail[2][x2]]
    if not f.has_edge(1, 2):
        seed_terms.append(tail[2][y2])
    records.append(IterationRecord(2, ("P", "S", x2, y2), tuple(seed_terms),
                                   seed_rules, int(f.has_edge(1, 2))))

    for node in range(3, f.n + 1):
        a, b = f"X{node}", f"Y{node}"
        tail[node] = {}
        terms = [str(node)]
        rules: list[tuple[str, tuple[str, ...]]] = []
        phi, omega = fresh(), fresh()
        terms += [phi, omega]
        tail[node][a] = phi
        tail[node][b] = omega
        rules += [("S", (str(node), a, phi)), ("S", (str(node), b, omega)),
                  (a, ("@",)), (b, ("@",))]
        for nt in pair_nts:
            psi = fresh()
            terms.append(psi)
            tail[node][nt] = psi
            rules.append(("S", (str(node), nt, psi)))
        back = 0
        for prev in range(1, node):
            rho = fresh()
            terms.append(rho)
            tail[prev][b] = rho
            rules.append(("S", (str(prev), b, rho)))
            if f.has_edge(prev, node):
                # reusing omega plants the reduce-reduce collision for this edge
                back += 1
                tail[prev][a] = omega
                rules.append(("S", (str(prev), a, omega)))
            else:
                tau = fresh()
                terms.append(tau)
                tail[prev][a] = tau
                rules.append(("S", (str(prev), a, tau)))
        pair_nts += [a, b]
        records.append(IterationRecord(node, (a, b), tuple(terms), tuple(rules), back))

    # grammar text groups the chain rules by their leading node terminal
    rule_list: list[tuple[str, tuple[str, ...]]] = [("P", ("S", "$"))]
    for node in range(1, f.n + 1):
        for nt in pair_nts:
            rule_list.append(("S", (str(node), nt, tail[node][nt])))
    for nt in pair_nts:
        rule_list.append((nt, ("@",)))
    grammar = Grammar.from_rules(rule_list)
    return grammar, GenTrace(tuple(records), tuple(pair_nts))


def state_node_mapping(f: ColorGraph, m: Automaton) -> NodeStateMap:
    """Locate each node's reduce state: the one reached by shifting "node @"."""
    sc = similarity_classes(m)
    big = sc.non_singletons
    if len(big) != 1 or len(big[0]) != f.n:
        raise ReductionError(
            f"expected one similar class of size {f.n}, found sizes {[len(c) for c in big]}")
    states = []
    for node in range(1, f.n + 1):
        try:
            s = m.walk([str(node), "@"])
        except ValueError as exc:
            raise ReductionError(str(exc)) from exc
        if s not in big[0]:
            raise ReductionError(f"state for node {node} is outside the similar class")
        states.append(s)
    if len(set(states)) != f.n:
        raise ReductionError("node states are not distinct")
    return NodeStateMap(tuple(states))


def recover_coloring(scheme: MergeScheme, mapping: NodeStateMap) -> Coloring:
    """Pull the scheme's blocks back through the node/state correspondence."""
    of = scheme.block_of()
    groups: dict[int, list[int]] = {}
    for node in range(1, mapping.n + 1):
        groups.setdefault(of[mapping.state_of(node)], []).append(node)
    return Coloring(tuple(sorted(tuple(b) for b in groups.values())))


def chromatic_oracle(f: ColorGraph, limit: int = 12) -> tuple[int, Coloring]:
    """Exact chromatic number by backtracking, with new-color symmetry breaking.

    Node i may only open color max-used+1, so each coloring class is tried
    once; independent of the machine pipeline by construction.
    """
    if f.n > limit:
        raise BudgetExceeded(f"{f.n} nodes exceed the oracle limit of {limit}")
    neighbours: dict[int, list[int]] = {u: [] for u in range(1, f.n + 1)}
    for u, v in f.edges:
        neighbours[u].append(v)
        neighbours[v].append(u)
    color = [0] * (f.n + 1)

    def place(node: int, used: int, k: int) -> bool:
        if node > f.n:
            return True
        for c in range(1, min(used + 1, k) + 1):
            if all(color[w] != c for w in neighbours[node] if w < node):
                color[node] = c
                if place(node + 1, max(used, c), k):
                    return True
        color[node] = 0
        return False

    for k in range(1, f.n + 1):
        if place(1, 0, k):
            blocks: dict[int, list[int]] = {}
            for node in range(1, f.n + 1):
                blocks.setdefault(color[node], []).append(node)
            return k, Coloring(tuple(sorted(tuple(b) for b in blocks.values())))
    raise AssertionError("n colors always suffice")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ReductionReport:
    graph: ColorGraph
    colors: int
    checks: tuple[CheckResult, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        lines = [f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}"
                 for c in self.checks]
        return "\n".join(lines) + "\n"


def verify_reduction(f: ColorGraph, oracle_limit: int = 12) -> ReductionReport:
    """End-to-end consistency of the pipeline on one graph.

    Checks, in order: the generated grammar's size laws, the machine's size
    law, equality of the machine's conflict graph with the input graph, and
    agreement of the exact minimizer with the chromatic-number oracle
    (including that the recovered coloring is proper).
    """
    grammar, _ = graph_to_grammar(f)
    machine = build_lr1(grammar)
    mapping = state_node_mapping(f, machine)
    n, e = f.n, len(f.edges)
    checks = []

    stats = grammar_stats(grammar)
    want = (2 * n, 2 * n * n - n + 2 - e, 2 * n * n - 1)
    checks.append(CheckResult("grammar-size", tuple(stats) == want,
                              f"got {tuple(stats)}, want {want}"))

    want_states = 4 * n * n - 2 * n + 3
    checks.append(CheckResult("machine-size", len(machine.states) == want_states,
                              f"got {len(machine.states)} states, want {want_states}"))

    graph_cg = build_conflict_graph(machine)
    node_of = mapping.node_of()
    mapped_edges = {tuple(sorted((node_of[u], node_of[v]))) for u, v in graph_cg.edges}
    nodes_ok = set(graph_cg.nodes) == set(mapping.states)
    checks.append(CheckResult(
        "conflict-graph", nodes_ok and mapped_edges == set(f.edges),
        f"{len(graph_cg.nodes)} nodes, {len(graph_cg.edges)} edges vs {len(f.edges)} input edges"))

    k, _ = chromatic_oracle(f, oracle_limit)
    scheme = minimize_exact(machine)
    machine_k = scheme.count_over(mapping.states)
    recovered = recover_coloring(scheme, mapping)
    checks.append(CheckResult(
        "minimum-blocks", machine_k == k and recovered.k == k and recovered.is_proper(f),
        f"minimizer keeps {machine_k} states, chromatic number {k}"))

    return ReductionReport(f, k, tuple(checks))
