"""Merge schemes: shrinking conflict-free LR(1) machines by merging similar states.

A merge scheme is a partition of the machine's states in which every block
is pairwise similar, the pooled lookaheads stay conflict-free, and the
per-symbol successors of a block all land in a single block (otherwise the
quotient machine would stop being deterministic).  Exact minimization runs
a backtracking search over the machine's conflict graph; a brute-force
partition enumeration is kept alongside as an independent oracle for it.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional

from .automaton import (Automaton, ConflictEntry, ConflictError, ItemCore, LrState,
                        MergeError, _tables, detect_conflicts, merge_block,
                        similarity_classes)


class BudgetExceeded(ValueError):
    """Search refused: the instance is larger than the caller's limit."""


class SchemeFormatError(ValueError):
    """Malformed scheme file text."""


class Violation(NamedTuple):
    kind: str  # "coverage" | "similarity" | "conflict" | "congruence"
    block: tuple[int, ...]
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} violation in block {list(self.block)}: {self.detail}"


class InvalidSchemeError(ValueError):
    def __init__(self, violations: Iterable[Violation]):
        violations = tuple(violations)
        head = "; ".join(str(v) for v in violations[:3])
        super().__init__(f"invalid merge scheme: {head}")
        self.violations = violations


@dataclass(frozen=True)
class MergeScheme:
    """A partition of all state ids; blocks are sorted tuples, sorted by head."""

    blocks: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_blocks(blocks: Iterable[Iterable[int]]) -> "MergeScheme":
        norm = sorted(tuple(sorted(set(b))) for b in blocks if b)
        return MergeScheme(tuple(norm))

    def block_of(self) -> dict[int, int]:
        """State id -> index of its block."""
        return {s: i for i, b in enumerate(self.blocks) for s in b}

    def count_over(self, states: Iterable[int]) -> int:
        """Number of blocks touching the given states."""
        of = self.block_of()
        return len({of[s] for s in states})


def serialize_scheme(scheme: MergeScheme) -> str:
    return "\n".join(",".join(str(s) for s in b) for b in scheme.blocks) + "\n"


def parse_scheme(text: str) -> MergeScheme:
    blocks = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        try:
            ids = [int(part) for part in line.split(",")]
        except ValueError:
            raise SchemeFormatError(f"line {lineno}: expected comma-separated state ids")
        if len(set(ids)) != len(ids):
            raise SchemeFormatError(f"line {lineno}: repeated state id")
        blocks.append(ids)
    if not blocks:
        raise SchemeFormatError("empty scheme")
    return MergeScheme.from_blocks(blocks)


@dataclass(frozen=True)
class ClosureResult:
    forced: tuple[tuple[int, int], ...]  # pairs that must co-merge, sorted
    verdict: str                         # "mergeable" | "blocked"
    reason: Optional[str] = None         # "dissimilar" | "conflict"
    witness: Optional[tuple[int, int]] = None

    @property
    def mergeable(self) -> bool:
        return self.verdict == "mergeable"


@dataclass(frozen=True)
class ConflictGraph:
    """Non-singleton similar states, with an edge where a pair cannot merge."""

    nodes: tuple[int, ...]               # state ids, ascending
    edges: frozenset[tuple[int, int]]    # unordered pairs (u, v) with u < v

    def to_dimacs(self) -> str:
        pos = {s: i + 1 for i, s in enumerate(self.nodes)}
        lines = [f"p edge {len(self.nodes)} {len(self.edges)}"]
        lines += [f"e {pos[u]} {pos[v]}" for u, v in sorted(self.edges)]
        return "\n".join(lines) + "\n"


def _require_conflict_free(m: Automaton) -> None:
    bad = m.conflicts()
    if bad:
        raise ConflictError(bad)


def congruence_close(m: Automaton, u: int, v: int) -> ClosureResult:
    """Every state pair dragged along when u and v merge, or why they cannot.

    Merging two states forces their per-symbol successors together, and so
    on transitively; the verdict is blocked as soon as a forced pair is
    dissimilar or its pooled lookaheads conflict.
    """
    seed = (u, v) if u <= v else (v, u)
    seen = {seed}
    queue = deque([seed])
    while queue:
        a, b = queue.popleft()
        if a == b:
            continue
        if m.states[a].core_key() != m.states[b].core_key():
            return ClosureResult(tuple(sorted(seen)), "blocked", "dissimilar", (a, b))
        merged = merge_block(m, (a, b))
        if detect_conflicts(merged, m.grammar):
            return ClosureResult(tuple(sorted(seen)), "blocked", "conflict", (a, b))
        for sym, da in m.out_edges[a]:
            db = m.transitions[(b, sym)]  # similar states share outgoing symbols
            if da != db:
                nxt = (da, db) if da <= db else (db, da)
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return ClosureResult(tuple(sorted(seen)), "mergeable")


def pair_mergeable(m: Automaton, u: int, v: int) -> bool:
    """True when u and v are similar and their congruence closure stays clean."""
    if u == v:
        return True
    if m.states[u].core_key() != m.states[v].core_key():
        return False
    return congruence_close(m, u, v).mergeable


def build_conflict_graph(m: Automaton) -> ConflictGraph:
    _require_conflict_free(m)
    sc = similarity_classes(m)
    nodes = sorted(s for c in sc.non_singletons for s in c)
    edges = set()
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            if not pair_mergeable(m, nodes[i], nodes[j]):
                edges.add((nodes[i], nodes[j]))
    return ConflictGraph(tuple(nodes), frozenset(edges))


# -- a union-find that understands merging -------------------------------------------

class _Merger:
    """Union-find over state ids with merge-validity checks and rollback.

    Unioning two classes verifies similarity and pooled-lookahead
    conflict-freeness, then recursively unions per-symbol successors, so the
    represented partition always remains a candidate merge scheme.  A failed
    union leaves a partial trail; callers roll back to their snapshot.
    """

    def __init__(self, m: Automaton):
        self.m = m
        self.parent: dict[int, int] = {}
        self.la: dict[int, dict[tuple[int, int], int]] = {}
        self.trail: list[tuple[str, int, Optional[dict]]] = []
        self._tab = _tables(m.grammar)
        self._base: dict[int, dict[tuple[int, int], int]] = {}
        self._completed: dict[int, tuple[tuple[int, int], ...]] = {}
        self._shift: dict[int, int] = {}
        self._core: dict[int, tuple[ItemCore, ...]] = {}

    def _prep(self, s: int) -> None:
        if s in self._base:
            return
        st = self.m.states[s]
        self._core[s] = st.core_key()
        self._base[s] = {(i.production, i.dot): i.lookahead for i in st.items}
        comp = []
        shift = 0
        for i in st.items:
            rhs = self._tab.rhs[i.production]
            if i.dot == len(rhs):
                comp.append((i.production, i.dot))
            else:
                sym = rhs[i.dot]
                if not self._tab.is_nt[sym]:
                    shift |= self._tab.term_bit[sym]
        self._completed[s] = tuple(comp)
        self._shift[s] = shift

    def find(self, s: int) -> int:
        parent = self.parent
        while s in parent:
            s = parent[s]
        return s

    def snapshot(self) -> int:
        return len(self.trail)

    def rollback(self, mark: int) -> None:
        while len(self.trail) > mark:
            kind, key, old = self.trail.pop()
            if kind == "parent":
                del self.parent[key]
            elif old is None:
                self.la.pop(key, None)
            else:
                self.la[key] = old

    def _la_of(self, root: int) -> dict[tuple[int, int], int]:
        got = self.la.get(root)
        if got is not None:
            return got
        self._prep(root)
        return self._base[root]

    def _conflicted(self, root: int, la_map: dict[tuple[int, int], int]) -> bool:
        acc = dup = 0
        for core in self._completed[root]:
            x = la_map[core]
            dup |= acc & x
            acc |= x
        return bool(dup) or bool(self._shift[root] & acc)

    def union(self, a: int, b: int) -> bool:
        work = [(a, b)]
        while work:
            x, y = work.pop()
            rx, ry = self.find(x), self.find(y)
            if rx == ry:
                continue
            self._prep(rx)
            self._prep(ry)
            if self._core[rx] != self._core[ry]:
                return False
            lax, lay = self._la_of(rx), self._la_of(ry)
            merged = {core: mask | lay[core] for core, mask in lax.items()}
            if self._conflicted(rx, merged):
                return False
            self.trail.append(("parent", ry, None))
            self.parent[ry] = rx
            self.trail.append(("la", rx, self.la.get(rx)))
            self.la[rx] = merged
            # successors of any one member stand for the whole class
            for sym, dx in self.m.out_edges[rx]:
                work.append((dx, self.m.transitions[(ry, sym)]))
        return True


def _full_scheme(m: Automaton, node_blocks: Iterable[Iterable[int]]) -> MergeScheme:
    grouped = [tuple(b) for b in node_blocks]
    taken = {s for b in grouped for s in b}
    singles = [(s,) for s in range(len(m.states)) if s not in taken]
    return MergeScheme.from_blocks(list(grouped) + singles)


def minimize_exact(m: Automaton, budget: int = 24) -> MergeScheme:
    """A provably minimum merge scheme, by backtracking over conflict-graph nodes.

    Nodes are assigned lowest-id-first to the first compatible block, with
    branch-and-bound on the running block count; the first optimum found
    under that deterministic order is returned.  Several distinct minimum
    schemes may exist; this picks the search order's least one.
    """
    _require_conflict_free(m)
    graph = build_conflict_graph(m)
    nodes = list(graph.nodes)
    if len(nodes) > budget:
        raise BudgetExceeded(
            f"{len(nodes)} conflict-graph nodes exceed the budget of {budget}; "
            f"use minimize_greedy instead")
    merger = _Merger(m)
    best: Optional[list[tuple[int, ...]]] = None
    best_count = len(nodes) + 1
    # Counting blocks already used is a sound bound only when later unions
    # cannot fuse existing blocks behind our back, i.e. when no node has
    # successors to propagate through.
    can_prune = all(not m.out_edges[v] for v in nodes)

    def anchors_before(i: int) -> list[int]:
        seen: set[int] = set()
        out = []
        for u in nodes[:i]:
            r = merger.find(u)
            if r not in seen:
                seen.add(r)
                out.append(u)
        return out

    def rec(i: int) -> None:
        nonlocal best, best_count
        if i == len(nodes):
            groups: dict[int, list[int]] = {}
            for v in nodes:
                groups.setdefault(merger.find(v), []).append(v)
            if len(groups) < best_count:
                best_count = len(groups)
                best = [tuple(b) for b in groups.values()]
            return
        anchors = anchors_before(i)
        if can_prune and len(anchors) >= best_count:
            return
        v = nodes[i]
        rv = merger.find(v)
        if any(merger.find(u) == rv for u in anchors):
            rec(i + 1)  # already dragged into an earlier block
            return
        for u in anchors:
            mark = merger.snapshot()
            if merger.union(u, v):
                rec(i + 1)
            merger.rollback(mark)
        rec(i + 1)  # v opens its own block

    rec(0)
    return _full_scheme(m, best or [])


def minimize_greedy(m: Automaton, seed: int = 0) -> MergeScheme:
    """First-fit block growth over a seeded shuffle of the conflict-graph nodes.

    Always sound (the result passes validate_scheme) but only the exact
    search guarantees minimality.  Deterministic for a fixed seed.
    """
    _require_conflict_free(m)
    graph = build_conflict_graph(m)
    order = list(graph.nodes)
    random.Random(seed).shuffle(order)
    merger = _Merger(m)
    anchors: list[int] = []  # first state placed in each block, creation order
    for v in order:
        rv = merger.find(v)
        if any(merger.find(u) == rv for u in anchors):
            continue
        placed = False
        for u in anchors:
            mark = merger.snapshot()
            if merger.union(u, v):
                placed = True
                break
            merger.rollback(mark)
        if not placed:
            anchors.append(v)
    groups: dict[int, list[int]] = {}
    for v in graph.nodes:
        groups.setdefault(merger.find(v), []).append(v)
    return _full_scheme(m, groups.values())


def enumerate_schemes_oracle(m: Automaton, limit: int = 10) -> int:
    """Minimum block count over the similar states, by trying every partition.

    Deliberately brute force, sharing no search machinery with
    minimize_exact: set partitions are enumerated outright and each is
    checked against the merge-scheme conditions.
    """
    _require_conflict_free(m)
    sc = similarity_classes(m)
    nodes = sorted(s for c in sc.non_singletons for s in c)
    if len(nodes) > limit:
        raise BudgetExceeded(f"{len(nodes)} similar states exceed the oracle limit of {limit}")
    if not nodes:
        return 0
    g = m.grammar
    best = len(nodes)

    def block_ok(block: list[int]) -> bool:
        try:
            merged = merge_block(m, block)
        except MergeError:
            return False
        return not detect_conflicts(merged, g)

    def congruent(blocks: list[list[int]]) -> bool:
        owner: dict[int, object] = {s: i for i, b in enumerate(blocks) for s in b}
        for b in blocks:
            if len(b) < 2:
                continue
            for sym, _ in m.out_edges[b[0]]:
                targets = {owner.get(m.transitions[(s, sym)], -m.transitions[(s, sym)] - 1)
                           for s in b}
                if len(targets) > 1:
                    return False
        return True

    blocks: list[list[int]] = []

    def rec(i: int) -> None:
        nonlocal best
        if i == len(nodes):
            if congruent(blocks):
                best = min(best, len(blocks))
            return
        v = nodes[i]
        for b in blocks:
            b.append(v)
            if block_ok(b):
                rec(i + 1)
            b.pop()
        blocks.append([v])
        rec(i + 1)
        blocks.pop()

    rec(0)
    return best


def validate_scheme(m: Automaton, scheme: MergeScheme) -> tuple[Violation, ...]:
    """Every way the scheme fails to be a merge scheme; empty means ok."""
    out: list[Violation] = []
    covered = sorted(s for b in scheme.blocks for s in b)
    if covered != list(range(len(m.states))):
        return (Violation("coverage", (),
                          f"blocks cover {len(covered)} slots for {len(m.states)} states"),)
    owner = scheme.block_of()
    for b in scheme.blocks:
        if len(b) < 2:
            continue
        key = m.states[b[0]].core_key()
        mismatched = [s for s in b[1:] if m.states[s].core_key() != key]
        if mismatched:
            out.append(Violation("similarity", b,
                                 f"states {b[0]} and {mismatched[0]} differ in item cores"))
            continue
        entries = detect_conflicts(merge_block(m, b), m.grammar)
        if entries:
            e = entries[0]
            out.append(Violation("conflict", b,
                                 f"{e.kind} on {e.terminal!r} after pooling lookaheads"))
        for sym, _ in m.out_edges[b[0]]:
            targets = {owner[m.transitions[(s, sym)]] for s in b}
            if len(targets) > 1:
                out.append(Violation(
                    "congruence", b,
                    f"successors on {m.grammar.name(sym)!r} fall into different blocks"))
    return tuple(out)


def _quotient(m: Automaton, blocks: Iterable[Iterable[int]]) -> Automaton:
    """Quotient machine over the given partition, renumbered breadth-first."""
    blocks = [tuple(sorted(b)) for b in blocks]
    owner = {s: i for i, b in enumerate(blocks) for s in b}
    merged = [merge_block(m, b) for b in blocks]
    moves: dict[tuple[int, int], int] = {}
    for (src, sym), dst in m.transitions.items():
        key = (owner[src], sym)
        target = owner[dst]
        # congruence makes the member choice irrelevant
        assert moves.setdefault(key, target) == target, "quotient would be nondeterministic"
    adj: dict[int, list[tuple[int, int]]] = {}
    for (b, sym), target in moves.items():
        adj.setdefault(b, []).append((sym, target))
    for lst in adj.values():
        lst.sort()
    start = owner[m.start_state]
    new_id = {start: 0}
    order = [start]
    cursor = 0
    while cursor < len(order):
        cur = order[cursor]
        cursor += 1
        for _, target in adj.get(cur, ()):
            if target not in new_id:
                new_id[target] = len(order)
                order.append(target)
    assert len(new_id) == len(blocks), "unreachable block in quotient"
    states = tuple(LrState(new_id[b], merged[b].items)
                   for b in sorted(new_id, key=new_id.get))
    transitions = {(new_id[b], sym): new_id[target] for (b, sym), target in moves.items()}
    return Automaton(m.grammar, states, transitions)


def apply_scheme(m: Automaton, scheme: MergeScheme) -> Automaton:
    """Quotient machine with one state per block; refuses invalid schemes."""
    violations = validate_scheme(m, scheme)
    if violations:
        raise InvalidSchemeError(violations)
    return _quotient(m, scheme.blocks)


def merge_all_similar(m: Automaton) -> tuple[Automaton, tuple[ConflictEntry, ...]]:
    """Quotient by full similarity classes; reports the conflicts merging added.

    An empty report means every similar pair merges cleanly, i.e. the
    grammar's machine collapses all the way without losing determinism.
    """
    sc = similarity_classes(m)
    merged = _quotient(m, sc.classes)
    had = {(e.kind, e.terminal, e.items) for e in m.conflicts()}
    introduced = tuple(e for e in merged.conflicts()
                       if (e.kind, e.terminal, e.items) not in had)
    return merged, introduced
