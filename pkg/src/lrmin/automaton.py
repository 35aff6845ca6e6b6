"""Canonical LR(1) and LR(0) state machines.

State identity is the full item set (cores and lookaheads) for LR(1) and
the core set for LR(0).  States are numbered breadth-first from the start
state, expanding transition symbols in grammar order, so two builds of the
same grammar produce bit-identical machines.

Lookahead sets are dense bitmasks over the grammar's terminals with one
extra top bit for the synthetic end-of-input marker.  Input is accepted
when the first production is reduced while the end marker is the next
token; no marker transition or dedicated accept state is materialized.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from .grammar import END_MARK, Grammar, Symbol, _first_tables


class MergeError(ValueError):
    """Attempt to merge states whose item cores differ."""

    def __init__(self, message: str, pair: Optional[tuple[int, int]] = None):
        super().__init__(message)
        self.pair = pair


class ConflictError(ValueError):
    """Raised by operations that require a conflict-free machine."""

    def __init__(self, entries: Sequence["ConflictEntry"]):
        head = "; ".join(str(e) for e in entries[:4])
        more = "" if len(entries) <= 4 else f" (+{len(entries) - 4} more)"
        super().__init__(f"machine has {len(entries)} conflict(s): {head}{more}")
        self.entries = tuple(entries)


class Item(NamedTuple):
    production: int
    dot: int
    lookahead: int  # bit i = terminal with dense index i; top bit = end marker


class ItemCore(NamedTuple):
    production: int
    dot: int


class ConflictEntry(NamedTuple):
    state: int
    terminal: str
    items: tuple[ItemCore, ItemCore]
    kind: str  # "reduce-reduce" | "shift-reduce"

    def __str__(self) -> str:
        a, b = self.items
        return (f"{self.kind} on {self.terminal!r} in state {self.state} "
                f"(items {a.production}.{a.dot} / {b.production}.{b.dot})")


class ParseResult(NamedTuple):
    accepted: bool
    position: Optional[int]  # index of the first offending token when rejected


@dataclass(frozen=True)
class LrState:
    id: int
    items: tuple[Item, ...]  # canonically ordered by (production, dot), cores unique

    def core_key(self) -> tuple[ItemCore, ...]:
        return tuple(ItemCore(i.production, i.dot) for i in self.items)


@dataclass(frozen=True, eq=False)
class Automaton:
    grammar: Grammar
    states: tuple[LrState, ...]
    transitions: dict[tuple[int, int], int]  # (state id, symbol id) -> state id
    start_state: int = 0
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @property
    def out_edges(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per state: (symbol id, target) pairs sorted by symbol."""
        got = self._cache.get("out")
        if got is None:
            per: list[list[tuple[int, int]]] = [[] for _ in self.states]
            for (src, sym), dst in self.transitions.items():
                per[src].append((sym, dst))
            got = tuple(tuple(sorted(lst)) for lst in per)
            self._cache["out"] = got
        return got

    def successor(self, state: int, symbol: int) -> Optional[int]:
        return self.transitions.get((state, symbol))

    def walk(self, tokens: Iterable[str]) -> int:
        """State reached from the start by shifting the named symbols."""
        cur = self.start_state
        for tok in tokens:
            sid = self.grammar.by_name.get(tok)
            nxt = None if sid is None else self.transitions.get((cur, sid))
            if nxt is None:
                raise ValueError(f"no transition on {tok!r} from state {cur}")
            cur = nxt
        return cur

    def conflicts(self) -> tuple[ConflictEntry, ...]:
        got = self._cache.get("conflicts")
        if got is None:
            got = tuple(e for st in self.states
                        for e in detect_conflicts(st, self.grammar))
            self._cache["conflicts"] = got
        return got

    def is_conflict_free(self) -> bool:
        return not self.conflicts()


# -- shared derived tables ------------------------------------------------------

class _Tables:
    """Per-grammar tables shared by the machine builders."""

    __slots__ = ("g", "end_bit", "full_mask", "rhs", "lhs", "prods_of",
                 "is_nt", "term_bit", "suffix")

    def __init__(self, g: Grammar):
        self.g = g
        self.end_bit = 1 << len(g.terminals)
        self.full_mask = (self.end_bit << 1) - 1
        self.rhs = [p.rhs for p in g.productions]
        self.lhs = [p.lhs for p in g.productions]
        self.prods_of = {sid: g.prods_of(sid) for sid in g.nonterminals}
        self.is_nt = [not s.terminal for s in g.symbols]
        self.term_bit = {sid: 1 << g.term_index[sid] for sid in g.terminals}
        first, nullable = _first_tables(g)
        # FIRST mask and nullability of every production suffix rhs[pos:]
        self.suffix: list[list[tuple[int, bool]]] = []
        for rhs in self.rhs:
            row: list[tuple[int, bool]] = [(0, True)] * (len(rhs) + 1)
            for pos in range(len(rhs) - 1, -1, -1):
                s = rhs[pos]
                tail_mask, tail_null = row[pos + 1]
                if nullable[s]:
                    row[pos] = (first[s] | tail_mask, tail_null)
                else:
                    row[pos] = (first[s], False)
            self.suffix.append(row)


def _tables(g: Grammar) -> _Tables:
    got = g._cache.get("lr_tables")
    if got is None:
        got = _Tables(g)
        g._cache["lr_tables"] = got
    return got


def lookahead_names(g: Grammar, mask: int) -> tuple[str, ...]:
    """Terminal names in the mask, in dense-index order, end marker last."""
    names = [g.name(sid) for sid in g.terminals if mask >> g.term_index[sid] & 1]
    if mask >> len(g.terminals) & 1:
        names.append(END_MARK)
    return tuple(names)


# -- construction ----------------------------------------------------------------

def _close(seed: Iterable[tuple[int, int, int]], t: _Tables) -> tuple[Item, ...]:
    la: dict[tuple[int, int], int] = {}
    pending: deque[tuple[int, int, int]] = deque()

    def add(p: int, d: int, mask: int) -> None:
        cur = la.get((p, d), 0)
        new_bits = mask & ~cur
        if new_bits:
            la[(p, d)] = cur | new_bits
            pending.append((p, d, new_bits))

    for p, d, m in seed:
        add(p, d, m)
    while pending:
        p, d, delta = pending.popleft()
        rhs = t.rhs[p]
        if d == len(rhs):
            continue
        s = rhs[d]
        if not t.is_nt[s]:
            continue
        smask, snull = t.suffix[p][d + 1]
        child = smask | delta if snull else smask
        for q in t.prods_of[s]:
            add(q, 0, child)
    return tuple(Item(p, d, la[(p, d)]) for p, d in sorted(la))


def closure(seed: Iterable[Item], g: Grammar) -> tuple[Item, ...]:
    """Least LR(1) closure of the seed; equal cores coalesce by lookahead union."""
    return _close(((i.production, i.dot, i.lookahead) for i in seed), _tables(g))


def goto_set(state: LrState, symbol: Union[int, Symbol], g: Grammar) -> tuple[Item, ...]:
    """Closure of the items of `state` advanced over `symbol`; () if none advance."""
    sid = symbol.id if isinstance(symbol, Symbol) else symbol
    t = _tables(g)
    kernel = [(i.production, i.dot + 1, i.lookahead) for i in state.items
              if i.dot < len(t.rhs[i.production]) and t.rhs[i.production][i.dot] == sid]
    if not kernel:
        return ()
    return _close(kernel, t)


def build_lr1(g: Grammar) -> Automaton:
    """Canonical LR(1) collection; conflicts are recorded, not fatal."""
    t = _tables(g)
    start_items = _close([(0, 0, t.end_bit)], t)
    index: dict[tuple[Item, ...], int] = {start_items: 0}
    item_sets: list[tuple[Item, ...]] = [start_items]
    transitions: dict[tuple[int, int], int] = {}
    queue = deque([0])
    while queue:
        sid = queue.popleft()
        moves: dict[int, list[tuple[int, int, int]]] = {}
        for it in item_sets[sid]:
            rhs = t.rhs[it.production]
            if it.dot < len(rhs):
                moves.setdefault(rhs[it.dot], []).append(
                    (it.production, it.dot + 1, it.lookahead))
        for sym in sorted(moves):
            target = _close(moves[sym], t)
            tid = index.get(target)
            if tid is None:
                tid = len(item_sets)
                index[target] = tid
                item_sets.append(target)
                queue.append(tid)
            transitions[(sid, sym)] = tid
    states = tuple(LrState(i, items) for i, items in enumerate(item_sets))
    return Automaton(g, states, transitions)


def build_lr0(g: Grammar) -> Automaton:
    """LR(0) collection; items carry the full lookahead mask as a placeholder."""
    t = _tables(g)

    def close0(seed: Iterable[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
        have = set(seed)
        work = list(have)
        while work:
            p, d = work.pop()
            rhs = t.rhs[p]
            if d < len(rhs) and t.is_nt[rhs[d]]:
                for q in t.prods_of[rhs[d]]:
                    if (q, 0) not in have:
                        have.add((q, 0))
                        work.append((q, 0))
        return tuple(sorted(have))

    start_cores = close0([(0, 0)])
    index: dict[tuple[tuple[int, int], ...], int] = {start_cores: 0}
    core_sets: list[tuple[tuple[int, int], ...]] = [start_cores]
    transitions: dict[tuple[int, int], int] = {}
    queue = deque([0])
    while queue:
        sid = queue.popleft()
        moves: dict[int, list[tuple[int, int]]] = {}
        for p, d in core_sets[sid]:
            rhs = t.rhs[p]
            if d < len(rhs):
                moves.setdefault(rhs[d], []).append((p, d + 1))
        for sym in sorted(moves):
            target = close0(moves[sym])
            tid = index.get(target)
            if tid is None:
                tid = len(core_sets)
                index[target] = tid
                core_sets.append(target)
                queue.append(tid)
            transitions[(sid, sym)] = tid
    states = tuple(
        LrState(i, tuple(Item(p, d, t.full_mask) for p, d in cores))
        for i, cores in enumerate(core_sets))
    return Automaton(g, states, transitions)


# -- similarity and merging -------------------------------------------------------

@dataclass(frozen=True)
class SimilarityClasses:
    classes: tuple[tuple[int, ...], ...]  # sorted members, ordered by first member

    @property
    def non_singletons(self) -> tuple[tuple[int, ...], ...]:
        return tuple(c for c in self.classes if len(c) > 1)

    @property
    def singletons(self) -> tuple[int, ...]:
        return tuple(c[0] for c in self.classes if len(c) == 1)

    def class_of(self, state: int) -> tuple[int, ...]:
        for c in self.classes:
            if state in c:
                return c
        raise KeyError(state)


def similarity_classes(m: Automaton) -> SimilarityClasses:
    """Partition of the states by their lookahead-stripped item cores."""
    groups: dict[tuple[ItemCore, ...], list[int]] = {}
    for st in m.states:
        groups.setdefault(st.core_key(), []).append(st.id)
    return SimilarityClasses(tuple(sorted(tuple(v) for v in groups.values())))


def merge_block(m: Automaton, block: Iterable[int]) -> LrState:
    """One state pooling the block's lookaheads; the machine itself is untouched."""
    ids = sorted(set(block))
    if not ids:
        raise MergeError("cannot merge an empty block")
    base = m.states[ids[0]]
    key = base.core_key()
    la = {(i.production, i.dot): i.lookahead for i in base.items}
    for other_id in ids[1:]:
        other = m.states[other_id]
        if other.core_key() != key:
            raise MergeError(f"states {ids[0]} and {other_id} are not similar",
                             pair=(ids[0], other_id))
        for it in other.items:
            la[(it.production, it.dot)] |= it.lookahead
    return LrState(ids[0], tuple(Item(p, d, la[(p, d)]) for p, d in sorted(la)))


def detect_conflicts(state: LrState, g: Grammar) -> tuple[ConflictEntry, ...]:
    """Reduce-reduce and shift-reduce collisions among the state's decisions."""
    t = _tables(g)
    completed: list[Item] = []
    shift_core: dict[int, ItemCore] = {}
    for it in state.items:
        rhs = t.rhs[it.production]
        if it.dot == len(rhs):
            completed.append(it)
        else:
            s = rhs[it.dot]
            if not t.is_nt[s]:
                shift_core.setdefault(s, ItemCore(it.production, it.dot))
    entries: list[ConflictEntry] = []
    for i in range(len(completed)):
        for j in range(i + 1, len(completed)):
            shared = completed[i].lookahead & completed[j].lookahead
            if shared:
                pair = (ItemCore(completed[i].production, completed[i].dot),
                        ItemCore(completed[j].production, completed[j].dot))
                for name in lookahead_names(g, shared):
                    entries.append(ConflictEntry(state.id, name, pair, "reduce-reduce"))
    for sid in sorted(shift_core):
        bit = t.term_bit[sid]
        for it in completed:
            if it.lookahead & bit:
                entries.append(ConflictEntry(
                    state.id, g.name(sid),
                    (shift_core[sid], ItemCore(it.production, it.dot)),
                    "shift-reduce"))
    return tuple(entries)


# -- running the parser -------------------------------------------------------------

def parse_sentence(m: Automaton, tokens: Sequence[str]) -> ParseResult:
    """Shift/reduce run over the tokens with the end marker appended."""
    bad = m.conflicts()
    if bad:
        raise ConflictError(bad)
    g = m.grammar
    t = _tables(g)
    lexed: list[tuple[int, int]] = []
    for pos, tok in enumerate(tokens):
        sid = g.by_name.get(tok)
        if sid is None or not g.is_terminal(sid):
            return ParseResult(False, pos)
        lexed.append((sid, t.term_bit[sid]))
    stack = [m.start_state]
    pos = 0
    while True:
        sid, bit = lexed[pos] if pos < len(lexed) else (None, t.end_bit)
        state = m.states[stack[-1]]
        prod = None
        for it in state.items:
            if it.dot == len(t.rhs[it.production]) and it.lookahead & bit:
                prod = it.production
                break
        if prod is not None:
            if prod == 0:
                return ParseResult(True, None)
            del stack[len(stack) - len(t.rhs[prod]):]
            goto = m.transitions.get((stack[-1], t.lhs[prod]))
            if goto is None:
                return ParseResult(False, pos)
            stack.append(goto)
            continue
        if sid is not None:
            nxt = m.transitions.get((stack[-1], sid))
            if nxt is not None:
                stack.append(nxt)
                pos += 1
                continue
        return ParseResult(False, pos)


# -- rendering ------------------------------------------------------------------------

def item_text(g: Grammar, item: Item) -> str:
    p = g.productions[item.production]
    parts = [g.name(p.lhs), "::="]
    parts += [g.name(s) for s in p.rhs[:item.dot]]
    parts.append("\u2022")
    parts += [g.name(s) for s in p.rhs[item.dot:]]
    la = ", ".join(lookahead_names(g, item.lookahead))
    return f"{' '.join(parts)} , {{{la}}}"


def dump_automaton(m: Automaton) -> str:
    """One line per state ("id | item; item; ..."), then one per transition."""
    g = m.grammar
    lines = [f"{st.id} | " + "; ".join(item_text(g, it) for it in st.items)
             for st in m.states]
    for (src, sym), dst in sorted(m.transitions.items()):
        lines.append(f"{src} -{g.name(sym)}-> {dst}")
    return "\n".join(lines) + "\n"


def export_dot(m: Automaton, show_items: bool = False) -> str:
    """Graphviz rendering of the machine; node labels carry items on request."""
    g = m.grammar

    def esc(s: str) -> str:
        return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")

    lines = ["digraph lr {", "  rankdir=LR;", '  node [shape=box fontname="monospace"];']
    for st in m.states:
        if show_items:
            label = esc("\n".join([str(st.id)] + [item_text(g, it) for it in st.items]))
        else:
            label = str(st.id)
        lines.append(f'  {st.id} [label="{label}"];')
    for (src, sym), dst in sorted(m.transitions.items()):
        lines.append(f'  {src} -> {dst} [label="{esc(g.name(sym))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def cores_isomorphic(a: Automaton, b: Automaton) -> bool:
    """Same machine up to lookaheads: per-state core match plus equal transitions.

    Both construction paths number states breadth-first in grammar order, so
    isomorphic machines come out identically numbered.
    """
    if len(a.states) != len(b.states) or a.start_state != b.start_state:
        return False
    for sa, sb in zip(a.states, b.states):
        if sa.core_key() != sb.core_key():
            return False
    return a.transitions == b.transitions
