"""Context-free grammars as plain token lists.

A grammar file holds one rule per line ("LHS ::= tok tok ..."), with "//"
starting a comment and blank lines ignored.  Tokens are whitespace-free;
a token is a nonterminal exactly when it appears as some rule's left-hand
side, everything else is a terminal.  The start symbol is the left-hand
side of the first rule; if that symbol also occurs on a right-hand side,
construction wraps the grammar with a fresh start rule so that the first
production is never re-entered.

Grammar values are immutable after construction and every operation in
this module is a pure function, so grammars can be shared across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

END_MARK = "⊣"  # synthetic end-of-input marker; never a grammar symbol

_RULE_SEP = "::="
_TOKEN_RE = re.compile(r"\S+")


class GrammarError(ValueError):
    """Malformed grammar text; 1-based line/column attached when known."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class CyclicGrammarError(ValueError):
    """Exact language enumeration refused: a nonterminal can derive itself."""

    def __init__(self, cycle: Sequence[str]):
        super().__init__("recursive derivation: " + " -> ".join(cycle))
        self.cycle = tuple(cycle)


@dataclass(frozen=True)
class Symbol:
    id: int
    name: str
    terminal: bool

    @property
    def kind(self) -> str:
        return "terminal" if self.terminal else "nonterminal"


@dataclass(frozen=True)
class Production:
    index: int
    lhs: int                # symbol id of the left-hand side
    rhs: tuple[int, ...]    # symbol ids; may be empty


class GrammarStats(NamedTuple):
    n_nonterminals: int
    n_terminals: int
    n_productions: int


class FirstInfo(NamedTuple):
    terminals: frozenset[str]
    nullable: bool


@dataclass(frozen=True)
class Grammar:
    """Symbol table plus ordered production list.

    Symbol ids are dense and assigned in order of first appearance in the
    rule list, so two parses of the same text agree on every id.
    """

    symbols: tuple[Symbol, ...]
    productions: tuple[Production, ...]
    start: int
    warnings: tuple[str, ...] = field(default=(), compare=False)
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    @classmethod
    def from_rules(cls, rules: Sequence[tuple[str, Sequence[str]]],
                   warnings: Iterable[str] = ()) -> "Grammar":
        if not rules:
            raise GrammarError("empty grammar")
        rules = [(lhs, tuple(rhs)) for lhs, rhs in rules]
        for lhs, rhs in rules:
            for tok in (lhs, *rhs):
                if not tok or tok.split() != [tok]:
                    raise GrammarError(f"invalid token {tok!r}")
                if tok in (_RULE_SEP, END_MARK):
                    raise GrammarError(f"{tok!r} is reserved and cannot be a grammar symbol")
        lhs_names = {lhs for lhs, _ in rules}
        rhs_names = {tok for _, rhs in rules for tok in rhs}
        start_name = rules[0][0]
        # The first production must be the unique way to derive the start
        # symbol, so that "reduce production 0" is the accept action.
        multi_start = sum(1 for lhs, _ in rules if lhs == start_name) > 1
        if start_name in rhs_names or multi_start:
            fresh = start_name + "'"
            taken = lhs_names | rhs_names
            while fresh in taken:
                fresh += "'"
            rules.insert(0, (fresh, (start_name,)))
            lhs_names.add(fresh)
        ids: dict[str, int] = {}
        names: list[str] = []
        for lhs, rhs in rules:
            for tok in (lhs, *rhs):
                if tok not in ids:
                    ids[tok] = len(names)
                    names.append(tok)
        symbols = tuple(Symbol(i, nm, nm not in lhs_names) for i, nm in enumerate(names))
        productions = tuple(
            Production(i, ids[lhs], tuple(ids[tok] for tok in rhs))
            for i, (lhs, rhs) in enumerate(rules))
        return cls(symbols, productions, productions[0].lhs, tuple(warnings))

    # -- lookups -------------------------------------------------------------

    def name(self, sid: int) -> str:
        return self.symbols[sid].name

    def is_terminal(self, sid: int) -> bool:
        return self.symbols[sid].terminal

    @property
    def by_name(self) -> dict[str, int]:
        got = self._cache.get("by_name")
        if got is None:
            got = {s.name: s.id for s in self.symbols}
            self._cache["by_name"] = got
        return got

    @property
    def terminals(self) -> tuple[int, ...]:
        got = self._cache.get("terminals")
        if got is None:
            got = tuple(s.id for s in self.symbols if s.terminal)
            self._cache["terminals"] = got
        return got

    @property
    def nonterminals(self) -> tuple[int, ...]:
        got = self._cache.get("nonterminals")
        if got is None:
            got = tuple(s.id for s in self.symbols if not s.terminal)
            self._cache["nonterminals"] = got
        return got

    @property
    def term_index(self) -> dict[int, int]:
        """Dense terminal numbering used for lookahead bitmasks."""
        got = self._cache.get("term_index")
        if got is None:
            got = {sid: i for i, sid in enumerate(self.terminals)}
            self._cache["term_index"] = got
        return got

    def prods_of(self, sid: int) -> tuple[int, ...]:
        table = self._cache.get("prods_of")
        if table is None:
            table = {}
            for p in self.productions:
                table.setdefault(p.lhs, []).append(p.index)
            table = {k: tuple(v) for k, v in table.items()}
            self._cache["prods_of"] = table
        return table.get(sid, ())

    def production_text(self, index: int) -> str:
        p = self.productions[index]
        return " ".join([self.name(p.lhs), _RULE_SEP, *(self.name(s) for s in p.rhs)])


def parse_grammar(text: str) -> Grammar:
    """Parse grammar file text; duplicate rules are kept but flagged."""
    rules: list[tuple[str, tuple[str, ...]]] = []
    warnings: list[str] = []
    seen: dict[tuple[str, tuple[str, ...]], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("//", 1)[0]
        toks = [(m.group(), m.start() + 1) for m in _TOKEN_RE.finditer(body)]
        if not toks:
            continue
        head, head_col = toks[0]
        if head == _RULE_SEP:
            raise GrammarError("missing rule head", lineno, head_col)
        if head == END_MARK:
            raise GrammarError("the end marker cannot be a grammar symbol", lineno, head_col)
        if len(toks) < 2 or toks[1][0] != _RULE_SEP:
            col = toks[1][1] if len(toks) > 1 else head_col + len(head)
            raise GrammarError(f"expected {_RULE_SEP!r} after the rule head", lineno, col)
        rhs = []
        for tok, col in toks[2:]:
            if tok == _RULE_SEP:
                raise GrammarError(f"unexpected {_RULE_SEP!r} in rule body", lineno, col)
            if tok == END_MARK:
                raise GrammarError("the end marker cannot be a grammar symbol", lineno, col)
            rhs.append(tok)
        key = (head, tuple(rhs))
        if key in seen:
            warnings.append(
                f"line {lineno}: duplicate of rule at line {seen[key]}: "
                + " ".join([head, _RULE_SEP, *rhs]))
        else:
            seen[key] = lineno
        rules.append(key)
    if not rules:
        raise GrammarError("empty grammar")
    return Grammar.from_rules(rules, warnings)


def serialize_grammar(g: Grammar) -> str:
    """Rules in index order, single spaces between tokens; re-parses identically."""
    return "\n".join(g.production_text(i) for i in range(len(g.productions))) + "\n"


def grammar_stats(g: Grammar) -> GrammarStats:
    return GrammarStats(len(g.nonterminals), len(g.terminals), len(g.productions))


# -- FIRST sets ---------------------------------------------------------------

def _first_tables(g: Grammar) -> tuple[list[int], list[bool]]:
    """FIRST bitmask (over terminal indices) and nullability, per symbol id."""
    got = g._cache.get("first")
    if got is not None:
        return got
    nsym = len(g.symbols)
    first = [0] * nsym
    nullable = [False] * nsym
    for sid in g.terminals:
        first[sid] = 1 << g.term_index[sid]
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            add = 0
            all_nullable = True
            for s in p.rhs:
                add |= first[s]
                if not nullable[s]:
                    all_nullable = False
                    break
            new = first[p.lhs] | add
            if new != first[p.lhs]:
                first[p.lhs] = new
                changed = True
            if all_nullable and not nullable[p.lhs]:
                nullable[p.lhs] = True
                changed = True
    g._cache["first"] = (first, nullable)
    return first, nullable


def compute_first(g: Grammar) -> dict[str, FirstInfo]:
    """FIRST set and nullability for every nonterminal, by name."""
    first, nullable = _first_tables(g)
    out = {}
    for sid in g.nonterminals:
        names = frozenset(
            g.name(t) for t in g.terminals if first[sid] >> g.term_index[t] & 1)
        out[g.name(sid)] = FirstInfo(names, nullable[sid])
    return out


# -- language enumeration ------------------------------------------------------

def derivation_cycle(g: Grammar) -> Optional[tuple[str, ...]]:
    """A witness cycle A -> ... -> A through right-hand-side occurrence, if any."""
    adj: dict[int, set[int]] = {sid: set() for sid in g.nonterminals}
    for p in g.productions:
        for s in p.rhs:
            if not g.is_terminal(s):
                adj[p.lhs].add(s)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {sid: WHITE for sid in adj}
    for root in g.nonterminals:
        if color[root] != WHITE:
            continue
        stack: list[tuple[int, list[int]]] = [(root, sorted(adj[root]))]
        color[root] = GREY
        path = [root]
        while stack:
            node, rest = stack[-1]
            if rest:
                child = rest.pop(0)
                if color[child] == GREY:
                    cut = path.index(child)
                    cycle = path[cut:] + [child]
                    return tuple(g.name(s) for s in cycle)
                if color[child] == WHITE:
                    color[child] = GREY
                    path.append(child)
                    stack.append((child, sorted(adj[child])))
            else:
                color[node] = BLACK
                path.pop()
                stack.pop()
    return None


def enumerate_language(g: Grammar, max_length: Optional[int] = None) -> list[tuple[str, ...]]:
    """Every terminal string derivable from the start symbol, sorted.

    Without a length cap the grammar must be non-recursive; with a cap the
    set is computed as a bounded fixpoint and works for any grammar.
    """
    if max_length is None:
        cycle = derivation_cycle(g)
        if cycle is not None:
            raise CyclicGrammarError(cycle)
        return sorted(_exact_language(g))
    return sorted(_capped_language(g, max_length))


def _exact_language(g: Grammar) -> set[tuple[str, ...]]:
    memo: dict[int, frozenset[tuple[str, ...]]] = {}

    def lang(sid: int) -> frozenset[tuple[str, ...]]:
        if g.is_terminal(sid):
            return frozenset({(g.name(sid),)})
        got = memo.get(sid)
        if got is not None:
            return got
        out: set[tuple[str, ...]] = set()
        for pi in g.prods_of(sid):
            parts: set[tuple[str, ...]] = {()}
            for s in g.productions[pi].rhs:
                parts = {a + b for a in parts for b in lang(s)}
            out |= parts
        memo[sid] = frozenset(out)
        return memo[sid]

    return set(lang(g.start))


def _capped_language(g: Grammar, cap: int) -> set[tuple[str, ...]]:
    lang: dict[int, set[tuple[str, ...]]] = {sid: set() for sid in g.nonterminals}
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            acc: set[tuple[str, ...]] = {()}
            for s in p.rhs:
                pieces = [(g.name(s),)] if g.is_terminal(s) else lang[s]
                acc = {a + b for a in acc for b in pieces if len(a) + len(b) <= cap}
                if not acc:
                    break
            before = len(lang[p.lhs])
            lang[p.lhs] |= acc
            if len(lang[p.lhs]) != before:
                changed = True
    return lang[g.start]
