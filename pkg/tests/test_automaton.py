import pytest

from lrmin import (ConflictError, END_MARK, Item, build_lr0, build_lr1, closure,
                   detect_conflicts, dump_automaton, export_dot, goto_set,
                   item_text, lookahead_names, merge_block, parse_grammar,
                   parse_sentence, similarity_classes)

from conftest import THREE_NODE_E0, THREE_NODE_E2, TWO_NODE_EDGE

REDUCE_REDUCE = """\
S ::= A x
S ::= B x
A ::= a
B ::= a
"""


def mask_of(g, *names):
    mask = 0
    for nm in names:
        if nm == END_MARK:
            mask |= 1 << len(g.terminals)
        else:
            mask |= 1 << g.term_index[g.by_name[nm]]
    return mask


def texts(g, items):
    return {item_text(g, it) for it in items}


def test_closure_of_start_item():
    g = parse_grammar(TWO_NODE_EDGE)
    got = closure([Item(0, 0, mask_of(g, END_MARK))], g)
    assert texts(g, got) == {
        f"P ::= • S $ , {{{END_MARK}}}",
        "S ::= • 1 X ) , {$}",
        "S ::= • 1 Y b , {$}",
        "S ::= • 2 X c , {$}",
        "S ::= • 2 Y ) , {$}",
    }


def test_closure_before_terminal_adds_nothing():
    g = parse_grammar(TWO_NODE_EDGE)
    seed = Item(1, 1, mask_of(g, "$"))  # S ::= 1 . X ) would close; dot on terminal does not
    got = closure([Item(1, 0, mask_of(g, "$"))], g)
    assert len(got) == 1  # dot before "1", a terminal
    got = closure([seed], g)
    assert texts(g, got) == {"S ::= 1 • X ) , {$}", "X ::= • @ , {)}"}


def test_closure_lookahead_comes_from_suffix():
    g = parse_grammar(TWO_NODE_EDGE)
    got = closure([Item(1, 1, mask_of(g, "$"))], g)
    (added,) = [it for it in got if it.production == 5]
    assert lookahead_names(g, added.lookahead) == (")",)


def test_goto_from_initial_state_on_node_terminal():
    g = parse_grammar(TWO_NODE_EDGE)
    m = build_lr1(g)
    start = m.states[m.start_state]
    got = goto_set(start, g.by_name["1"], g)
    assert texts(g, got) == {
        "S ::= 1 • X ) , {$}",
        "S ::= 1 • Y b , {$}",
        "X ::= • @ , {)}",
        "Y ::= • @ , {b}",
    }


def test_goto_on_unrelated_symbol_is_empty():
    g = parse_grammar(TWO_NODE_EDGE)
    m = build_lr1(g)
    assert goto_set(m.states[0], g.by_name["@"], g) == ()


def test_goto_advance_without_closure():
    g = parse_grammar(TWO_NODE_EDGE)
    m = build_lr1(g)
    state = m.states[m.walk(["1"])]
    got = goto_set(state, g.by_name["@"], g)
    assert texts(g, got) == {"X ::= @ • , {)}", "Y ::= @ • , {b}"}


def test_lr1_state_counts():
    assert len(build_lr1(parse_grammar(THREE_NODE_E2)).states) == 33
    assert len(build_lr1(parse_grammar(TWO_NODE_EDGE)).states) == 15
    m = build_lr1(parse_grammar("P ::= a"))
    assert len(m.states) == 2
    assert len(m.transitions) == 1


def test_lr1_deterministic_rebuild():
    a = build_lr1(parse_grammar(THREE_NODE_E2))
    b = build_lr1(parse_grammar(THREE_NODE_E2))
    assert dump_automaton(a) == dump_automaton(b)


def test_lr0_counts():
    # the three similar reduce states collapse to one
    assert len(build_lr0(parse_grammar(THREE_NODE_E2)).states) == 33 - 2
    # one mergeable pair in the 2-node machine
    assert len(build_lr0(parse_grammar(TWO_NODE_EDGE)).states) == 15 - 1
    g = parse_grammar("P ::= a b")
    assert len(build_lr0(g).states) == len(build_lr1(g).states)


def test_similarity_single_class_of_reduce_states(machines):
    sc = similarity_classes(machines["three_e2"])
    assert len(sc.non_singletons) == 1
    assert len(sc.non_singletons[0]) == 3
    sc4 = similarity_classes(machines["four_square"])
    assert len(sc4.non_singletons) == 1
    assert len(sc4.non_singletons[0]) == 4


def test_similarity_all_singletons():
    m = build_lr1(parse_grammar("P ::= a b\nQ' ::= c"))
    sc = similarity_classes(m)
    assert sc.non_singletons == ()
    covered = sorted(s for c in sc.classes for s in c)
    assert covered == list(range(len(m.states)))


def test_merge_block_pools_lookaheads(machines):
    m = machines["two_edge"]
    g = m.grammar
    s1, s2 = m.walk(["1", "@"]), m.walk(["2", "@"])
    merged = merge_block(m, [s1, s2])
    by_prod = {it.production: set(lookahead_names(g, it.lookahead))
               for it in merged.items}
    assert by_prod[g.prods_of(g.by_name["X"])[0]] == {")", "c"}
    assert by_prod[g.prods_of(g.by_name["Y"])[0]] == {"b", ")"}


def test_merge_block_singleton_identity(machines):
    m = machines["two_edge"]
    s1 = m.walk(["1", "@"])
    assert merge_block(m, [s1]) == m.states[s1]


def test_merge_block_three_way_union(machines):
    m = machines["three_e0"]
    g = m.grammar
    sc = similarity_classes(m)
    merged = merge_block(m, sc.non_singletons[0])
    by_nt = {g.name(g.productions[it.production].lhs):
             set(lookahead_names(g, it.lookahead)) for it in merged.items}
    assert by_nt == {"X": {"a", "c", "i"}, "Y": {"b", "d", "j"},
                     "Z": {"e", "g", "k"}, "V": {"f", "h", "m"}}
    assert detect_conflicts(merged, g) == ()


def test_merge_block_rejects_dissimilar(machines):
    m = machines["two_edge"]
    with pytest.raises(Exception) as err:
        merge_block(m, [0, 1])
    assert err.value.pair == (0, 1)


def test_detect_conflicts_reduce_reduce(machines):
    m = machines["two_edge"]
    merged = merge_block(m, [m.walk(["1", "@"]), m.walk(["2", "@"])])
    entries = detect_conflicts(merged, m.grammar)
    assert len(entries) == 1
    assert entries[0].kind == "reduce-reduce"
    assert entries[0].terminal == ")"


def test_detect_conflicts_single_item_state(machines):
    m = machines["two_edge"]
    state = m.states[m.walk(["1", "X"])]
    assert detect_conflicts(state, m.grammar) == ()


def test_detect_conflicts_shift_reduce():
    # after "a": completed A-item with lookahead containing shiftable "a"
    g = parse_grammar("S ::= A a\nA ::= a\nA ::= a a")
    m = build_lr1(g)
    kinds = {e.kind for e in m.conflicts()}
    assert "shift-reduce" in kinds


def test_machine_conflicts_on_reduce_reduce_grammar():
    m = build_lr1(parse_grammar(REDUCE_REDUCE))
    entries = m.conflicts()
    assert {e.kind for e in entries} == {"reduce-reduce"}
    assert {e.terminal for e in entries} == {"x"}
    with pytest.raises(ConflictError):
        parse_sentence(m, ["a", "x"])


def test_parse_sentence_accept_and_reject(machines):
    m = machines["two_edge"]
    assert parse_sentence(m, ["1", "@", ")", "$"]) == (True, None)
    assert parse_sentence(m, ["1", "@", "b", "$"]) == (True, None)
    rejected = parse_sentence(m, ["1", "@", "c", "$"])
    assert rejected == (False, 2)
    assert parse_sentence(m, ["1", "@", ")"]) == (False, 3)  # missing "$"
    assert parse_sentence(m, ["zzz"]) == (False, 0)


def test_parse_sentence_empty_input():
    m = build_lr1(parse_grammar("A ::="))
    assert parse_sentence(m, []) == (True, None)
    assert parse_sentence(m, ["a"]) == (False, 0)


def test_export_dot_structure():
    m = build_lr1(parse_grammar("P ::= a b"))
    dot = export_dot(m)
    assert dot.count("[label=") - dot.count("->") == 3  # 3 nodes
    assert dot.count("->") == 2
    with_items = export_dot(m, show_items=True)
    assert "P ::= • a b" in with_items


def test_export_dot_shows_pooled_lookaheads(machines):
    m = machines["three_e2"]
    dot = export_dot(m, show_items=True)
    assert dot.startswith("digraph")
    assert len(m.states) == 33


def test_dump_round_trip_stability(machines):
    m = machines["four_square"]
    assert dump_automaton(m) == dump_automaton(m)
    # every transition target is a valid state and the map is a function
    for (src, sym), dst in m.transitions.items():
        assert 0 <= src < len(m.states)
        assert 0 <= dst < len(m.states)
