"""Shared grammar fixtures: the 2/3/4-node template instances used as goldens."""

import pytest

from lrmin import build_lr1, parse_grammar

# 2-node templates: the right-hand one plants ")" in two chain rules, so the
# two reduce states collide; the left-hand one keeps all four tails distinct.
TWO_NODE_NO_EDGE = """\
P ::= S $
S ::= 1 X a
S ::= 1 Y b
S ::= 2 X c
S ::= 2 Y d
X ::= @
Y ::= @
"""

TWO_NODE_EDGE = """\
P ::= S $
S ::= 1 X )
S ::= 1 Y b
S ::= 2 X c
S ::= 2 Y )
X ::= @
Y ::= @
"""

# 3-node instances for the graphs with zero, one (1-2), two (1-2, 1-3) and
# three edges.
THREE_NODE_E0 = """\
P ::= S $
S ::= 1 X a
S ::= 1 Y b
S ::= 1 Z e
S ::= 1 V f
S ::= 2 X c
S ::= 2 Y d
S ::= 2 Z g
S ::= 2 V h
S ::= 3 X i
S ::= 3 Y j
S ::= 3 Z k
S ::= 3 V m
X ::= @
Y ::= @
Z ::= @
V ::= @
"""

THREE_NODE_E1 = """\
P ::= S $
S ::= 1 X )
S ::= 1 Y b
S ::= 1 Z e
S ::= 1 V f
S ::= 2 X c
S ::= 2 Y )
S ::= 2 Z g
S ::= 2 V h
S ::= 3 X i
S ::= 3 Y j
S ::= 3 Z k
S ::= 3 V m
X ::= @
Y ::= @
Z ::= @
V ::= @
"""

THREE_NODE_E2 = """\
P ::= S $
S ::= 1 X )
S ::= 1 Y b
S ::= 1 Z =
S ::= 1 V f
S ::= 2 X c
S ::= 2 Y )
S ::= 2 Z g
S ::= 2 V h
S ::= 3 X i
S ::= 3 Y j
S ::= 3 Z k
S ::= 3 V =
X ::= @
Y ::= @
Z ::= @
V ::= @
"""

THREE_NODE_E3 = """\
P ::= S $
S ::= 1 X )
S ::= 1 Y b
S ::= 1 Z =
S ::= 1 V f
S ::= 2 X c
S ::= 2 Y )
S ::= 2 Z =
S ::= 2 V h
S ::= 3 X i
S ::= 3 Y j
S ::= 3 Z k
S ::= 3 V =
X ::= @
Y ::= @
Z ::= @
V ::= @
"""

# 4-node instance for the square graph with edges 1-2, 1-3, 2-4, 3-4.
FOUR_NODE_SQUARE = """\
P ::= S $
S ::= 1 X )
S ::= 1 Y b
S ::= 1 Z =
S ::= 1 V f
S ::= 1 Q m
S ::= 1 R n
S ::= 2 X c
S ::= 2 Y )
S ::= 2 Z g
S ::= 2 V h
S ::= 2 Q #
S ::= 2 R p
S ::= 3 X i
S ::= 3 Y j
S ::= 3 Z k
S ::= 3 V =
S ::= 3 Q #
S ::= 3 R u
S ::= 4 X r
S ::= 4 Y s
S ::= 4 Z t
S ::= 4 V q
S ::= 4 Q v
S ::= 4 R #
X ::= @
Y ::= @
Z ::= @
V ::= @
Q ::= @
R ::= @
"""

# Two same-core states (after "a m" / "b m") whose successors on "e" pool a
# reduce-reduce conflict on c and d; merging the predecessors is therefore
# blocked purely by successor congruence.
CONGRUENCE_GRAMMAR = """\
P ::= S $
S ::= a M1 c
S ::= a M2 d
S ::= b M1 d
S ::= b M2 c
M1 ::= m E
M2 ::= m F
E ::= e
F ::= e
"""


def grammars_match(actual, expected):
    """Rule-by-rule equality up to injective renaming of generated names.

    "@", "$" and all-digit tokens must map to themselves; every other name
    must map one-to-one with terminal/nonterminal kinds preserved, so shared
    trailing terminals line up between the two grammars.
    """
    if len(actual.productions) != len(expected.productions):
        return False
    fwd, back = {}, {}

    def bind(a_sid, e_sid):
        a, e = actual.symbols[a_sid], expected.symbols[e_sid]
        if a.terminal != e.terminal:
            return False
        if a.name in ("@", "$") or a.name.isdigit() or e.name in ("@", "$") or e.name.isdigit():
            return a.name == e.name
        if fwd.get(a.name, e.name) != e.name or back.get(e.name, a.name) != a.name:
            return False
        fwd[a.name] = e.name
        back[e.name] = a.name
        return True

    for pa, pe in zip(actual.productions, expected.productions):
        if len(pa.rhs) != len(pe.rhs) or not bind(pa.lhs, pe.lhs):
            return False
        for sa, se in zip(pa.rhs, pe.rhs):
            if not bind(sa, se):
                return False
    return True


@pytest.fixture(scope="session")
def machines():
    """LR(1) machines for the golden grammars, built once."""
    texts = {
        "two_no_edge": TWO_NODE_NO_EDGE,
        "two_edge": TWO_NODE_EDGE,
        "three_e0": THREE_NODE_E0,
        "three_e1": THREE_NODE_E1,
        "three_e2": THREE_NODE_E2,
        "three_e3": THREE_NODE_E3,
        "four_square": FOUR_NODE_SQUARE,
        "congruence": CONGRUENCE_GRAMMAR,
    }
    return {name: build_lr1(parse_grammar(text)) for name, text in texts.items()}
