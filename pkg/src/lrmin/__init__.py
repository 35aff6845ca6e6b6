"""LR(1) machines, similar-state merging, and graph-coloring reductions."""

from .grammar import (CyclicGrammarError, FirstInfo, Grammar, GrammarError,
                      GrammarStats, Production, Symbol, compute_first,
                      derivation_cycle, enumerate_language, grammar_stats,
                      parse_grammar, serialize_grammar, END_MARK)
from .automaton import (Automaton, ConflictEntry, ConflictError, Item, ItemCore,
                        LrState, MergeError, ParseResult, SimilarityClasses,
                        build_lr0, build_lr1, closure, cores_isomorphic,
                        detect_conflicts, dump_automaton, export_dot, goto_set,
                        item_text, lookahead_names, merge_block, parse_sentence,
                        similarity_classes)
from .minimize import (BudgetExceeded, ClosureResult, ConflictGraph,
                       InvalidSchemeError, MergeScheme, SchemeFormatError,
                       Violation, apply_scheme, build_conflict_graph,
                       congruence_close, enumerate_schemes_oracle,
                       merge_all_similar, minimize_exact, minimize_greedy,
                       pair_mergeable, parse_scheme, serialize_scheme,
                       validate_scheme)
from .reduction import (CheckResult, ColorGraph, Coloring, DimacsError, GenTrace,
                        IterationRecord, NodeStateMap, ReductionError,
                        ReductionReport, chromatic_oracle, color_graph,
                        graph_to_grammar, parse_coloring, parse_dimacs,
                        recover_coloring, serialize_coloring, serialize_trace,
                        state_node_mapping, to_dimacs, verify_reduction)

__version__ = "0.1.0"
