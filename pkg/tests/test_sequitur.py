import random

import pytest

from conftest import random_corpus, random_stream
from tadoc.corpus import MalformedStreamError, encode_corpus
from tadoc.sequitur import (
    Grammar,
    GrammarError,
    duplicate_digrams,
    expand,
    grammar_stats,
    infer_grammar,
    rule_reference_counts,
)


def canonical(grammar: Grammar):
    """Bodies with rule ids renamed by first appearance in a root-first walk."""
    mapping = {grammar.root_id: 0}
    order = [grammar.root_id]
    i = 0
    while i < len(order):
        for sym in grammar.body(order[i]):
            if grammar.is_rule(sym) and sym not in mapping:
                mapping[sym] = len(mapping)
                order.append(sym)
        i += 1
    return [
        [("R", mapping[sym]) if grammar.is_rule(sym) else sym for sym in grammar.body(rid)]
        for rid in order
    ]


def test_reference_grammar_structure():
    stream = [0, 1, 2, 0, 1, 3, 0, 1, 2, 0, 1, 3, 0, 1, 0]
    grammar = infer_grammar(stream, 4)
    assert expand(grammar) == stream
    # root -> A A B a; A -> B c B d; B -> a b  (modulo numbering)
    assert canonical(grammar) == [
        [("R", 1), ("R", 1), ("R", 2), 0],
        [("R", 2), 2, ("R", 2), 3],
        [0, 1],
    ]


def test_single_symbol_stream():
    grammar = infer_grammar([0], 1)
    assert grammar.rules == [[0]]
    assert expand(grammar) == [0]


def test_out_of_range_code():
    with pytest.raises(MalformedStreamError):
        infer_grammar([0, 5], 5)
    with pytest.raises(MalformedStreamError):
        infer_grammar([0], 0)


def test_round_trip_and_invariants_fuzz():
    rng = random.Random(99)
    for trial in range(300):
        stream, n = random_stream(rng)
        grammar = infer_grammar(stream, n)
        assert expand(grammar) == stream, trial
        assert duplicate_digrams(grammar) == [], trial
        for rid, count in rule_reference_counts(grammar).items():
            if rid != grammar.root_id:
                assert count >= 2, (trial, rid)


def test_separators_stay_in_root():
    rng = random.Random(5)
    for _ in range(40):
        files = random_corpus(rng)
        dictionary, encoded = encode_corpus(files)
        grammar = infer_grammar(
            encoded.symbols, dictionary.n_total, dictionary.word_count
        )
        root = grammar.body(grammar.root_id)
        for entry in encoded.file_table:
            assert root.count(entry.separator_code) == 1
        for body in grammar.rules[1:]:
            assert not any(grammar.is_separator(sym) for sym in body)


def test_expand_single_indirection():
    grammar = Grammar(5, 5, [[6], [0, 1]])
    assert expand(grammar) == [0, 1]


def test_expand_dangling_rule():
    with pytest.raises(GrammarError):
        expand(Grammar(5, 5, [[9]]))


def test_stats_reference_grammar():
    grammar = infer_grammar([0, 1, 2, 0, 1, 3, 0, 1, 2, 0, 1, 3, 0, 1, 0], 4)
    rules, symbols, depth = grammar_stats(grammar)
    assert rules == 3
    assert symbols == 4 + 4 + 2
    assert depth == 3


def test_stats_single_rule():
    grammar = Grammar(3, 3, [[0, 1, 2, 0]])
    assert grammar_stats(grammar) == (1, 4, 1)


def brute_depth(grammar: Grammar, rid: int) -> int:
    children = [sym for sym in grammar.body(rid) if grammar.is_rule(sym)]
    if not children:
        return 1
    return 1 + max(brute_depth(grammar, child) for child in children)


def test_stats_fuzz_against_recount():
    rng = random.Random(3)
    for _ in range(50):
        stream, n = random_stream(rng, max_len=300)
        grammar = infer_grammar(stream, n)
        rules, symbols, depth = grammar_stats(grammar)
        assert rules == len(grammar.rules)
        assert symbols == sum(len(body) for body in grammar.rules)
        assert depth == brute_depth(grammar, grammar.root_id)


def test_compression_monotonic_on_repetition():
    base = [0, 1, 2, 3, 4, 1, 0]
    for k in (2, 3, 8, 50):
        stream = base * k
        grammar = infer_grammar(stream, 5)
        assert sum(len(body) for body in grammar.rules) < len(stream)


def test_determinism():
    rng = random.Random(11)
    stream, n = random_stream(rng)
    assert infer_grammar(stream, n) == infer_grammar(stream, n)
