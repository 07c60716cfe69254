import math
import random

import pytest

from conftest import build_dag, random_corpus
from tadoc import kernels, oracle

REF_FILES = [("f0", "a b c a b d a b c a b d a b a")]


def test_word_count_reference_values():
    dictionary, _, dag = build_dag(REF_FILES)
    expected = {"a": 6, "b": 5, "c": 2, "d": 2}
    assert kernels.word_count_postorder(dag, dictionary) == expected
    assert kernels.word_count_preorder(dag, dictionary) == expected


def test_preorder_frequencies_reference_values():
    dictionary, _, dag = build_dag(REF_FILES)
    freq, order = kernels.preorder_schedule(dag)
    by_body = {tuple(dag.nodes[rid].elements): freq[rid] for rid in dag.nodes}
    assert by_body[(0, 1)] == 5  # the two-word rule occurs five times
    assert freq[dag.root_id] == 1
    mid = [f for body, f in by_body.items() if len(body) == 4 and body != (0, 1)]
    assert mid == [2]


def test_single_token_corpus():
    dictionary, _, dag = build_dag([("f0", "x")])
    assert kernels.word_count_postorder(dag, dictionary) == {"x": 1}


def test_chain_frequencies_are_one():
    # one file, no repetition: the root is the only rule
    dictionary, _, dag = build_dag([("f0", "p q r s t")])
    freq, order = kernels.preorder_schedule(dag)
    assert all(f == 1 for f in freq.values())
    assert order == [dag.root_id]


def test_work_queue_gate():
    rng = random.Random(123)
    for _ in range(30):
        dictionary, _, dag = build_dag(random_corpus(rng))
        freq, order = kernels.preorder_schedule(dag)
        # dequeued exactly once each
        assert sorted(order) == sorted(dag.nodes)
        # a node is dequeued only after every parent delivered: parents first
        position = {rid: i for i, rid in enumerate(order)}
        for rid, node in dag.nodes.items():
            for child in node.child_counts:
                assert position[rid] < position[child]
        # gate arithmetic: freq(c) == sum over parents of freq(p) * multiplicity
        for rid, node in dag.nodes.items():
            if rid == dag.root_id:
                assert freq[rid] == 1
                continue
            total = sum(
                freq[pid] * parent.child_counts[rid]
                for pid, parent in dag.nodes.items()
                if rid in parent.child_counts
            )
            assert freq[rid] == total


def test_sort_words_reference():
    dictionary, _, dag = build_dag(REF_FILES)
    assert kernels.sort_words(dag, dictionary) == [
        ("a", 6), ("b", 5), ("c", 2), ("d", 2),
    ]


def test_inverted_index_two_files():
    dictionary, _, dag = build_dag([("f0", "a b"), ("f1", "a c")])
    expected = {"a": [0, 1], "b": [0], "c": [1]}
    for variant in kernels.INDEX_VARIANTS:
        assert kernels.inverted_index(dag, dictionary, variant) == expected


def test_shared_rule_collects_union_of_files():
    # the same phrase occurs in three files; a rule for it is referenced from
    # all three segments, so its words index to the union of the file ids
    phrase = "lorem ipsum dolor sit"
    files = [
        ("f0", f"{phrase} alpha {phrase}"),
        ("f1", f"beta {phrase} beta {phrase}"),
        ("f2", f"{phrase} {phrase} gamma"),
    ]
    dictionary, _, dag = build_dag(files)
    for variant in kernels.INDEX_VARIANTS:
        index = kernels.inverted_index(dag, dictionary, variant)
        for word in ("lorem", "ipsum", "dolor", "sit"):
            assert index[word] == [0, 1, 2]
        assert index["alpha"] == [0]
        assert index["beta"] == [1]
        assert index["gamma"] == [2]


def test_unknown_variant():
    dictionary, _, dag = build_dag(REF_FILES)
    with pytest.raises(ValueError):
        kernels.inverted_index(dag, dictionary, "preorder_btree")


def test_term_vector_small():
    dictionary, _, dag = build_dag([("f0", "a a b")])
    assert kernels.term_vector(dag, dictionary) == [[("a", 2), ("b", 1)]]


def test_term_vector_reference_and_top_k():
    dictionary, _, dag = build_dag(REF_FILES)
    assert kernels.term_vector(dag, dictionary) == [
        [("a", 6), ("b", 5), ("c", 2), ("d", 2)]
    ]
    assert kernels.term_vector(dag, dictionary, top_k=2) == [[("a", 6), ("b", 5)]]


def test_sequence_count_reference():
    dictionary, _, dag = build_dag(REF_FILES)
    assert kernels.sequence_count(dag, dictionary, 3) == [
        {
            "a_b_a": 1, "a_b_c": 2, "a_b_d": 2, "b_c_a": 2,
            "b_d_a": 2, "c_a_b": 2, "d_a_b": 2,
        }
    ]


def test_sequence_count_short_file():
    dictionary, _, dag = build_dag([("f0", "a b"), ("f1", "a b c d")])
    tables = kernels.sequence_count(dag, dictionary, 3)
    assert tables[0] == {}
    assert tables[1] == {"a_b_c": 1, "b_c_d": 1}


def test_sequence_length_validation():
    dictionary, _, dag = build_dag(REF_FILES)
    with pytest.raises(ValueError):
        kernels.sequence_count(dag, dictionary, 1)


def test_window_count_conservation():
    rng = random.Random(17)
    for _ in range(20):
        files = random_corpus(rng)
        dictionary, encoded, dag = build_dag(files)
        for l in (2, 3, 5):
            tables = kernels.sequence_count(dag, dictionary, l)
            for entry, table in zip(encoded.file_table, tables):
                expected = max(entry.token_count - l + 1, 0)
                assert sum(table.values()) == expected


def test_ranked_inverted_index_single_and_disjoint():
    dictionary, _, dag = build_dag([("f0", "a b c a b c")])
    ranked = kernels.ranked_inverted_index(dag, dictionary)
    assert ranked["a_b_c"] == [(0, 2)]
    dictionary, _, dag = build_dag([("f0", "p q r"), ("f1", "x y z")])
    ranked = kernels.ranked_inverted_index(dag, dictionary)
    assert ranked == {"p_q_r": [(0, 1)], "x_y_z": [(1, 1)]}


def test_ranked_inverted_index_orders_by_count_then_file():
    files = [("f0", "a b c"), ("f1", "a b c a b c"), ("f2", "a b c")]
    dictionary, _, dag = build_dag(files)
    ranked = kernels.ranked_inverted_index(dag, dictionary)
    assert ranked["a_b_c"] == [(1, 2), (0, 1), (2, 1)]


def test_tfidf_reference_values():
    dictionary, _, dag = build_dag([("f0", "a b"), ("f1", "a c")])
    scores = kernels.tfidf(dag, dictionary)
    assert scores["a"] == {0: 0.0, 1: 0.0}
    assert scores["b"] == {0: 1 * math.log(2)}
    assert scores["c"] == {1: 1 * math.log(2)}


def test_traversal_order_matches_expansion():
    rng = random.Random(19)
    for _ in range(30):
        dictionary, encoded, dag = build_dag(random_corpus(rng))
        visited = list(kernels.depth_first_words(dag))
        assert visited == [s for s in encoded.symbols if s < dictionary.word_count]


def test_all_kernels_match_oracle():
    rng = random.Random(23)
    for _ in range(40):
        files = random_corpus(rng)
        for threshold in (0, 4, 100):
            dictionary, encoded, dag = build_dag(files, threshold)
            assert kernels.word_count_postorder(dag, dictionary) == oracle.word_count(files)
            assert kernels.word_count_preorder(dag, dictionary) == oracle.word_count(files)
            assert kernels.sort_words(dag, dictionary) == oracle.sort_words(files)
            for variant in kernels.INDEX_VARIANTS:
                assert kernels.inverted_index(dag, dictionary, variant) == \
                    oracle.inverted_index(files)
            assert kernels.term_vector(dag, dictionary) == oracle.term_vector(files)
            for l in (2, 3):
                assert kernels.sequence_count(dag, dictionary, l) == \
                    oracle.sequence_count(files, l)
            assert kernels.ranked_inverted_index(dag, dictionary) == \
                oracle.ranked_inverted_index(files)
            assert kernels.tfidf(dag, dictionary) == oracle.tfidf(files)


def test_word_count_conservation():
    rng = random.Random(29)
    for _ in range(20):
        files = random_corpus(rng)
        dictionary, encoded, dag = build_dag(files)
        counts = kernels.word_count_preorder(dag, dictionary)
        assert sum(counts.values()) == encoded.total_tokens
