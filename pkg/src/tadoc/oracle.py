"""Baseline kernels over uncompressed text.

Ground truth for the equivalence tests and the `baseline`/`gzip` engines of
the benchmark. Deliberately plain: single or double passes over raw token
lists, no grammar, no memoization. Tokenization and output ordering match
the compressed path exactly.

The `*_tokens` functions take pre-tokenized files so the benchmark can time
tokenization (init) apart from counting (compute); the plain-named wrappers
take (name, text) pairs.
"""

from __future__ import annotations

import math
from collections import Counter

from .corpus import tokenize
from .kernels import rank_gram_files


def token_lists(files: list[tuple[str, str]], lowercase: bool = False):
    return [tokenize(text, lowercase) for _, text in files]


def word_count_tokens(lists: list[list[str]]) -> dict[str, int]:
    counts: Counter = Counter()
    for tokens in lists:
        counts.update(tokens)
    return {word: counts[word] for word in sorted(counts)}


def sort_words_tokens(lists: list[list[str]]) -> list[tuple[str, int]]:
    return list(word_count_tokens(lists).items())


def inverted_index_tokens(lists: list[list[str]]) -> dict[str, list[int]]:
    index: dict[str, set[int]] = {}
    for file_id, tokens in enumerate(lists):
        for token in tokens:
            index.setdefault(token, set()).add(file_id)
    return {word: sorted(index[word]) for word in sorted(index)}


def term_vector_tokens(lists, top_k=None) -> list[list[tuple[str, int]]]:
    out = []
    for tokens in lists:
        counts = Counter(tokens)
        ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
        out.append(ranked[:top_k] if top_k is not None else ranked)
    return out


def sequence_count_tokens(lists, l=3) -> list[dict[str, int]]:
    if l < 2:
        raise ValueError(f"sequence length must be >= 2, got {l}")
    out = []
    for tokens in lists:
        counts: Counter = Counter()
        for i in range(len(tokens) - l + 1):
            counts["_".join(tokens[i : i + l])] += 1
        out.append({gram: counts[gram] for gram in sorted(counts)})
    return out


def ranked_inverted_index_tokens(lists, l=3):
    return rank_gram_files(sequence_count_tokens(lists, l))


def tfidf_tokens(lists) -> dict[str, dict[int, float]]:
    file_count = len(lists)
    df: Counter = Counter()
    per_file = []
    for tokens in lists:
        counts = Counter(tokens)
        per_file.append(counts)
        df.update(set(counts))
    scores: dict[str, dict[int, float]] = {}
    for file_id, counts in enumerate(per_file):
        for word, count in counts.items():
            scores.setdefault(word, {})[file_id] = count * math.log(
                file_count / df[word]
            )
    return {word: dict(sorted(scores[word].items())) for word in sorted(scores)}


def word_count(files, lowercase=False):
    return word_count_tokens(token_lists(files, lowercase))


def sort_words(files, lowercase=False):
    return sort_words_tokens(token_lists(files, lowercase))


def inverted_index(files, lowercase=False):
    return inverted_index_tokens(token_lists(files, lowercase))


def term_vector(files, lowercase=False, top_k=None):
    return term_vector_tokens(token_lists(files, lowercase), top_k)


def sequence_count(files, l=3, lowercase=False):
    return sequence_count_tokens(token_lists(files, lowercase), l)


def ranked_inverted_index(files, l=3, lowercase=False):
    return ranked_inverted_index_tokens(token_lists(files, lowercase), l)


def tfidf(files, lowercase=False):
    return tfidf_tokens(token_lists(files, lowercase))
