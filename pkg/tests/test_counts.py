import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from ngramlm.counts import (
    BOS,
    EOS,
    UNK,
    Vocabulary,
    build_vocab,
    context_total,
    count_ngrams,
    count_of_counts,
    follower_stats,
    oov_count,
)


def named(table):
    words = table.vocab.id_to_word
    return {k: {tuple(words[i] for i in g): c for g, c in table.counts[k].items()} for k in table.counts}


def test_build_vocab(t1):
    v = build_vocab(t1)
    assert v.words() == ["a", "b", "c"]
    assert v.id_to_word[:3] == [BOS, EOS, UNK]
    assert sorted(v.word_to_id.values()) == list(range(len(v)))
    assert build_vocab(t1) == v
    assert len(build_vocab([])) == 3


def test_build_vocab_rejects_reserved():
    with pytest.raises(ValueError):
        build_vocab([("a", "</s>")])


def test_t1_counts(t1, t1_vocab, t1_bigrams):
    assert named(t1_bigrams)[2] == {
        (BOS, "a"): 3, ("a", "b"): 2, ("a", "c"): 1, ("b", EOS): 2, ("c", EOS): 1,
    }
    assert named(count_ngrams(t1, t1_vocab, 1))[1] == {("a",): 3, ("b",): 2, ("c",): 1, (EOS,): 3}
    assert t1_bigrams.bos_count == 3


def test_empty_corpus():
    table = count_ngrams([], Vocabulary(), 3)
    assert all(not table.counts[k] for k in (1, 2, 3))


def test_unknown_token_in_training_is_error(t1_vocab):
    with pytest.raises(ValueError, match="'z'"):
        count_ngrams([("a", "z")], t1_vocab, 2)


def test_count_of_counts_t1(t1_bigrams):
    assert count_of_counts(t1_bigrams, 2) == {1: 2, 2: 2, 3: 1, 4: 0}


def test_follower_stats_t1(t1_bigrams, ids):
    s = follower_stats(t1_bigrams, ids("a"))
    assert (s.n1plus, s.n1, s.n2, s.n3) == (2, 1, 1, 0)
    assert follower_stats(t1_bigrams, (99,)).n1plus == 0
    assert follower_stats(t1_bigrams, ids("b")).left_n1plus == 1


def test_context_total_t1(t1_bigrams, ids, t1_vocab):
    assert context_total(t1_bigrams, ids("a")) == 3
    assert context_total(t1_bigrams, (t1_vocab.word_to_id[BOS],)) == 3
    assert context_total(t1_bigrams, (99,)) == 0


def test_oov_count(t1, t1_vocab):
    assert oov_count(t1_vocab, [("a", "d")]) == (1, 2)
    assert oov_count(t1_vocab, t1) == (0, 6)


def test_merge_equals_joint_count(t1, t1_vocab):
    left = count_ngrams(t1[:1], t1_vocab, 3)
    right = count_ngrams(t1[1:], t1_vocab, 3)
    joint = count_ngrams(t1, t1_vocab, 3)
    assert named(left.merge(right)) == named(joint)
    assert named(right.merge(left)) == named(joint)


def test_dump_sorted(t1, t1_vocab):
    rows = count_ngrams(t1, t1_vocab, 2).dump()
    assert rows == sorted(rows)
    assert (("a", "b"), 2) in rows


@pytest.mark.parametrize("seed", range(25))
def test_counts_match_naive_enumeration(seed):
    corpus = oracle.random_corpus(random.Random(seed))
    n = 1 + seed % 7
    table = count_ngrams(corpus, build_vocab(corpus), n)
    got = named(table)
    for k in range(1, n + 1):
        assert got[k] == oracle.naive_counts(corpus, k)


@pytest.mark.parametrize("seed", range(10))
def test_table_invariants(seed):
    corpus = oracle.random_corpus(random.Random(100 + seed))
    table = count_ngrams(corpus, build_vocab(corpus), 4)
    for k in range(2, 5):
        contexts = {g[:-1] for g in table.counts[k]}
        for ctx in contexts:
            stored = [g for g in table.counts[k] if g[:-1] == ctx]
            assert context_total(table, ctx) == sum(table.counts[k][g] for g in stored)
            stats = follower_stats(table, ctx)
            assert stats.n1plus == len(stored)
            assert stats.n1 <= stats.n1plus <= len(table.vocab)
        coc = count_of_counts(table, k)
        assert sum(coc.values()) <= len(table.counts[k])


sentences = st.lists(st.lists(st.sampled_from("abcd"), min_size=1, max_size=6).map(tuple), max_size=20)


@settings(max_examples=100, deadline=None)
@given(sentences, sentences)
def test_oov_monotone_in_training_data(train, extra):
    test = [("a", "e", "b"), ("d", "f")]
    before, _ = oov_count(build_vocab(train), test)
    after, _ = oov_count(build_vocab(train + extra), test)
    assert after <= before
