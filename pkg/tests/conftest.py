import logging
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ngramlm.counts import build_vocab, count_ngrams  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def t1():
    return [("a", "b"), ("a", "c"), ("a", "b")]


@pytest.fixture
def t1_vocab(t1):
    return build_vocab(t1)


@pytest.fixture
def t1_bigrams(t1, t1_vocab):
    return count_ngrams(t1, t1_vocab, 2)


@pytest.fixture
def ids(t1_vocab):
    """Map space-separated words to an id tuple."""
    return lambda text: tuple(t1_vocab.word_to_id[w] for w in text.split())


@pytest.fixture(autouse=True)
def _quiet_estimator_warnings(caplog):
    caplog.set_level(logging.ERROR, logger="ngramlm")


def synthetic_sentences(count, seed=0, vocab_size=300):
    """Sentences from a seeded first-order Markov chain with Zipf-like rows.

    Enough local structure that higher orders help, so experiment trends
    are meaningful without shipping a real corpus.
    """
    import random

    rng = random.Random(seed)
    words = [f"k{i}" for i in range(vocab_size)]
    weights = [1.0 / (i + 1) for i in range(vocab_size)]
    rows = {w: rng.sample(words, 12) for w in words}
    out = []
    for _ in range(count):
        w = rng.choices(words, weights)[0]
        sent = [w]
        for _ in range(rng.randint(2, 12)):
            w = rng.choice(rows[w][: rng.randint(1, 12)]) if rng.random() < 0.8 else rng.choices(words, weights)[0]
            sent.append(w)
        out.append(tuple(sent))
    return out


@pytest.fixture
def corpus_files(tmp_path):
    """A small train/test pair on disk, as the experiment runner expects."""
    from ngramlm.corpus_prep import write_corpus

    train = synthetic_sentences(1500, seed=1)
    test = synthetic_sentences(150, seed=2)
    write_corpus(tmp_path / "train.txt", train)
    write_corpus(tmp_path / "test.txt", test)
    return tmp_path / "train.txt", tmp_path / "test.txt"
