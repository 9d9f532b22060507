"""Vocabulary and exact n-gram statistics."""

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
RESERVED = (BOS, EOS, UNK)
BOS_ID, EOS_ID, UNK_ID = 0, 1, 2

Gram = tuple[int, ...]


class Vocabulary:
    """Bidirectional word/id map.

    Ids 0-2 are the sentence-start, sentence-end and unknown markers; surface
    words follow densely in first-occurrence order.
    """

    def __init__(self, words: Iterable[str] = ()):
        self.id_to_word: list[str] = list(RESERVED)
        self.word_to_id: dict[str, int] = {w: i for i, w in enumerate(RESERVED)}
        for w in words:
            self.add(w)

    def add(self, word: str) -> int:
        idx = self.word_to_id.get(word)
        if idx is None:
            idx = len(self.id_to_word)
            self.word_to_id[word] = idx
            self.id_to_word.append(word)
        return idx

    def __len__(self):
        return len(self.id_to_word)

    def __contains__(self, word):
        return word in self.word_to_id

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.id_to_word == other.id_to_word

    def id(self, word: str) -> int:
        return self.word_to_id.get(word, UNK_ID)

    def word(self, idx: int) -> str:
        return self.id_to_word[idx]

    def words(self) -> list[str]:
        """Surface words, excluding the reserved markers."""
        return self.id_to_word[len(RESERVED):]

    def predictable_ids(self) -> list[int]:
        """Ids a model can predict: every surface word plus the end marker."""
        return [EOS_ID] + list(range(len(RESERVED), len(self.id_to_word)))


def build_vocab(train: Iterable[Sequence[str]]) -> Vocabulary:
    vocab = Vocabulary()
    for sentence in train:
        for w in sentence:
            if w in RESERVED:
                raise ValueError(f"reserved marker {w!r} appears as a surface token")
            vocab.add(w)
    return vocab


class NGramCountTable:
    """Raw n-gram counts for orders 1..order.

    ``counts[k]`` maps k-gram id tuples to counts. Every sentence is padded
    with one start marker (context only) and one end marker (an event), so
    the start-marker unigram is never stored; its total is ``bos_count``.
    """

    def __init__(self, order: int, vocab: Vocabulary):
        if order < 1:
            raise ValueError("order must be >= 1")
        self.order = order
        self.vocab = vocab
        self.counts: dict[int, dict[Gram, int]] = {k: {} for k in range(1, order + 1)}
        self.bos_count = 0
        self._followers = None
        self._predecessors = None

    def __getitem__(self, gram: Gram) -> int:
        return self.counts[len(gram)].get(tuple(gram), 0)

    def add_sentence(self, ids: Sequence[int]) -> None:
        padded = (BOS_ID, *ids, EOS_ID)
        self.bos_count += 1
        n = self.order
        counts = self.counts
        for end in range(1, len(padded)):
            for k in range(1, min(n, end + 1) + 1):
                gram = padded[end - k + 1:end + 1]
                table = counts[k]
                table[gram] = table.get(gram, 0) + 1
        self._followers = self._predecessors = None

    def merge(self, other: "NGramCountTable") -> "NGramCountTable":
        if other.order != self.order or other.vocab != self.vocab:
            raise ValueError("can only merge tables of the same order and vocabulary")
        out = NGramCountTable(self.order, self.vocab)
        for k in self.counts:
            merged = Counter(self.counts[k])
            merged.update(other.counts[k])
            out.counts[k] = dict(merged)
        out.bos_count = self.bos_count + other.bos_count
        return out

    def truncate(self, order: int) -> "NGramCountTable":
        """A view of the same counts restricted to orders 1..order."""
        if not 1 <= order <= self.order:
            raise ValueError(f"cannot truncate order {self.order} table to {order}")
        out = NGramCountTable(order, self.vocab)
        out.counts = {k: self.counts[k] for k in range(1, order + 1)}
        out.bos_count = self.bos_count
        return out

    def followers(self, k: int) -> dict[Gram, dict[int, int]]:
        """Context (length k-1) -> {word: count} for order-k grams."""
        if self._followers is None:
            self._followers = {}
        if k not in self._followers:
            fol: dict[Gram, dict[int, int]] = defaultdict(dict)
            for gram, c in self.counts[k].items():
                fol[gram[:-1]][gram[-1]] = c
            self._followers[k] = dict(fol)
        return self._followers[k]

    def continuation_counts(self, k: int) -> dict[Gram, int]:
        """N1+(. g) for every stored k-gram g, from the order k+1 table.

        k-grams beginning with the start marker have no possible
        predecessor and keep their raw count instead.
        """
        if k >= self.order:
            raise ValueError(f"continuation counts for order {k} need order {k + 1} counts")
        if self._predecessors is None:
            self._predecessors = {}
        if k not in self._predecessors:
            cont: dict[Gram, int] = defaultdict(int)
            for gram in self.counts[k + 1]:
                cont[gram[1:]] += 1
            result = {}
            for gram, c in self.counts[k].items():
                result[gram] = c if gram[0] == BOS_ID else cont[gram]
            self._predecessors[k] = result
        return self._predecessors[k]

    def dump(self):
        """Yield ``(tokens, count)`` sorted by token sequence, all orders."""
        words = self.vocab.id_to_word
        rows = []
        for k in range(1, self.order + 1):
            for gram, c in self.counts[k].items():
                rows.append((tuple(words[i] for i in gram), c))
        rows.sort()
        return rows


def count_ngrams(train: Iterable[Sequence[str]], vocab: Vocabulary, order: int) -> NGramCountTable:
    table = NGramCountTable(order, vocab)
    lookup = vocab.word_to_id
    for sentence in train:
        try:
            ids = [lookup[w] for w in sentence]
        except KeyError as e:
            raise ValueError(f"token {e.args[0]!r} not in the training vocabulary") from None
        if any(i < len(RESERVED) for i in ids):
            raise ValueError(f"reserved marker in training sentence {' '.join(sentence)!r}")
        table.add_sentence(ids)
    return table


def count_of_counts_from(values: Iterable[int], max_j: int = 4) -> dict[int, int]:
    """n_j = number of entries with count exactly j, for j = 1..max_j."""
    hist = Counter(values)
    return {j: hist.get(j, 0) for j in range(1, max_j + 1)}


def count_of_counts(table: NGramCountTable, k: int) -> dict[int, int]:
    if not 1 <= k <= table.order:
        raise ValueError(f"order {k} outside 1..{table.order}")
    return count_of_counts_from(table.counts[k].values())


@dataclass(frozen=True)
class FollowerStats:
    n1: int
    n2: int
    n3: int
    n1plus: int
    left_n1plus: int


def follower_stats(table: NGramCountTable, context: Sequence[int]) -> FollowerStats:
    """Follower statistics of ``context`` and its left-continuation count.

    ``n1``..``n3`` and ``n1plus`` describe the words seen after the context;
    ``left_n1plus`` is the number of distinct words seen before it.
    """
    context = tuple(context)
    k = len(context) + 1
    if k > table.order:
        raise ValueError(f"context of length {len(context)} too long for order {table.order}")
    fol = table.followers(k).get(context, {})
    hist = Counter(fol.values())
    left = 0
    if context and len(context) + 1 <= table.order:
        left = sum(1 for g in table.counts[len(context) + 1] if g[1:] == context)
    return FollowerStats(hist[1], hist[2], hist[3], len(fol), left)


def context_total(table: NGramCountTable, context: Sequence[int]) -> int:
    context = tuple(context)
    k = len(context) + 1
    if k > table.order:
        raise ValueError(f"context of length {len(context)} too long for order {table.order}")
    return sum(table.followers(k).get(context, {}).values())


def oov_count(vocab: Vocabulary, test: Iterable[Sequence[str]]) -> tuple[int, int]:
    oov = total = 0
    for sentence in test:
        for w in sentence:
            if w in RESERVED:
                continue
            total += 1
            if w not in vocab.word_to_id:
                oov += 1
    return oov, total
