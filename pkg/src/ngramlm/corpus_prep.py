"""Text preparation: line cleaning, sentence splitting, punctuation removal,
deduplication, seeded shuffling and train/test/subset carving.

Sentences are tuples of tokens. On disk a corpus is UTF-8 text with one
sentence per line and tokens separated by single spaces.
"""

import math
import random
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .counts import RESERVED

Sentence = tuple[str, ...]

DEFAULT_MARKUP_MARKERS = "|{}[]<>=*#"
DEFAULT_ABBREVIATIONS = frozenset(
    ["dr", "drs", "dra", "prof", "ir", "no", "tgl", "jl", "st", "ny", "sdr", "hlm", "mr", "mrs"]
)
TERMINATORS = ".!?"

_WS = re.compile(r"\s+")


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class LineRules:
    """Which raw lines count as unwanted.

    Blank lines, lines without any alphabetic character and lines whose
    first non-space character is in ``markup_markers`` are dropped, as is
    any line matching one of ``extra_patterns`` (regular expressions,
    searched anywhere in the line).
    """

    markup_markers: str = DEFAULT_MARKUP_MARKERS
    extra_patterns: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "_compiled", tuple(re.compile(p) for p in self.extra_patterns))

    def is_unwanted(self, line: str) -> bool:
        stripped = line.strip()
        if not stripped:
            return True
        if not any(ch.isalpha() for ch in stripped):
            return True
        if stripped[0] in self.markup_markers:
            return True
        return any(p.search(line) for p in self._compiled)


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.1
    seed: int = 0
    subset_sizes: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise CorpusError(f"test_fraction must be in (0, 1), got {self.test_fraction}")
        sizes = self.subset_sizes
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise CorpusError(f"subset sizes must be strictly ascending: {sizes}")


@dataclass(frozen=True)
class CorpusStats:
    sentence_count: int
    word_count: int


@dataclass
class PrepConfig:
    min_tokens: int = 2
    seed: int = 0
    punct_extra: str = ""
    abbreviations: frozenset = DEFAULT_ABBREVIATIONS
    rules: LineRules = field(default_factory=LineRules)


def decode_lines(data: bytes) -> tuple[list[str], int]:
    """Decode raw bytes line by line.

    Undecodable bytes become U+FFFD; the second return value is the number
    of lines where that happened.
    """
    lines = []
    replaced = 0
    for raw in data.splitlines():
        try:
            lines.append(raw.decode("utf-8"))
        except UnicodeDecodeError:
            lines.append(raw.decode("utf-8", errors="replace"))
            replaced += 1
    return lines, replaced


def clean_lines(lines: Iterable[str], rules: LineRules | None = None) -> list[str]:
    rules = rules or LineRules()
    return [line for line in lines if not rules.is_unwanted(line)]


def is_punctuation(ch: str, extra: str = "") -> bool:
    return unicodedata.category(ch).startswith("P") or ch in extra


def strip_punctuation(line: str, extra: str = "") -> str:
    """Replace punctuation with spaces and normalise whitespace.

    >>> strip_punctuation("a,b;c")
    'a b c'
    """
    out = "".join(" " if is_punctuation(ch, extra) else ch for ch in line)
    return _WS.sub(" ", out).strip()


def split_sentences(paragraph: str, abbreviations: Iterable[str] = DEFAULT_ABBREVIATIONS) -> list[str]:
    """Split a paragraph after tokens ending in ``.``, ``!`` or ``?``.

    A token such as ``Dr.`` whose lowercased stem is a known abbreviation
    does not end a sentence. Whitespace inside sentences is normalised to a
    single space.
    """
    abbrevs = {a.lower() for a in abbreviations}
    sentences = []
    current: list[str] = []
    for token in paragraph.split():
        current.append(token)
        if token[-1] not in TERMINATORS:
            continue
        if token[-1] == "." and token.rstrip(".").lower() in abbrevs:
            continue
        sentences.append(" ".join(current))
        current = []
    if current:
        sentences.append(" ".join(current))
    return sentences


def tokenize(sentence: str) -> Sentence:
    """Whitespace tokenization; reserved model markers are dropped."""
    return tuple(t for t in sentence.split() if t not in RESERVED)


def filter_short(sentences: Iterable[Sentence], min_tokens: int = 2) -> list[Sentence]:
    if min_tokens < 1:
        raise CorpusError("min_tokens must be >= 1")
    return [s for s in sentences if len(s) >= min_tokens]


def dedupe_and_shuffle(sentences: Iterable[Sentence], seed: int) -> list[Sentence]:
    """Drop duplicate sentences and return the survivors in a seeded order.

    The distinct sentences are put in canonical (sorted) order before the
    Fisher-Yates shuffle, so the result depends only on the set of
    sentences and the seed, not on the order they arrived in.
    """
    distinct = sorted(dict.fromkeys(sentences))
    random.Random(seed).shuffle(distinct)
    return distinct


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_train_test(sentences: Sequence[Sentence], spec: SplitSpec) -> tuple[list[Sentence], list[Sentence]]:
    """Partition ``sentences`` into train and test.

    The test side gets ``round(test_fraction * len(sentences))`` sentences
    chosen by a seeded shuffle of indices; both sides keep input order.
    """
    n = len(sentences)
    if n < 10:
        raise CorpusError(f"need at least 10 sentences to split, got {n}")
    n_test = _round_half_up(spec.test_fraction * n)
    if n_test == 0 or n_test == n:
        raise CorpusError(f"split of {n} sentences at {spec.test_fraction} leaves one side empty")
    order = list(range(n))
    random.Random(spec.seed).shuffle(order)
    test_idx = set(order[:n_test])
    train = [s for i, s in enumerate(sentences) if i not in test_idx]
    test = [s for i, s in enumerate(sentences) if i in test_idx]
    return train, test


def make_subsets(train: Sequence[Sentence], sizes: Sequence[int]) -> list[list[Sentence]]:
    """Carve consecutive, pairwise-disjoint slices of the requested sizes."""
    need = sum(sizes)
    if need > len(train):
        raise CorpusError(
            f"subsets need {need} sentences but only {len(train)} available "
            f"(short by {need - len(train)})"
        )
    out = []
    start = 0
    for size in sizes:
        if size < 0:
            raise CorpusError(f"negative subset size {size}")
        out.append(list(train[start:start + size]))
        start += size
    return out


def corpus_stats(sentences: Iterable[Sentence]) -> CorpusStats:
    n_sent = 0
    n_words = 0
    for s in sentences:
        n_sent += 1
        n_words += len(s)
    return CorpusStats(n_sent, n_words)


def prepare(lines: Iterable[str], config: PrepConfig | None = None) -> list[Sentence]:
    """Run the whole cleaning pipeline on raw paragraph lines.

    Sentences that would themselves be rejected as unwanted lines are
    dropped too, which makes the pipeline idempotent on its own output.
    """
    config = config or PrepConfig()
    sentences = []
    for paragraph in clean_lines(lines, config.rules):
        for raw in split_sentences(paragraph, config.abbreviations):
            text = strip_punctuation(raw, config.punct_extra)
            if config.rules.is_unwanted(text):
                continue
            sentences.append(tokenize(text))
    sentences = filter_short(sentences, config.min_tokens)
    return dedupe_and_shuffle(sentences, config.seed)


def read_corpus(path: str | Path) -> list[Sentence]:
    with open(path, encoding="utf-8") as fp:
        return [tuple(line.split()) for line in fp if line.strip()]


def format_corpus(sentences: Iterable[Sentence]) -> str:
    return "".join(" ".join(s) + "\n" for s in sentences)


def write_corpus(path: str | Path, sentences: Iterable[Sentence]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fp:
        fp.write(format_corpus(sentences))


def read_abbreviations(path: str | Path) -> frozenset:
    with open(path, encoding="utf-8") as fp:
        return frozenset(line.strip().rstrip(".").lower() for line in fp if line.strip())
