"""Backoff model assembly, sentence scoring and perplexity."""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .counts import BOS_ID, EOS_ID, Gram, NGramCountTable, Vocabulary
from .smoothing import DiscountSet, SmoothedOrder, smooth, spread_base

log = logging.getLogger(__name__)

LOG_ZERO = -99.0
DEGENERATE_EPS = 1e-12
LOG2_10 = math.log2(10)


class OutOfVocabulary(KeyError):
    """Raised when asked for the probability of a word the model cannot predict."""


def quantize(logvalue: float) -> float:
    """Round a log10 value to the 7 significant digits the ARPA writer keeps."""
    if logvalue <= LOG_ZERO or math.isinf(logvalue):
        return LOG_ZERO
    q = float(f"{logvalue:.7g}")
    return 0.0 if q == 0 else q


def log10_or_zero(p: float) -> float:
    return math.log10(p) if p > 0 else LOG_ZERO


@dataclass
class BackoffTables:
    """Exact (linear-domain) probabilities and backoff weights per order."""

    probs: dict[int, dict[Gram, float]]
    alphas: dict[int, dict[Gram, float]]

    def prob(self, context: Gram, word: int) -> float:
        scale = 1.0
        ctx = context
        while True:
            k = len(ctx) + 1
            p = self.probs[k].get(ctx + (word,))
            if p is not None:
                return scale * p
            if not ctx:
                return 0.0
            scale *= self.alphas[k - 1].get(ctx, 1.0)
            ctx = ctx[1:]


def backoff_tables(orders: Sequence[SmoothedOrder], predictable: Sequence[int], epsilon: float = 1e-10) -> BackoffTables:
    """Turn smoothed orders into backoff probabilities and weights.

    Each context's held-back mass is rescaled by the lower-order mass of the
    words it did not see, so every context's distribution sums to one.
    """
    n = len(orders)
    tables = BackoffTables({1: {(w,): p for w, p in spread_base(orders[0], predictable, epsilon).items()}}, {})
    for k in range(2, n + 1):
        sm = orders[k - 1]
        probs = {g: p for g, p in sm.probs.items() if p > 0}
        tables.probs[k] = probs
        alphas: dict[Gram, float] = {}
        seen_by_ctx: dict[Gram, list[int]] = {ctx: [] for ctx in sm.gamma}
        for g in probs:
            seen_by_ctx[g[:-1]].append(g[-1])
        degenerate = 0
        for ctx, gamma in sm.gamma.items():
            lower = ctx[1:]
            denom = 1.0 - sum(tables.prob(lower, w) for w in seen_by_ctx[ctx])
            if denom < DEGENERATE_EPS:
                degenerate += 1
                kept = 1.0 - gamma
                if kept > 0:
                    for w in seen_by_ctx[ctx]:
                        probs[ctx + (w,)] /= kept
                alphas[ctx] = 1.0
            else:
                alphas[ctx] = gamma / denom
        if degenerate:
            log.warning(
                "order %d: %d context(s) whose seen words cover all lower-order mass; "
                "backoff weight set to 1 and seen probabilities rescaled", k, degenerate
            )
        tables.alphas[k - 1] = alphas
    return tables


class BackoffModel:
    """An n-gram backoff model with log10 probabilities and backoff weights.

    ``logprobs[k]`` maps k-gram id tuples to log10 probabilities and
    ``logbows[k]`` maps k-gram contexts to log10 backoff weights. Values are
    held at ARPA precision so a model and its serialised form score alike.
    """

    def __init__(self, order: int, vocab: Vocabulary, logprobs: dict[int, dict[Gram, float]], logbows: dict[int, dict[Gram, float]]):
        if order < 1:
            raise ValueError("model order must be >= 1")
        self.order = order
        self.vocab = vocab
        self.logprobs = logprobs
        self.logbows = logbows
        for k in range(1, order + 1):
            self.logprobs.setdefault(k, {})
        for k in range(1, order):
            self.logbows.setdefault(k, {})

    @classmethod
    def from_tables(cls, tables: BackoffTables, vocab: Vocabulary) -> "BackoffModel":
        """Store ``tables`` at ARPA precision.

        Probabilities are rounded first; each backoff weight is then
        re-derived from the rounded values of its own order and the finished
        lower orders, so rounding errors do not accumulate up the recursion.
        Whatever rounding leaves over in a distribution is folded into its
        most probable entry, keeping every context within ~1e-7 of one.
        """
        order = len(tables.probs)
        logprobs = {k: {g: quantize(log10_or_zero(p)) for g, p in tables.probs[k].items()} for k in tables.probs}
        model = cls(order, vocab, logprobs, {})
        unigrams = logprobs[1]
        if unigrams:
            top = max(unigrams, key=lambda g: (unigrams[g], g))
            rest = math.fsum(10.0 ** lp for g, lp in unigrams.items() if g != top)
            if rest < 1.0:
                unigrams[top] = quantize(math.log10(1.0 - rest))
        mass = {(): math.fsum(10.0 ** lp for lp in unigrams.values())}

        def total(ctx: Gram) -> float:
            while ctx not in mass:
                ctx = ctx[1:]
            return mass[ctx]

        seen_by_ctx: dict[Gram, list[Gram]] = {}
        for k in range(2, order + 1):
            seen_by_ctx.clear()
            for g in logprobs[k]:
                seen_by_ctx.setdefault(g[:-1], []).append(g)
            bows = model.logbows[k - 1]
            for ctx, exact in tables.alphas[k - 1].items():
                grams = seen_by_ctx.get(ctx, [])
                kept = math.fsum(10.0 ** logprobs[k][g] for g in grams)
                lower = ctx[1:]
                unseen = total(lower) - math.fsum(10.0 ** model.logprob_ids(lower, g[-1]) for g in grams)
                alpha = (1.0 - kept) / unseen if unseen > DEGENERATE_EPS and kept < 1.0 else exact
                bows[ctx] = quantize(log10_or_zero(alpha))
                backed_off = 10.0 ** bows[ctx] * max(unseen, 0.0)
                if grams:
                    # a rounded weight above 10 can be off by ~1e-6 relative; the
                    # likeliest seen entry rounds ten times finer, so it absorbs that
                    top = max(grams, key=lambda g: (logprobs[k][g], g))
                    old = 10.0 ** logprobs[k][top]
                    new = old + (1.0 - kept - backed_off)
                    if new > 0:
                        logprobs[k][top] = quantize(math.log10(new))
                        kept += 10.0 ** logprobs[k][top] - old
                mass[ctx] = kept + backed_off
        return model

    def predictable(self) -> set[str]:
        words = self.vocab.id_to_word
        return {words[g[0]] for g in self.logprobs[1]}

    def can_predict(self, word_id: int) -> bool:
        return (word_id,) in self.logprobs[1]

    def contexts(self) -> Iterable[Gram]:
        for k in range(1, self.order):
            yield from self.logbows[k]

    def logprob_ids(self, context: Sequence[int], word: int) -> float:
        """log10 P(word | context), following the backoff recursion."""
        n = self.order
        ctx = tuple(context[max(0, len(context) - n + 1):]) if n > 1 else ()
        bow = 0.0
        while True:
            k = len(ctx) + 1
            lp = self.logprobs[k].get(ctx + (word,))
            if lp is not None:
                return bow + lp
            if not ctx:
                raise OutOfVocabulary(self.vocab.id_to_word[word])
            bow += self.logbows[k - 1].get(ctx, 0.0)
            ctx = ctx[1:]


def build_backoff_model(
    counts: NGramCountTable,
    method: str,
    order: int,
    *,
    raw_lower: bool = False,
    epsilon: float = 1e-10,
    min_counts: Mapping[int, int] | None = None,
) -> BackoffModel:
    model, _, _ = build_with_details(
        counts, method, order, raw_lower=raw_lower, epsilon=epsilon, min_counts=min_counts
    )
    return model


def build_with_details(
    counts: NGramCountTable,
    method: str,
    order: int,
    *,
    raw_lower: bool = False,
    epsilon: float = 1e-10,
    min_counts: Mapping[int, int] | None = None,
) -> tuple[BackoffModel, BackoffTables, dict[int, DiscountSet]]:
    """Like :func:`build_backoff_model` but also returns the exact tables and discounts."""
    orders, discounts = smooth(counts, method, order, raw_lower, min_counts)
    tables = backoff_tables(orders, counts.vocab.predictable_ids(), epsilon)
    return BackoffModel.from_tables(tables, counts.vocab), tables, discounts


def prob_backoff(model: BackoffModel, context: Sequence[str], word: str) -> float:
    wid = model.vocab.word_to_id.get(word)
    if wid is None or not model.can_predict(wid):
        raise OutOfVocabulary(word)
    ctx = [model.vocab.id(w) for w in context]
    return 10.0 ** model.logprob_ids(ctx, wid)


def sentence_logprob(model: BackoffModel, sentence: Sequence[str]) -> tuple[float, int, int]:
    """Return ``(log10 prob, scored events, skipped OOV tokens)``.

    The end marker is scored; OOV targets are skipped but stay in the
    history, where they simply fail to match any stored context.
    """
    ids = [BOS_ID] + [model.vocab.id(w) for w in sentence] + [EOS_ID]
    n = model.order
    total = 0.0
    events = oov = 0
    for i in range(1, len(ids)):
        wid = ids[i]
        if not model.can_predict(wid):
            oov += 1
            continue
        total += model.logprob_ids(ids[max(0, i - n + 1):i], wid)
        events += 1
    return total, events, oov


@dataclass(frozen=True)
class PerplexityReport:
    logprob_sum: float
    words: int
    sentences: int
    oov: int
    cross_entropy: float
    perplexity: float

    @classmethod
    def from_totals(cls, logprob_sum: float, words: int, sentences: int, oov: int) -> "PerplexityReport":
        if words <= 0:
            raise ValueError("no scorable events in the test set (everything was OOV)")
        h = -logprob_sum * LOG2_10 / words
        return cls(logprob_sum, words, sentences, oov, h, 2.0 ** h)

    def lines(self) -> list[str]:
        return [
            f"sentences\t{self.sentences}",
            f"words\t{self.words}",
            f"oov\t{self.oov}",
            f"logprob10\t{self.logprob_sum:.6g}",
            f"entropy_bits\t{self.cross_entropy:.6g}",
            f"ppl\t{self.perplexity:.6g}",
        ]


def perplexity(model: BackoffModel, test: Iterable[Sequence[str]]) -> PerplexityReport:
    logprob = 0.0
    words = sentences = oov = 0
    for sentence in test:
        lp, ev, ov = sentence_logprob(model, sentence)
        logprob += lp
        words += ev
        oov += ov
        sentences += 1
    return PerplexityReport.from_totals(logprob, words, sentences, oov)


def compare_models(model_a: BackoffModel, model_b: BackoffModel, test: Sequence[Sequence[str]]) -> tuple[float, float, float]:
    """Perplexities of two models on the same test set and their difference (a - b)."""
    if model_a.predictable() != model_b.predictable():
        raise ValueError("models have different vocabularies; perplexities would not be comparable")
    ppl_a = perplexity(model_a, test).perplexity
    ppl_b = perplexity(model_b, test).perplexity
    return ppl_a, ppl_b, ppl_a - ppl_b
