"""Per-order smoothed distributions: MLE, Witten-Bell and modified Kneser-Ney.

Every estimator returns a :class:`SmoothedOrder`: the discounted
probability of each seen n-gram plus, per context, the probability mass
held back for unseen followers. Turning the held-back mass into backoff
weights is the model builder's job.
"""

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .counts import BOS_ID, Gram, NGramCountTable, count_of_counts_from

log = logging.getLogger(__name__)

KN = "kn"
WB = "wb"
METHODS = (KN, WB)

# Minimum counts that common toolkits apply by default: singletons are kept
# for unigrams and bigrams but dropped from order 3 upward.
TOOLKIT_MIN_COUNTS = {1: 1, 2: 1, 3: 2}


class DiscountEstimationError(ValueError):
    pass


@dataclass(frozen=True)
class DiscountSet:
    d1: float
    d2: float
    d3plus: float

    def __call__(self, count: float) -> float:
        if count <= 0:
            return 0.0
        if count == 1:
            return self.d1
        if count == 2:
            return self.d2
        return self.d3plus


@dataclass
class SmoothedOrder:
    order: int
    probs: dict[Gram, float] = field(default_factory=dict)
    gamma: dict[Gram, float] = field(default_factory=dict)

    def contexts(self) -> dict[Gram, dict[int, float]]:
        out: dict[Gram, dict[int, float]] = defaultdict(dict)
        for gram, p in self.probs.items():
            out[gram[:-1]][gram[-1]] = p
        return dict(out)


def mle_prob(table: NGramCountTable, context: Sequence[int], word: int) -> float:
    context = tuple(context)
    fol = table.followers(len(context) + 1).get(context)
    if not fol:
        raise ValueError(f"context {context} was never seen; MLE is undefined")
    return fol.get(word, 0) / sum(fol.values())


def estimate_discounts(coc: dict[int, int], order: int | None = None) -> DiscountSet:
    """Closed-form D1, D2, D3+ from the count-of-counts n1..n4."""
    n1, n2, n3, n4 = (coc.get(j, 0) for j in (1, 2, 3, 4))
    where = f" at order {order}" if order is not None else ""
    if n1 == 0 or n2 == 0:
        raise DiscountEstimationError(
            f"cannot estimate Kneser-Ney discounts{where}: n1={n1}, n2={n2} "
            "(corpus too small or too uniform)"
        )
    y = n1 / (n1 + 2 * n2)
    d1 = 1 - 2 * y * n2 / n1
    d2 = 2 - 3 * y * n3 / n2
    if n3 == 0:
        log.warning("no n-grams with count 3%s; D3+ estimated without the n4/n3 term", where)
        d3 = 3.0
    else:
        d3 = 3 - 4 * y * n4 / n3
    clamped = (min(max(d1, 0.0), 1.0), min(max(d2, 0.0), 2.0), min(max(d3, 0.0), 3.0))
    if clamped != (d1, d2, d3):
        log.warning("discounts%s clamped from %s to %s", where, (d1, d2, d3), clamped)
    return DiscountSet(*clamped)


def kn_counts(table: NGramCountTable, k: int, highest: bool, raw_lower: bool = False) -> dict[Gram, int]:
    """The counts modified Kneser-Ney smooths at order k.

    Raw counts at the highest order; left-continuation counts below it
    unless ``raw_lower`` asks for the raw counts everywhere.
    """
    if highest or raw_lower or k == table.order:
        return table.counts[k]
    return table.continuation_counts(k)


def estimate_all_discounts(table: NGramCountTable, order: int, raw_lower: bool = False) -> dict[int, DiscountSet]:
    out = {}
    for k in range(2, order + 1):
        counts = kn_counts(table, k, k == order, raw_lower)
        out[k] = estimate_discounts(count_of_counts_from(counts.values()), k)
    return out


def _group(counts: dict[Gram, int]) -> dict[Gram, dict[int, int]]:
    out: dict[Gram, dict[int, int]] = defaultdict(dict)
    for gram, c in counts.items():
        out[gram[:-1]][gram[-1]] = c
    return out


def wb_smooth(table: NGramCountTable, k: int) -> SmoothedOrder:
    out = SmoothedOrder(k)
    for ctx, fol in _group(table.counts[k]).items():
        total = sum(fol.values())
        distinct = len(fol)
        denom = distinct + total
        for w, c in fol.items():
            out.probs[ctx + (w,)] = c / denom
        out.gamma[ctx] = distinct / denom
    return out


def mkn_smooth(
    table: NGramCountTable,
    discounts: DiscountSet,
    k: int,
    highest: bool,
    raw_lower: bool = False,
) -> SmoothedOrder:
    out = SmoothedOrder(k)
    for ctx, fol in _group(kn_counts(table, k, highest, raw_lower)).items():
        total = sum(fol.values())
        if total == 0:
            continue
        n1 = n2 = n3 = 0
        for w, c in fol.items():
            out.probs[ctx + (w,)] = (c - discounts(c)) / total
            if c == 1:
                n1 += 1
            elif c == 2:
                n2 += 1
            else:
                n3 += 1
        out.gamma[ctx] = (discounts.d1 * n1 + discounts.d2 * n2 + discounts.d3plus * n3) / total
    return out


def lowest_order_distribution(table: NGramCountTable, method: str, raw_lower: bool = False) -> SmoothedOrder:
    """Unigram base of the backoff recursion (before the mass is spread).

    Witten-Bell keeps its usual held-back mass; Kneser-Ney uses
    undiscounted continuation counts when bigram counts exist.
    """
    if method == WB:
        return wb_smooth(table, 1)
    if method != KN:
        raise ValueError(f"unknown smoothing method {method!r}")
    counts = kn_counts(table, 1, table.order == 1, raw_lower)
    total = sum(counts.values())
    out = SmoothedOrder(1)
    if total:
        out.probs = {g: c / total for g, c in counts.items()}
        out.gamma[()] = 0.0
    return out


def spread_base(base: SmoothedOrder, predictable: Sequence[int], epsilon: float = 1e-10) -> dict[int, float]:
    """Final unigram probabilities over every predictable id.

    Held-back mass goes uniformly to words the base gave no probability,
    or to all predictable words when there are none. If nothing is held
    back but some word has zero probability, ``epsilon`` of the total is
    taken from the seen words and shared among the zero-probability ones.
    """
    probs = {w: base.probs.get((w,), 0.0) for w in predictable}
    probs.pop(BOS_ID, None)
    leftover = base.gamma.get((), 1.0 - sum(probs.values()))
    zeros = [w for w, p in probs.items() if p <= 0.0]
    if leftover > 0:
        targets = zeros or list(probs)
        share = leftover / len(targets)
        for w in targets:
            probs[w] += share
    elif zeros:
        log.warning("flooring %d zero-probability unigrams with epsilon=%g", len(zeros), epsilon)
        scale = 1.0 - epsilon
        for w in probs:
            probs[w] *= scale
        for w in zeros:
            probs[w] = epsilon / len(zeros)
    return probs


def min_count_for(min_counts: Mapping[int, int] | None, k: int) -> int:
    """Cutoff for order k; the entry for the highest listed order covers all above it."""
    if not min_counts:
        return 1
    listed = [o for o in min_counts if o <= k]
    return min_counts[max(listed)] if listed else 1


def apply_min_count(sm: SmoothedOrder, counts: dict[Gram, int], min_count: int) -> SmoothedOrder:
    """Drop n-grams whose smoothed count is below ``min_count``.

    Their discounted probability joins the context's held-back mass, so
    they are reached through backoff and each context still sums to one.
    Discounts are left as estimated from the full count-of-counts.
    """
    if min_count <= 1:
        return sm
    for gram, c in counts.items():
        if c < min_count and gram in sm.probs:
            sm.gamma[gram[:-1]] += sm.probs.pop(gram)
    return sm


def validate_min_counts(min_counts: Mapping[int, int] | None) -> None:
    if not min_counts:
        return
    if any(k < 1 or v < 1 for k, v in min_counts.items()):
        raise ValueError(f"minimum counts must be >= 1 for orders >= 1: {dict(min_counts)}")
    if min_count_for(min_counts, 1) != 1:
        raise ValueError("a unigram minimum count above 1 is not supported")


def smooth(
    table: NGramCountTable,
    method: str,
    order: int,
    raw_lower: bool = False,
    min_counts: Mapping[int, int] | None = None,
) -> tuple[list[SmoothedOrder], dict[int, DiscountSet]]:
    """All orders 1..order for ``method``; index 0 of the list is the unigram base.

    ``min_counts`` optionally maps orders to count cutoffs (see
    :func:`apply_min_count`); by default every seen n-gram is kept.
    """
    validate_min_counts(min_counts)
    if order > table.order:
        raise ValueError(f"counts only go up to order {table.order}, asked for {order}")
    table = table.truncate(order) if order < table.order else table
    discounts: dict[int, DiscountSet] = {}
    if method == KN:
        discounts = estimate_all_discounts(table, order, raw_lower)
    orders = [lowest_order_distribution(table, method, raw_lower)]
    for k in range(2, order + 1):
        if method == WB:
            sm, counts = wb_smooth(table, k), table.counts[k]
        else:
            sm = mkn_smooth(table, discounts[k], k, k == order, raw_lower)
            counts = kn_counts(table, k, k == order, raw_lower)
        orders.append(apply_min_count(sm, counts, min_count_for(min_counts, k)))
    return orders, discounts
