"""Command-line entry point: ``ngramlm <command> ...``."""

import argparse
import logging
import random
import sys
from pathlib import Path

from . import corpus_prep as prep
from .arpa import read_arpa, write_arpa
from .counts import build_vocab, count_ngrams
from .experiments import ExperimentGrid, run_grid, size_label, write_outputs
from .model import build_with_details, perplexity
from .smoothing import METHODS

log = logging.getLogger("ngramlm")

MIN_COUNTS_HELP = (
    "per-order count cutoffs starting at order 1, e.g. 1,1,2 keeps singletons only up to "
    "bigrams; the last value covers higher orders (default: keep everything)"
)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _min_counts(text: str) -> dict[int, int]:
    """'1,1,2' -> {1: 1, 2: 1, 3: 2}; the last value applies to all higher orders."""
    values = _int_list(text)
    if not values:
        raise argparse.ArgumentTypeError("expected at least one minimum count")
    return {k: v for k, v in enumerate(values, 1)}


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def cmd_prep(args) -> int:
    lines, replaced = prep.decode_lines(Path(args.inp).read_bytes())
    if replaced:
        log.warning("%d line(s) had undecodable bytes replaced with U+FFFD", replaced)
    config = prep.PrepConfig(min_tokens=args.min_tokens, seed=args.seed, punct_extra=args.punct_extra)
    if args.abbrev:
        config.abbreviations = prep.read_abbreviations(args.abbrev)
    sentences = prep.prepare(lines, config)
    prep.write_corpus(args.out, sentences)
    stats = prep.corpus_stats(sentences)
    log.info("wrote %d sentences, %d words to %s", stats.sentence_count, stats.word_count, args.out)
    return 0


def cmd_split(args) -> int:
    sentences = prep.read_corpus(args.inp)
    train, test = prep.split_train_test(sentences, prep.SplitSpec(args.test_fraction, args.seed))
    prep.write_corpus(args.train, train)
    prep.write_corpus(args.test, test)
    log.info("train %d / test %d sentences", len(train), len(test))
    return 0


def cmd_subset(args) -> int:
    sentences = prep.read_corpus(args.inp)
    for size, subset in zip(args.sizes, prep.make_subsets(sentences, args.sizes)):
        path = f"{args.out_prefix}{size_label(size)}.txt"
        prep.write_corpus(path, subset)
        log.info("wrote %s", path)
    return 0


def cmd_stats(args) -> int:
    stats = prep.corpus_stats(prep.read_corpus(args.inp))
    print(f"{stats.sentence_count}\t{stats.word_count}")
    return 0


def cmd_count(args) -> int:
    train = prep.read_corpus(args.text)
    counts = count_ngrams(train, build_vocab(train), args.order)
    for k in range(1, args.order + 1):
        print(f"ngram {k}={len(counts.counts[k])}")
    if args.write_counts:
        with open(args.write_counts, "w", encoding="utf-8", newline="\n") as fp:
            for tokens, c in counts.dump():
                fp.write(f"{' '.join(tokens)}\t{c}\n")
    return 0


def cmd_train(args) -> int:
    train = prep.read_corpus(args.text)
    counts = count_ngrams(train, build_vocab(train), args.order)
    model, _, discounts = build_with_details(
        counts, args.smoothing, args.order, raw_lower=args.kn_raw_lower, min_counts=args.min_counts
    )
    if args.dump_discounts:
        for k, d in sorted(discounts.items()):
            print(f"{k}\t{d.d1:.6g}\t{d.d2:.6g}\t{d.d3plus:.6g}")
    write_arpa(model, args.lm)
    return 0


def cmd_ppl(args) -> int:
    model = read_arpa(args.lm)
    report = perplexity(model, prep.read_corpus(args.test))
    print("\n".join(report.lines()))
    return 0


def cmd_experiment(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train = prep.read_corpus(args.train)
    random.Random(args.seed).shuffle(train)
    sizes = sorted(args.train_sizes)
    subsets = []
    for size, subset in zip(sizes, prep.make_subsets(train, sizes)):
        path = out_dir / f"train.{size_label(size)}.txt"
        prep.write_corpus(path, subset)
        subsets.append((size, path))
    grid = ExperimentGrid(subsets, Path(args.test), args.orders, args.methods, args.seed, args.min_counts)
    report = run_grid(grid, out_dir, jobs=args.jobs)
    write_outputs(report, out_dir)
    for r in report.rows:
        if not r.ok:
            log.error("failed cell %s.%d.%s: %s", size_label(r.size), r.order, r.method, r.error)
    return 0 if report.all_ok else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ngramlm", description="Backoff n-gram language models (modified Kneser-Ney / Witten-Bell).")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prep", help="clean, split, dedupe and shuffle raw text")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-tokens", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--punct-extra", default="")
    p.add_argument("--abbrev", help="file with one abbreviation per line")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("split", help="seeded train/test split")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--test-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("subset", help="carve disjoint training subsets")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--sizes", type=_int_list, required=True)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_subset)

    p = sub.add_parser("stats", help="print sentence and word counts")
    p.add_argument("--in", dest="inp", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("count", help="count n-grams")
    p.add_argument("--text", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--write-counts")
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("train", help="build an ARPA backoff model")
    p.add_argument("--text", required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--smoothing", choices=METHODS, required=True)
    p.add_argument("--lm", required=True)
    p.add_argument("--kn-raw-lower", action="store_true", help="smooth lower Kneser-Ney orders with raw counts")
    p.add_argument("--dump-discounts", action="store_true")
    p.add_argument("--min-counts", type=_min_counts, help=MIN_COUNTS_HELP)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("ppl", help="perplexity of an ARPA model on a test corpus")
    p.add_argument("--lm", required=True)
    p.add_argument("--test", required=True)
    p.set_defaults(func=cmd_ppl)

    p = sub.add_parser("experiment", help="run the size x order x method grid")
    p.add_argument("--train-sizes", type=_int_list, default=[1000, 10000, 100000, 1000000])
    p.add_argument("--orders", type=_int_list, default=[3, 5, 7])
    p.add_argument("--methods", type=_str_list, default=list(METHODS))
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--min-counts", type=_min_counts, help=MIN_COUNTS_HELP)
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        log.error("%s", e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
