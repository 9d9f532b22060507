"""Training-size x order x method grids evaluated on one shared test set."""

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

from .arpa import write_arpa
from .corpus_prep import read_corpus
from .counts import Vocabulary, build_vocab, count_ngrams, oov_count
from .model import build_backoff_model, perplexity
from .smoothing import KN, METHODS, WB, validate_min_counts

log = logging.getLogger(__name__)

RESULT_HEADER = ["size", "order", "method", "ppl", "oov", "words"]
DIFF_HEADER = ["size", "order", "ppl_diff_kn_minus_wb"]
OOV_HEADER = ["size", "oov_tokens", "total_tokens", "cumulative_oov_tokens"]
FAILED = "FAILED"


def size_label(size: int) -> str:
    """1000 -> '1K', 1000000 -> '1M'; other sizes are left as digits."""
    for suffix, unit in (("M", 1_000_000), ("K", 1_000)):
        if size >= unit and size % unit == 0:
            return f"{size // unit}{suffix}"
    return str(size)


@dataclass
class ExperimentGrid:
    subsets: list[tuple[int, Path]]
    test: Path
    orders: list[int] = field(default_factory=lambda: [3, 5, 7])
    methods: list[str] = field(default_factory=lambda: [KN, WB])
    seed: int = 0
    min_counts: dict[int, int] | None = None

    def __post_init__(self):
        validate_min_counts(self.min_counts)
        if not self.orders or any(o < 1 for o in self.orders):
            raise ValueError(f"orders must all be >= 1: {self.orders}")
        if not self.methods:
            raise ValueError("at least one smoothing method is required")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}; expected some of {METHODS}")
        paths = [Path(p).resolve() for _, p in self.subsets] + [Path(self.test).resolve()]
        if len(set(paths)) != len(paths):
            raise ValueError("training subsets and test set must be distinct files")


@dataclass
class CellResult:
    size: int
    order: int
    method: str
    ppl: float | None = None
    oov: int | None = None
    words: int | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class OovRow:
    size: int
    oov_tokens: int
    total_tokens: int
    cumulative_oov_tokens: int


@dataclass
class ComparisonReport:
    rows: list[CellResult] = field(default_factory=list)
    oov_rows: list[OovRow] = field(default_factory=list)

    def diffs(self) -> list[tuple[int, int, float]]:
        by_cell = {(r.size, r.order, r.method): r for r in self.rows if r.ok}
        out = []
        for size, order in sorted({(r.size, r.order) for r in self.rows}):
            kn = by_cell.get((size, order, KN))
            wb = by_cell.get((size, order, WB))
            if kn and wb:
                out.append((size, order, kn.ppl - wb.ppl))
        return out

    @property
    def all_ok(self) -> bool:
        return all(r.ok for r in self.rows)


def model_path(out_dir: Path, size: int, order: int, method: str) -> Path:
    return Path(out_dir) / f"{size_label(size)}.{order}.{method}.lm"


def _run_cell(
    size: int,
    train_path: Path,
    test_path: Path,
    order: int,
    method: str,
    out_dir: Path | None,
    min_counts: dict[int, int] | None = None,
) -> CellResult:
    try:
        train = read_corpus(train_path)
        test = read_corpus(test_path)
        vocab = build_vocab(train)
        counts = count_ngrams(train, vocab, order)
        model = build_backoff_model(counts, method, order, min_counts=min_counts)
        if out_dir is not None:
            write_arpa(model, model_path(out_dir, size, order, method))
        report = perplexity(model, test)
    except Exception as e:  # noqa: BLE001 - one bad cell must not sink the grid
        log.error("cell size=%d order=%d method=%s failed: %s", size, order, method, e)
        return CellResult(size, order, method, error=f"{type(e).__name__}: {e}")
    return CellResult(size, order, method, report.perplexity, report.oov, report.words)


def oov_report(grid: ExperimentGrid) -> list[OovRow]:
    """OOV tokens of the shared test set per subset and over cumulative unions.

    Subsets are disjoint, so the cumulative column (vocabulary of this and
    all smaller subsets) is what must shrink as training data grows.
    """
    test = read_corpus(grid.test)
    rows = []
    union = Vocabulary()
    for size, path in sorted(grid.subsets):
        train = read_corpus(path)
        oov, total = oov_count(build_vocab(train), test)
        for s in train:
            for w in s:
                union.add(w)
        cum_oov, _ = oov_count(union, test)
        rows.append(OovRow(size, oov, total, cum_oov))
    return rows


def run_grid(grid: ExperimentGrid, out_dir: Path | None = None, jobs: int = 1) -> ComparisonReport:
    cells = [
        (size, path, order, method)
        for size, path in sorted(grid.subsets)
        for order in sorted(grid.orders)
        for method in sorted(grid.methods)
    ]
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    args = [(size, path, grid.test, order, method, out_dir, grid.min_counts) for size, path, order, method in cells]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_cell, *zip(*args)))
    else:
        rows = [_run_cell(*a) for a in args]
    report = ComparisonReport(rows, oov_report(grid))
    _log_trends(report)
    return report


def _log_trends(report: ComparisonReport) -> None:
    ok = {(r.size, r.order, r.method): r.ppl for r in report.rows if r.ok}
    for size in sorted({r.size for r in report.rows}):
        for method in sorted({r.method for r in report.rows}):
            ppls = [(o, ok[(size, o, method)]) for o in sorted({r.order for r in report.rows}) if (size, o, method) in ok]
            if ppls:
                best = min(ppls, key=lambda t: t[1])
                log.info("size=%s method=%s best order %d (ppl %.6g)", size, method, *best)


def _g(x: float) -> str:
    return f"{x:.6g}"


def _table(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def emit_csv(report: ComparisonReport, results: TextIO, diffs: TextIO) -> int:
    """Write the per-cell and difference tables; returns bytes written."""
    rows = []
    for r in sorted(report.rows, key=lambda r: (r.size, r.order, r.method)):
        if r.ok:
            rows.append([r.size, r.order, r.method, _g(r.ppl), r.oov, r.words])
        else:
            rows.append([r.size, r.order, r.method, FAILED, "", ""])
    main = _table(RESULT_HEADER, rows)
    diff = _table(DIFF_HEADER, [[size, order, _g(d)] for size, order, d in report.diffs()])
    results.write(main)
    diffs.write(diff)
    return len(main.encode("utf-8")) + len(diff.encode("utf-8"))


def emit_oov_csv(rows: list[OovRow], sink: TextIO) -> None:
    sink.write(_table(OOV_HEADER, [[r.size, r.oov_tokens, r.total_tokens, r.cumulative_oov_tokens] for r in rows]))


def write_outputs(report: ComparisonReport, out_dir: Path) -> None:
    out_dir = Path(out_dir)
    with open(out_dir / "results.csv", "w", encoding="utf-8", newline="") as res, \
            open(out_dir / "diffs.csv", "w", encoding="utf-8", newline="") as dif:
        emit_csv(report, res, dif)
    with open(out_dir / "oov.csv", "w", encoding="utf-8", newline="") as fp:
        emit_oov_csv(report.oov_rows, fp)
