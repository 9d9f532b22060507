"""Reading and writing backoff models in ARPA text format."""

import io
import re
from pathlib import Path
from typing import Iterable, TextIO

from .counts import BOS_ID, Vocabulary
from .model import LOG_ZERO, BackoffModel

_NGRAM_HEADER = re.compile(r"^ngram\s+(\d+)\s*=\s*(\d+)$")
_SECTION = re.compile(r"^\\(\d+)-grams:$")


class ArpaParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def _fmt(value: float) -> str:
    if value <= LOG_ZERO:
        return "-99"
    s = f"{value:.7g}"
    return "0" if s == "-0" else s


def format_arpa(model: BackoffModel) -> str:
    if not model.logprobs.get(1):
        raise ValueError("model has no unigrams; nothing to write")
    words = model.vocab.id_to_word
    sections = []
    for k in range(1, model.order + 1):
        probs = model.logprobs[k]
        bows = model.logbows.get(k, {}) if k < model.order else {}
        grams = set(probs) | set(bows)
        if k == 1:
            grams.add((BOS_ID,))
        rows = sorted((tuple(words[i] for i in g), g) for g in grams)
        lines = []
        for tokens, g in rows:
            line = f"{_fmt(probs.get(g, LOG_ZERO))}\t{' '.join(tokens)}"
            if g in bows:
                line += f"\t{_fmt(bows[g])}"
            lines.append(line)
        sections.append(lines)

    out = ["", "\\data\\"]
    out += [f"ngram {k}={len(lines)}" for k, lines in enumerate(sections, 1)]
    for k, lines in enumerate(sections, 1):
        out += ["", f"\\{k}-grams:"]
        out += lines
    out += ["", "\\end\\", ""]
    return "\n".join(out)


def write_arpa(model: BackoffModel, sink: TextIO | str | Path) -> int:
    """Write ``model``; returns the number of UTF-8 bytes written."""
    text = format_arpa(model)
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fp:
            fp.write(text)
    else:
        sink.write(text)
    return len(text.encode("utf-8"))


def _float(field: str, lineno: int) -> float:
    try:
        return float(field)
    except ValueError:
        raise ArpaParseError(lineno, f"non-numeric field {field!r}") from None


def read_arpa(source: TextIO | str | Path | Iterable[str]) -> BackoffModel:
    """Parse an ARPA file (path, open text file or iterable of lines).

    Entries with log probability -99 or below are kept in the vocabulary
    and may carry a backoff weight, but are never predicted.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fp:
            return _parse(fp)
    return _parse(source)


def read_arpa_text(text: str) -> BackoffModel:
    return _parse(io.StringIO(text))


def _parse(lines: Iterable[str]) -> BackoffModel:
    declared: dict[int, int] = {}
    vocab = Vocabulary()
    logprobs: dict[int, dict] = {}
    logbows: dict[int, dict] = {}
    seen: dict[int, int] = {}
    grams_seen: set = set()
    state = "preamble"
    order = 0
    current = 0
    lineno = 0

    def close_section(at: int) -> None:
        if current and seen[current] != declared[current]:
            raise ArpaParseError(
                at, f"header declares {declared[current]} {current}-grams but section has {seen[current]}"
            )

    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if state == "preamble":
            if line == "\\data\\":
                state = "header"
            continue
        if state == "done":
            if line:
                raise ArpaParseError(lineno, "content after \\end\\")
            continue
        if not line:
            continue
        if state == "header":
            m = _NGRAM_HEADER.match(line)
            if m:
                k, count = int(m.group(1)), int(m.group(2))
                if k != len(declared) + 1:
                    raise ArpaParseError(lineno, f"expected ngram {len(declared) + 1}=..., got order {k}")
                declared[k] = count
                continue
            if not declared:
                raise ArpaParseError(lineno, "no 'ngram k=N' lines in \\data\\ header")
            order = len(declared)
            state = "body"
        if line == "\\end\\":
            close_section(lineno)
            if current != order:
                raise ArpaParseError(lineno, f"\\end\\ reached after {current}-grams; expected {order} orders")
            state = "done"
            continue
        m = _SECTION.match(line)
        if m:
            close_section(lineno)
            k = int(m.group(1))
            if k != current + 1 or k > order:
                raise ArpaParseError(lineno, f"unexpected section \\{k}-grams:")
            current = k
            seen[k] = 0
            logprobs[k] = {}
            if k < order:
                logbows[k] = {}
            continue
        if not current:
            raise ArpaParseError(lineno, f"entry outside any n-gram section: {line!r}")
        fields = line.split()
        k = current
        if len(fields) == k + 1:
            bow = None
        elif len(fields) == k + 2:
            if k == order:
                raise ArpaParseError(lineno, f"backoff weight on a highest-order ({k}) entry")
            bow = _float(fields[-1], lineno)
        else:
            raise ArpaParseError(lineno, f"expected {k} tokens for a {k}-gram entry, got {line!r}")
        lp = _float(fields[0], lineno)
        if lp > 0:
            raise ArpaParseError(lineno, f"log probability {lp} is positive")
        tokens = fields[1:k + 1]
        if k == 1:
            gram = (vocab.add(tokens[0]),)
        else:
            missing = [t for t in tokens if t not in vocab]
            if missing:
                raise ArpaParseError(lineno, f"token {missing[0]!r} has no unigram entry")
            gram = tuple(vocab.word_to_id[t] for t in tokens)
        if gram in grams_seen:
            raise ArpaParseError(lineno, f"duplicate entry {' '.join(tokens)!r}")
        grams_seen.add(gram)
        seen[k] += 1
        if lp > LOG_ZERO:
            logprobs[k][gram] = lp
        if bow is not None:
            logbows[k][gram] = max(bow, LOG_ZERO)
    if state != "done":
        raise ArpaParseError(lineno + 1, "missing \\end\\ (file truncated?)" if state != "preamble" else "no \\data\\ section")
    # the start marker is context-only even if a file gives it a probability
    logprobs[1].pop((BOS_ID,), None)
    return BackoffModel(order, vocab, logprobs, logbows)
