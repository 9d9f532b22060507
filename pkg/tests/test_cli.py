import logging
import subprocess
import sys

import pytest

from conftest import synthetic_sentences
from ngramlm.arpa import read_arpa
from ngramlm.cli import main
from ngramlm.corpus_prep import read_corpus, write_corpus


@pytest.fixture
def t1_file(tmp_path, t1):
    path = tmp_path / "t1.txt"
    write_corpus(path, t1)
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr()


def test_prep_then_stats(tmp_path, capsys, caplog):
    caplog.set_level(logging.WARNING, logger="ngramlm")
    raw = tmp_path / "raw.txt"
    raw.write_bytes("Dr. Budi datang. Dia pergi, lalu pulang!\n| tabel |\nYa.\n".encode() + b"Kata \xff rusak di sini.\n")
    out = tmp_path / "clean.txt"
    code, cap = run(capsys, "prep", "--in", raw, "--out", out, "--seed", 3)
    assert code == 0
    assert "undecodable" in caplog.text
    assert sorted(read_corpus(out)) == [("Dia", "pergi", "lalu", "pulang"), ("Dr", "Budi", "datang"),
                                        ("Kata", "�", "rusak", "di", "sini")]
    code, cap = run(capsys, "stats", "--in", out)
    assert cap.out == "3\t12\n"


def test_prep_custom_abbreviations(tmp_path):
    raw = tmp_path / "raw.txt"
    raw.write_text("Lihat hal. lima sekarang juga.\n")
    abbrev = tmp_path / "abbr.txt"
    abbrev.write_text("hal\n")
    out = tmp_path / "o.txt"
    assert main(["prep", "--in", str(raw), "--out", str(out), "--abbrev", str(abbrev)]) == 0
    assert read_corpus(out) == [("Lihat", "hal", "lima", "sekarang", "juga")]


def test_split_and_subset(tmp_path):
    corpus = tmp_path / "c.txt"
    write_corpus(corpus, [(f"w{i}", "x") for i in range(50)])
    train, test = tmp_path / "train.txt", tmp_path / "test.txt"
    assert main(["split", "--in", str(corpus), "--train", str(train), "--test", str(test), "--seed", "1"]) == 0
    assert (len(read_corpus(train)), len(read_corpus(test))) == (45, 5)
    assert main(["subset", "--in", str(train), "--sizes", "10,20", "--out-prefix", str(tmp_path / "s.")]) == 0
    a, b = read_corpus(tmp_path / "s.10.txt"), read_corpus(tmp_path / "s.20.txt")
    assert (len(a), len(b)) == (10, 20) and not set(a) & set(b)
    assert main(["subset", "--in", str(train), "--sizes", "40,40", "--out-prefix", str(tmp_path / "z.")]) == 1


def test_count_output(t1_file, tmp_path, capsys):
    dump = tmp_path / "counts.txt"
    code, cap = run(capsys, "count", "--text", t1_file, "--order", 2, "--write-counts", dump)
    assert code == 0
    assert cap.out == "ngram 1=4\nngram 2=5\n"
    lines = dump.read_text().splitlines()
    assert "a b\t2" in lines and "<s> a\t3" in lines and "</s>\t3" in lines


def test_train_and_ppl(t1_file, tmp_path, capsys):
    lm = tmp_path / "t1.lm"
    code, cap = run(capsys, "train", "--text", t1_file, "--order", 2, "--smoothing", "kn", "--lm", lm,
                    "--dump-discounts")
    assert code == 0
    assert cap.out == "2\t0.333333\t1.5\t3\n"
    assert read_arpa(lm).order == 2
    code, cap = run(capsys, "ppl", "--lm", lm, "--test", t1_file)
    fields = dict(line.split("\t") for line in cap.out.splitlines())
    assert list(fields) == ["sentences", "words", "oov", "logprob10", "entropy_bits", "ppl"]
    assert (fields["sentences"], fields["words"], fields["oov"]) == ("3", "9", "0")


def test_train_raw_lower_flag_changes_model(tmp_path):
    t1_file = tmp_path / "syn.txt"
    write_corpus(t1_file, synthetic_sentences(300))
    a, b = tmp_path / "a.lm", tmp_path / "b.lm"
    assert main(["train", "--text", str(t1_file), "--order", "3", "--smoothing", "kn", "--lm", str(a)]) == 0
    assert main(["train", "--text", str(t1_file), "--order", "3", "--smoothing", "kn", "--lm", str(b),
                 "--kn-raw-lower"]) == 0
    assert a.read_bytes() != b.read_bytes()


def test_errors_are_reported_not_raised(tmp_path, capsys, caplog):
    bad = tmp_path / "bad.lm"
    bad.write_text("\\data\\\nngram 1=1\n\n\\1-grams:\n0.5\ta\n\\end\\\n")
    test = tmp_path / "t.txt"
    test.write_text("a\n")
    code, cap = run(capsys, "ppl", "--lm", bad, "--test", test)
    assert code == 1
    assert "line 5: log probability 0.5 is positive" in caplog.text
    code, cap = run(capsys, "stats", "--in", tmp_path / "missing.txt")
    assert code == 1


def test_module_entry_point(t1_file):
    out = subprocess.run([sys.executable, "-m", "ngramlm", "stats", "--in", str(t1_file)],
                         capture_output=True, text=True, check=True)
    assert out.stdout == "3\t6\n"


def test_train_min_counts(tmp_path, capsys):
    text = tmp_path / "syn.txt"
    write_corpus(text, synthetic_sentences(300))
    full, cut = tmp_path / "full.lm", tmp_path / "cut.lm"
    assert main(["train", "--text", str(text), "--order", "3", "--smoothing", "wb", "--lm", str(full)]) == 0
    assert main(["train", "--text", str(text), "--order", "3", "--smoothing", "wb", "--lm", str(cut),
                 "--min-counts", "1,1,2"]) == 0
    assert len(read_arpa(cut).logprobs[3]) < len(read_arpa(full).logprobs[3])
    assert read_arpa(cut).logprobs[2] == read_arpa(full).logprobs[2]
    with pytest.raises(SystemExit):
        main(["train", "--text", str(text), "--order", "3", "--smoothing", "wb", "--lm", str(cut),
              "--min-counts", "x"])
    capsys.readouterr()
    assert main(["train", "--text", str(text), "--order", "3", "--smoothing", "wb", "--lm", str(cut),
                 "--min-counts", "2"]) == 1
