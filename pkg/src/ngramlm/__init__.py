"""Backoff n-gram language models with modified Kneser-Ney and Witten-Bell smoothing."""

from .arpa import ArpaParseError, read_arpa, write_arpa
from .counts import Vocabulary, build_vocab, count_ngrams
from .model import BackoffModel, PerplexityReport, build_backoff_model, perplexity, prob_backoff

__all__ = [
    "ArpaParseError",
    "BackoffModel",
    "PerplexityReport",
    "Vocabulary",
    "build_backoff_model",
    "build_vocab",
    "count_ngrams",
    "perplexity",
    "prob_backoff",
    "read_arpa",
    "write_arpa",
]
