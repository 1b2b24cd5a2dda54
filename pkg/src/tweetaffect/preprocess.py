"""Tweet cleaning, tokenization and emoticon extraction.

Cleaning runs these steps in a fixed order:

1. drop ``@mention`` tokens and every ``:`` character
2. replace each maximal run of non-ASCII characters with one space
3. split on whitespace and lowercase
4. drop stop-words and pure-punctuation tokens (edge punctuation such as the
   ``#`` of a hashtag is stripped first)
5. join the surviving tokens with single spaces

Emoticons are extracted from the original text, before step 2 destroys them.
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from sklearn.base import BaseEstimator, TransformerMixin

DEFAULT_EMOTICON_RANGES: tuple[tuple[int, int], ...] = ((0x1F300, 0x1FAFF), (0x2600, 0x27BF))

_MENTION_RE = re.compile(r"(?<!\w)@\w+")
_NON_ASCII_RE = re.compile(r"[^\x00-\x7f]+")
# ASCII control characters count as separators so the output stays printable
_SPLIT_RE = re.compile(r"[\s\x00-\x1f\x7f]+")
_PUNCT = string.punctuation


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Read a stop-word file: one token per line, ``#`` starts a comment."""
    if path is None:
        text = resources.files("tweetaffect.data").joinpath("stopwords_en.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    words = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            words.add(line)
    return frozenset(words)


_DEFAULT_STOPWORDS: frozenset[str] | None = None


def default_stopwords() -> frozenset[str]:
    global _DEFAULT_STOPWORDS
    if _DEFAULT_STOPWORDS is None:
        _DEFAULT_STOPWORDS = load_stopwords()
    return _DEFAULT_STOPWORDS


def extract_emoticons(text: str, ranges: Sequence[tuple[int, int]] = DEFAULT_EMOTICON_RANGES) -> list[int]:
    return [cp for cp in map(ord, text) if any(lo <= cp <= hi for lo, hi in ranges)]


@dataclass(frozen=True)
class CleaningReport:
    mentions_removed: int = 0
    non_ascii_runs_replaced: int = 0
    stopwords_removed: int = 0
    punctuation_removed: int = 0
    emoticons_extracted: int = 0


def remove_mentions_and_colons(text: str) -> tuple[str, int]:
    # colons go first so "@:name" cannot turn into a fresh mention
    return _MENTION_RE.subn(" ", text.replace(":", ""))


def replace_non_ascii(text: str) -> tuple[str, int]:
    return _NON_ASCII_RE.subn(" ", text)


def tokenize(text: str) -> list[str]:
    return [tok.lower() for tok in _SPLIT_RE.split(text) if tok]


def filter_tokens(tokens: Iterable[str], stopwords: frozenset[str]) -> tuple[list[str], int, int]:
    kept, n_stop, n_punct = [], 0, 0
    for tok in tokens:
        core = tok.strip(_PUNCT)
        if not core:
            n_punct += 1
        elif core in stopwords:
            n_stop += 1
        else:
            kept.append(core)
    return kept, n_stop, n_punct


def clean_tweet(
    text: str,
    stopwords: frozenset[str] | None = None,
    emoticon_ranges: Sequence[tuple[int, int]] = DEFAULT_EMOTICON_RANGES,
) -> tuple[str, list[str], CleaningReport]:
    """Return ``(cleaned_text, tokens, report)`` for one tweet."""
    stopwords = default_stopwords() if stopwords is None else stopwords
    n_emo = len(extract_emoticons(text, emoticon_ranges))
    step1, n_mentions = remove_mentions_and_colons(text)
    step2, n_runs = replace_non_ascii(step1)
    tokens, n_stop, n_punct = filter_tokens(tokenize(step2), stopwords)
    report = CleaningReport(n_mentions, n_runs, n_stop, n_punct, n_emo)
    return " ".join(tokens), tokens, report


def preprocess_corpus(
    records: Iterable,
    stopwords: frozenset[str] | None = None,
    emoticon_ranges: Sequence[tuple[int, int]] = DEFAULT_EMOTICON_RANGES,
) -> Iterator:
    """Populate ``cleaned_text`` and ``emoticons`` on each record, in order.

    Records whose cleaned text comes out empty are kept and flagged with
    ``"empty_cleaned_text"``.
    """
    stopwords = default_stopwords() if stopwords is None else stopwords
    for rec in records:
        cleaned, _, _ = clean_tweet(rec.original_text, stopwords, emoticon_ranges)
        flags = rec.flags
        if not cleaned and "empty_cleaned_text" not in flags:
            flags = flags + ("empty_cleaned_text",)
        yield replace(
            rec,
            cleaned_text=cleaned,
            emoticons=tuple(extract_emoticons(rec.original_text, emoticon_ranges)),
            flags=flags,
        )


class TweetCleaner(TransformerMixin, BaseEstimator):
    """Stateless transformer mapping raw tweet strings to cleaned strings."""

    def __init__(self, stopwords_path=None):
        self.stopwords_path = stopwords_path

    def fit(self, X, y=None):
        self.stopwords_ = load_stopwords(self.stopwords_path)
        return self

    def transform(self, X):
        stop = getattr(self, "stopwords_", None)
        if stop is None:
            stop = load_stopwords(self.stopwords_path)
        return [clean_tweet(str(x), stop)[0] for x in X]
