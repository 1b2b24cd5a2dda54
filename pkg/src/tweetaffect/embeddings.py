"""Vocabulary, pretrained vector tables and fixed-length sequence encoding."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

PAD = 0
OOV = 1
PAD_TOKEN = "<pad>"
OOV_TOKEN = "<oov>"
DEFAULT_SEQ_LEN = 280


class EmbeddingFormatError(ValueError):
    pass


class Vocabulary:
    """Dense token -> index map with 0 reserved for padding and 1 for OOV."""

    def __init__(self, tokens: Sequence[str] = ()):
        self.itos = [PAD_TOKEN, OOV_TOKEN]
        self.stoi: dict[str, int] = {}
        for tok in tokens:
            if tok in self.stoi or tok in (PAD_TOKEN, OOV_TOKEN):
                raise ValueError(f"duplicate or reserved token {tok!r}")
            self.stoi[tok] = len(self.itos)
            self.itos.append(tok)

    def __len__(self):
        return len(self.itos)

    def __contains__(self, tok):
        return tok in self.stoi

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.itos == other.itos

    def __getitem__(self, tok) -> int:
        return self.stoi.get(tok, OOV)

    @property
    def tokens(self) -> list[str]:
        return self.itos[2:]

    def save(self, path: str | Path):
        with open(path, "w", encoding="utf-8") as fh:
            for i, tok in enumerate(self.itos):
                fh.write(f"{tok}\t{i}\n")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        rows = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                tok, _, idx = line.rstrip("\n").rpartition("\t")
                rows.append((int(idx), tok))
        rows.sort()
        if [i for i, _ in rows] != list(range(len(rows))) or len(rows) < 2:
            raise ValueError(f"{path}: vocabulary indices are not dense from 0")
        return cls([tok for _, tok in rows[2:]])


def build_vocab(token_streams: Iterable[Sequence[str]], max_size: int) -> Vocabulary:
    """Keep the ``max_size - 2`` most frequent tokens; ties sort lexicographically."""
    if max_size < 3:
        raise ValueError("max_size must be >= 3")
    counts: Counter = Counter()
    for toks in token_streams:
        counts.update(toks)
    counts.pop(PAD_TOKEN, None)
    counts.pop(OOV_TOKEN, None)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary([tok for tok, _ in ranked[: max_size - 2]])


@dataclass
class EmbeddingMatrix:
    vectors: np.ndarray  # (V, d) float32
    trainable: bool = False
    found: int = 0
    malformed: int = 0

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def coverage(self) -> float:
        known = self.vectors.shape[0] - 2
        return 1.0 if known <= 0 else self.found / known


def random_embeddings(vocab: Vocabulary, dim: int, rng: np.random.Generator) -> np.ndarray:
    table = rng.uniform(-0.05, 0.05, size=(len(vocab), dim)).astype(np.float32)
    table[PAD] = 0.0
    return table


def load_pretrained(
    path: str | Path,
    fmt: str,
    vocab: Vocabulary,
    dim: int,
    trainable: bool = False,
    rng: np.random.Generator | None = None,
) -> EmbeddingMatrix:
    """Read a GloVe text (``glove-text``) or FastText ``.vec`` (``fasttext-vec``) file.

    Only vocabulary tokens are materialized. Tokens missing from the file get
    zero rows when frozen and small uniform noise when ``trainable``.
    """
    if fmt not in ("glove-text", "fasttext-vec"):
        raise ValueError(f"unknown embedding format {fmt!r}")
    if trainable:
        table = random_embeddings(vocab, dim, rng if rng is not None else np.random.default_rng(0))
    else:
        table = np.zeros((len(vocab), dim), dtype=np.float32)
    seen = np.zeros(len(vocab), dtype=bool)
    malformed = 0
    first_data_line = True
    with open(path, encoding="utf-8", errors="replace") as fh:
        if fmt == "fasttext-vec":
            header = fh.readline().split()
            if len(header) != 2 or not all(h.isdigit() for h in header):
                raise EmbeddingFormatError(f"{path}: expected a 'count dim' header line")
            if int(header[1]) != dim:
                raise EmbeddingFormatError(f"{path}: header dimension {header[1]} != configured {dim}")
        for line in fh:
            tok, _, rest = line.rstrip("\n").rstrip().partition(" ")
            if first_data_line:
                first_data_line = False
                width = len(rest.split())
                if width != dim:
                    raise EmbeddingFormatError(f"{path}: vector dimension {width} != configured {dim}")
            idx = vocab.stoi.get(tok)
            if idx is None or seen[idx]:
                continue
            try:
                vec = np.array(rest.split(" "), dtype=np.float32)
            except ValueError:
                malformed += 1
                continue
            if vec.shape[0] != dim:
                malformed += 1
                continue
            table[idx] = vec
            seen[idx] = True
    table[PAD] = 0.0
    return EmbeddingMatrix(table, trainable=trainable, found=int(seen.sum()), malformed=malformed)


def encode_and_pad(tokens: Sequence[str], vocab: Vocabulary, length: int = DEFAULT_SEQ_LEN) -> np.ndarray:
    """Map the first ``length`` tokens to indices (OOV -> 1) and post-pad with 0."""
    if length < 1:
        raise ValueError("length must be >= 1")
    out = np.zeros(length, dtype=np.int32)
    head = tokens[:length]
    out[: len(head)] = [vocab[t] for t in head]
    return out


def encode_batch(token_lists: Iterable[Sequence[str]], vocab: Vocabulary, length: int = DEFAULT_SEQ_LEN) -> np.ndarray:
    rows = [encode_and_pad(toks, vocab, length) for toks in token_lists]
    if not rows:
        return np.zeros((0, length), dtype=np.int32)
    return np.stack(rows)


def decode(seq: np.ndarray, vocab: Vocabulary) -> list[str]:
    return [vocab.itos[i] for i in seq if i != PAD]


class SequenceEncoder(TransformerMixin, BaseEstimator):
    """Fit a vocabulary on cleaned strings and encode them to ``(n, seq_len)`` indices."""

    def __init__(self, seq_len=DEFAULT_SEQ_LEN, max_vocab=50000):
        self.seq_len = seq_len
        self.max_vocab = max_vocab

    def fit(self, X, y=None):
        self.vocab_ = build_vocab((str(x).split() for x in X), self.max_vocab)
        return self

    def transform(self, X):
        check_is_fitted(self, "vocab_")
        return encode_batch((str(x).split() for x in X), self.vocab_, self.seq_len)
