"""Polarity (stage A) and emotion (stages B and C) classifiers and their composition.

:class:`TweetClassifier` is a scikit-learn style estimator over raw tweet
strings: ``fit`` cleans, builds a vocabulary, loads embeddings when the
variant needs them and trains the numpy network. :class:`TwoStageAnalyser`
routes each tweet through A, then B (positive) or C (negative).
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted
from threadpoolctl import threadpool_limits

from .embeddings import (
    DEFAULT_SEQ_LEN,
    Vocabulary,
    build_vocab,
    encode_batch,
    load_pretrained,
    random_embeddings,
)
from .emoticons import NEGATIVE_EMOTIONS, POSITIVE_EMOTIONS, Emotion, Polarity
from .metrics import Metrics, compute_metrics
from .nn import LSTM, Adam, Dense, Embedding, GlobalMaxPool1D, Network, sub_rng, train_epoch
from .nn.checkpoint import load_checkpoint, save_checkpoint
from .nn.losses import loss_from_logits
from .preprocess import clean_tweet, load_stopwords

log = logging.getLogger(__name__)

# variant -> (embedding format, default dim); None means trained from scratch
VARIANTS = {
    "dnn-baseline": (None, 300),
    "lstm-fasttext": ("fasttext-vec", 300),
    "lstm-glove": ("glove-text", 300),
    "lstm-glove-twitter": ("glove-text", 200),
    "lstm-scratch": (None, 300),
}

STAGE_LABELS = {
    "A": (Polarity.NEGATIVE.value, Polarity.POSITIVE.value),
    "B": (Emotion.JOY.value, Emotion.SURPRISE.value),
    "C": (Emotion.SAD.value, Emotion.FEAR.value, Emotion.ANGER.value),
}
STAGE_HEADS = {"A": "sigmoid", "B": "sigmoid", "C": "softmax"}
DEFAULT_VARIANT = {"A": "lstm-fasttext", "B": "lstm-glove-twitter", "C": "lstm-glove-twitter"}


def build_architecture(variant, vocab_size, dim, n_classes, seq_len, head, embedding=None,
                       trainable_embedding=True, units=32, dropout=0.2, recurrent_dropout=0.2,
                       loss="cross-entropy", seed=0) -> Network:
    emb = Embedding(vocab_size, dim, trainable=trainable_embedding, weights=embedding)
    if variant == "dnn-baseline":
        layers = [
            emb,
            GlobalMaxPool1D(),
            Dense(dim, 128, "relu"),
            Dense(128, 64, "relu"),
            Dense(64, 32, "relu"),
            Dense(32, n_classes),
        ]
    elif variant in VARIANTS:
        layers = [emb, LSTM(dim, units, dropout, recurrent_dropout), Dense(units, n_classes)]
    else:
        raise ValueError(f"unknown variant {variant!r}; choose from {sorted(VARIANTS)}")
    return Network(layers, seq_len, head=head, loss=loss, seed=seed).initialize()


def _class_weights(y_idx, n_classes, class_weight):
    if class_weight is None:
        return None
    if class_weight == "balanced":
        counts = np.bincount(y_idx, minlength=n_classes).astype(np.float64)
        w = len(y_idx) / (n_classes * np.maximum(counts, 1))
    else:
        w = np.asarray(class_weight, dtype=np.float64)
    return w[y_idx].astype(np.float32)


class TweetClassifier(ClassifierMixin, BaseEstimator):
    """Embedding + LSTM (or the max-pool DNN baseline) text classifier.

    ``X`` is a sequence of raw tweet strings. Scores come from a sigmoid head
    (one independent unit per class, trained on one-hot targets) or a softmax
    head; the prediction is the argmax either way. ``predict_proba`` returns
    scores normalized to sum to one, ``decision_scores`` the raw head output.
    """

    def __init__(self, variant="lstm-scratch", labels=None, head=None, embedding_path=None,
                 embedding_format=None, embedding_dim=None, trainable_embeddings=None,
                 seq_len=DEFAULT_SEQ_LEN, max_vocab=50000, units=32, dropout=0.2,
                 recurrent_dropout=0.2, epochs=2, batch_size=128, learning_rate=1e-3,
                 loss="cross-entropy", class_weight=None, max_norm=None, seed=0,
                 stopwords_path=None, n_threads=1, verbose=0):
        self.variant = variant
        self.labels = labels
        self.head = head
        self.embedding_path = embedding_path
        self.embedding_format = embedding_format
        self.embedding_dim = embedding_dim
        self.trainable_embeddings = trainable_embeddings
        self.seq_len = seq_len
        self.max_vocab = max_vocab
        self.units = units
        self.dropout = dropout
        self.recurrent_dropout = recurrent_dropout
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.loss = loss
        self.class_weight = class_weight
        self.max_norm = max_norm
        self.seed = seed
        self.stopwords_path = stopwords_path
        self.n_threads = n_threads
        self.verbose = verbose

    # -- helpers -----------------------------------------------------------

    def _resolved(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {sorted(VARIANTS)}")
        fmt, dim = VARIANTS[self.variant]
        fmt = self.embedding_format or fmt
        dim = self.embedding_dim or dim
        pretrained = VARIANTS[self.variant][0] is not None
        trainable = (not pretrained) if self.trainable_embeddings is None else self.trainable_embeddings
        return pretrained, fmt, dim, trainable

    def _tokens(self, X):
        stop = getattr(self, "stopwords_", None) or load_stopwords(self.stopwords_path)
        return [clean_tweet(str(x), stop)[1] for x in X]

    def _encode(self, X):
        return encode_batch(self._tokens(X), self.vocab_, self.seq_len)

    def _targets(self, y):
        index = {lab: i for i, lab in enumerate(self.classes_)}
        try:
            y_idx = np.array([index[str(getattr(v, "value", v))] for v in y], dtype=np.int64)
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]!r} not in {list(self.classes_)}") from None
        return y_idx, np.eye(len(self.classes_), dtype=np.float32)[y_idx]

    # -- estimator API -----------------------------------------------------

    def fit(self, X, y, X_val=None, y_val=None):
        X = list(X)
        y = [str(getattr(v, "value", v)) for v in y]
        if len(X) != len(y):
            raise ValueError(f"X has {len(X)} samples but y has {len(y)}")
        if not X:
            raise ValueError("cannot fit on an empty dataset")
        pretrained, fmt, dim, trainable = self._resolved()
        if pretrained and (self.embedding_path is None or not os.path.exists(self.embedding_path)):
            raise FileNotFoundError(f"variant {self.variant} needs an embedding file; got {self.embedding_path!r}")

        self.classes_ = np.array(self.labels if self.labels is not None else sorted(set(y)))
        n_classes = len(self.classes_)
        if n_classes < 2:
            raise ValueError("need at least two classes")
        head = self.head or ("sigmoid" if n_classes == 2 else "softmax")
        y_idx, Y = self._targets(y)

        self.stopwords_ = load_stopwords(self.stopwords_path)
        tokens = self._tokens(X)
        self.vocab_ = build_vocab(tokens, self.max_vocab)
        Xe = encode_batch(tokens, self.vocab_, self.seq_len)

        if pretrained:
            matrix = load_pretrained(self.embedding_path, fmt, self.vocab_, dim, trainable, sub_rng(self.seed, "oov"))
            weights = matrix.vectors
            self.embedding_coverage_ = matrix.coverage
            log.info("embedding coverage %.3f (%d malformed lines)", matrix.coverage, matrix.malformed)
        else:
            weights = random_embeddings(self.vocab_, dim, sub_rng(self.seed, "embedding"))
            self.embedding_coverage_ = None

        self.network_ = build_architecture(
            self.variant, len(self.vocab_), dim, n_classes, self.seq_len, head, weights, trainable,
            self.units, self.dropout, self.recurrent_dropout, self.loss, self.seed,
        )
        optimizer = Adam(self.network_, lr=self.learning_rate, max_norm=self.max_norm)
        shuffle_rng = sub_rng(self.seed, "shuffle")
        dropout_rng = sub_rng(self.seed, "dropout")
        sw = _class_weights(y_idx, n_classes, self.class_weight)
        val = None
        if X_val is not None and len(X_val):
            _, Yv = self._targets([str(getattr(v, "value", v)) for v in y_val])
            val = (self._encode(X_val), Yv)

        self.history_ = []
        with threadpool_limits(limits=self.n_threads):
            for epoch in range(1, self.epochs + 1):
                stats = train_epoch(self.network_, Xe, Y, self.batch_size, optimizer, shuffle_rng, dropout_rng, sw)
                row = {"epoch": epoch, "loss": stats["loss"], "accuracy": stats["accuracy"]}
                if val is not None:
                    row["val_loss"], row["val_accuracy"] = self._loss_accuracy(*val)
                self.history_.append(row)
                if self.verbose:
                    log.info("epoch %d %s", epoch, row)
        return self

    def _scores_encoded(self, Xe, chunk=2048):
        out = [self.network_.forward(Xe[i : i + chunk]) for i in range(0, len(Xe), chunk)]
        if not out:
            return np.zeros((0, len(self.classes_)), dtype=np.float32)
        return np.concatenate(out)

    def _loss_accuracy(self, Xe, Y, chunk=2048):
        total, correct = 0.0, 0
        for i in range(0, len(Xe), chunk):
            z = self.network_.logits(Xe[i : i + chunk])
            value, _ = loss_from_logits(z, Y[i : i + chunk], self.network_.head, self.network_.loss_kind)
            total += value * len(z)
            correct += int((z.argmax(1) == Y[i : i + chunk].argmax(1)).sum())
        return total / len(Xe), correct / len(Xe)

    def decision_scores(self, X):
        check_is_fitted(self, "network_")
        return self._scores_encoded(self._encode(list(X)))

    def predict_proba(self, X):
        s = self.decision_scores(X).astype(np.float64)
        return s / s.sum(axis=1, keepdims=True)

    def predict(self, X):
        return self.classes_[self.decision_scores(X).argmax(axis=1)]

    def evaluate(self, X, y) -> Metrics:
        return evaluate(self, X, y)

    # -- persistence -------------------------------------------------------

    def save(self, path):
        check_is_fitted(self, "network_")
        params = {k: v for k, v in self.get_params().items()}
        extra = {
            "classes": [str(c) for c in self.classes_],
            "vocab": self.vocab_.tokens,
            "embedding_dim": int(self.network_.layers[0].dim),
            "seq_len": int(self.seq_len),
            "params": params,
            "history": self.history_,
        }
        save_checkpoint(self.network_, path, extra)

    @classmethod
    def load(cls, path, expect: dict | None = None) -> "TweetClassifier":
        network, extra = load_checkpoint(path, expect)
        params = dict(extra.get("params", {}))
        model = cls(**params)
        model.network_ = network
        model.classes_ = np.array(extra["classes"])
        model.vocab_ = Vocabulary(extra["vocab"])
        model.history_ = extra.get("history", [])
        model.stopwords_ = load_stopwords(model.stopwords_path)
        if len(model.vocab_) != network.layers[0].vocab_size:
            raise ValueError("checkpoint vocabulary does not match its embedding table")
        return model


def evaluate(model, X, y) -> Metrics:
    """Metrics for ``model.predict(X)`` against ``y`` over the model's label set."""
    labels = [str(c) for c in model.classes_]
    truth = [str(getattr(v, "value", v)) for v in y]
    pred = [str(p) for p in model.predict(list(X))]
    return compute_metrics(truth, pred, labels)


# -- dataset splitting ------------------------------------------------------


def split_dataset(labels: Sequence, seed: int, test_fraction=0.1, val_fraction=0.1):
    """Stratified ``(train, val, test)`` index arrays.

    ``test_fraction`` of each class goes to test; ``val_fraction`` of the
    remainder goes to validation. Deterministic for a given seed.
    """
    labels = [str(getattr(v, "value", v)) for v in labels]
    rng = sub_rng(seed, "split")
    by_class: dict[str, list[int]] = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)
    train, val, test = [], [], []
    for lab in sorted(by_class):
        idx = np.array(by_class[lab])
        if len(idx) < 10:
            raise ValueError(f"class {lab!r} has only {len(idx)} instances (need >= 10)")
        idx = idx[rng.permutation(len(idx))]
        n_test = int(len(idx) * test_fraction + 0.5)
        n_val = int((len(idx) - n_test) * val_fraction + 0.5)
        test.extend(idx[:n_test])
        val.extend(idx[n_test : n_test + n_val])
        train.extend(idx[n_test + n_val :])
    return tuple(np.sort(np.array(part, dtype=np.int64)) for part in (train, val, test))


# -- stage specs and training ----------------------------------------------


@dataclass
class ClassifierSpec:
    stage: str
    variant: str | None = None
    epochs: int = 2
    seed: int = 0
    test_fraction: float = 0.1
    val_fraction: float = 0.1
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.stage not in STAGE_LABELS:
            raise ValueError(f"stage must be one of {sorted(STAGE_LABELS)}")
        if self.variant is None:
            self.variant = DEFAULT_VARIANT[self.stage]

    @property
    def labels(self):
        return STAGE_LABELS[self.stage]

    def estimator(self) -> TweetClassifier:
        params = {
            "variant": self.variant,
            "labels": list(self.labels),
            "head": STAGE_HEADS[self.stage],
            "epochs": self.epochs,
            "seed": self.seed,
        }
        params.update(self.options)
        return TweetClassifier(**params)

    def select(self, texts, labels):
        """Keep only examples whose label belongs to this stage (B drops negatives, C drops disgust)."""
        keep = set(self.labels)
        pairs = [(t, str(getattr(l, "value", l))) for t, l in zip(texts, labels)]
        pairs = [(t, l) for t, l in pairs if l in keep]
        return [t for t, _ in pairs], [l for _, l in pairs]


@dataclass
class TrainingResult:
    model: TweetClassifier
    metrics: Metrics
    history: list
    split_sizes: dict


def train_classifier(spec: ClassifierSpec, texts, labels) -> TrainingResult:
    texts, labels = spec.select(list(texts), list(labels))
    train, val, test = split_dataset(labels, spec.seed, spec.test_fraction, spec.val_fraction)
    pick = lambda seq, idx: [seq[i] for i in idx]  # noqa: E731
    model = spec.estimator()
    log.info("stage %s: train=%d val=%d test=%d", spec.stage, len(train), len(val), len(test))
    model.fit(pick(texts, train), pick(labels, train), pick(texts, val), pick(labels, val))
    metrics = evaluate(model, pick(texts, test), pick(labels, test))
    sizes = {"train": len(train), "val": len(val), "test": len(test)}
    return TrainingResult(model, metrics, model.history_, sizes)


# -- two-stage composition --------------------------------------------------


@dataclass(frozen=True)
class Prediction:
    polarity: Polarity
    polarity_scores: tuple
    emotion: Emotion
    emotion_scores: tuple
    low_confidence: bool = False


class TwoStageAnalyser:
    """Route each tweet through stage A, then B (positive) or C (negative)."""

    def __init__(self, model_a, model_b, model_c):
        pos = {e.value for e in POSITIVE_EMOTIONS}
        neg = {e.value for e in NEGATIVE_EMOTIONS}
        if set(map(str, model_a.classes_)) != {p.value for p in Polarity}:
            raise ValueError(f"stage A must predict polarities, has {list(model_a.classes_)}")
        if not set(map(str, model_b.classes_)) <= pos:
            raise ValueError(f"stage B labels {list(model_b.classes_)} are not positive emotions")
        if not set(map(str, model_c.classes_)) <= neg:
            raise ValueError(f"stage C labels {list(model_c.classes_)} are not negative emotions")
        self.model_a = model_a
        self.model_b = model_b
        self.model_c = model_c

    @classmethod
    def from_checkpoints(cls, path_a, path_b, path_c) -> "TwoStageAnalyser":
        return cls(*(TweetClassifier.load(p) for p in (path_a, path_b, path_c)))

    def predict(self, texts: Iterable[str]) -> list[Prediction]:
        texts = [str(t) for t in texts]
        stop = load_stopwords(getattr(self.model_a, "stopwords_path", None))
        empty = [not clean_tweet(t, stop)[0] for t in texts]
        a_scores = np.asarray(self.model_a.decision_scores(texts))
        a_classes = [str(c) for c in self.model_a.classes_]
        polarity = [Polarity(a_classes[k]) for k in a_scores.argmax(axis=1)]
        emo_scores: list = [None] * len(texts)
        emo_label: list = [None] * len(texts)
        for pol, model in ((Polarity.POSITIVE, self.model_b), (Polarity.NEGATIVE, self.model_c)):
            idx = [i for i, p in enumerate(polarity) if p is pol]
            if not idx:
                continue
            scores = np.asarray(model.decision_scores([texts[i] for i in idx]))
            classes = [str(c) for c in model.classes_]
            for row, i in enumerate(idx):
                emo_scores[i] = tuple(float(s) for s in scores[row])
                emo_label[i] = Emotion(classes[int(scores[row].argmax())])
        return [
            Prediction(polarity[i], tuple(float(s) for s in a_scores[i]), emo_label[i], emo_scores[i], empty[i])
            for i in range(len(texts))
        ]


def write_predictions(path, ids: Sequence[str], predictions: Sequence[Prediction]):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["tweet_id", "polarity", "p_scores", "emotion", "e_scores", "low_confidence"])
        for tid, p in zip(ids, predictions):
            writer.writerow([
                tid,
                p.polarity.value,
                " ".join(f"{s:.6f}" for s in p.polarity_scores),
                p.emotion.value,
                " ".join(f"{s:.6f}" for s in p.emotion_scores),
                int(p.low_confidence),
            ])


def read_predictions(path) -> dict[str, tuple[Polarity, Emotion]]:
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out[row["tweet_id"]] = (Polarity(row["polarity"]), Emotion(row["emotion"]))
    return out


def write_history(path, history: list[dict]):
    cols = ["epoch", "loss", "accuracy", "val_loss", "val_accuracy"]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(cols)
        for row in history:
            writer.writerow([repr(row.get(c, "")) if isinstance(row.get(c), float) else row.get(c, "") for c in cols])


def save_vocabulary(model: TweetClassifier, path: str | Path):
    model.vocab_.save(path)
