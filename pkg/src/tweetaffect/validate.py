"""Weakly supervised validation: emoticons in a tweet serve as its label.

Models only ever see the cleaned text, which has had every non-ASCII
character (and therefore every emoticon) removed. Tweets whose emoticons
span both polarities are treated as sarcastic and skipped.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable

from .emoticons import (
    Emotion,
    EmoticonLexicon,
    Polarity,
    WeakLabelKind,
    partition_corpus,
    weak_label,
)
from .metrics import Metrics, compute_metrics
from .preprocess import DEFAULT_EMOTICON_RANGES, clean_tweet, extract_emoticons


class ValidationError(ValueError):
    pass


class LeakageError(AssertionError):
    pass


@dataclass
class ValidationReport:
    kind: str
    partition: dict
    evaluated: int
    metrics: dict = field(default_factory=dict)
    excluded: dict = field(default_factory=dict)
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "partition": self.partition,
            "evaluated": self.evaluated,
            "excluded": self.excluded,
            "metrics": {name: m.as_dict() for name, m in self.metrics.items()},
            "note": self.note,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"{self.kind} validation", f"  partition: {self.partition}", f"  evaluated: {self.evaluated}"]
        if self.excluded:
            lines.append(f"  excluded: {self.excluded}")
        if self.note:
            lines.append(f"  note: {self.note}")
        for name, m in self.metrics.items():
            labels = [str(getattr(l, "value", l)) for l in m.labels]
            lines.append(f"  [{name}] accuracy={m.accuracy:.4f} f1={m.f1:.4f} macro_f1={m.macro_f1:.4f}")
            lines.append(f"    labels: {labels}")
            for lab, row in zip(labels, m.confusion.tolist()):
                lines.append(f"    {lab:>10}: {row}")
        return "\n".join(lines)


def _model_input(rec) -> str:
    text = rec.cleaned_text if rec.cleaned_text is not None else clean_tweet(rec.original_text)[0]
    if extract_emoticons(text, DEFAULT_EMOTICON_RANGES) or any(ord(ch) > 0x7F for ch in text):
        raise LeakageError(f"model input for tweet {rec.tweet_id!r} still contains emoticons/non-ASCII")
    return text


def _with_emoticons(records):
    for rec in records:
        if rec.emoticons is None:
            rec = replace(rec, emoticons=tuple(extract_emoticons(rec.original_text)))
        yield rec


def _predict(model, texts):
    return [str(getattr(p, "value", p)) for p in model.predict(texts)]


def validate_polarity(model_a, records: Iterable, lexicon: EmoticonLexicon | None = None) -> ValidationReport:
    """Score a polarity model against emoticon-derived polarity labels."""
    part = partition_corpus(_with_emoticons(records), lexicon)
    evaluable = part.positive + part.negative
    if not evaluable:
        raise ValidationError("no tweets carry single-polarity emoticons; nothing to validate")
    texts = [_model_input(r) for r in evaluable]
    truth = [Polarity.POSITIVE.value] * len(part.positive) + [Polarity.NEGATIVE.value] * len(part.negative)
    labels = [Polarity.NEGATIVE.value, Polarity.POSITIVE.value]
    m = compute_metrics(truth, _predict(model_a, texts), labels)
    return ValidationReport(
        "polarity",
        part.sizes(),
        len(evaluable),
        {"polarity": m},
        {"mixed": len(part.mixed), "no_emoticon": len(part.no_emoticon)},
    )


def validate_emotions(model_b, model_c, records: Iterable, lexicon: EmoticonLexicon | None = None) -> ValidationReport:
    """Score the emotion models on tweets whose emoticons name exactly one emotion.

    This goes beyond polarity validation: B is scored on joy/surprise tweets
    and C on sad/fear/anger tweets. Disgust tweets are counted but skipped
    since C has no disgust class.
    """
    records = list(_with_emoticons(records))
    part = partition_corpus(records, lexicon)
    pos_rows, neg_rows = [], []
    excluded = {"disgust": 0, "polarity_only": 0, "mixed": len(part.mixed), "no_emoticon": len(part.no_emoticon)}
    for rec in part.positive + part.negative:
        label = weak_label(rec.emoticons, lexicon)
        if label.kind is WeakLabelKind.POLARITY_ONLY:
            excluded["polarity_only"] += 1
        elif label.emotion is Emotion.DISGUST:
            excluded["disgust"] += 1
        elif label.polarity is Polarity.POSITIVE:
            pos_rows.append((rec, label.emotion))
        else:
            neg_rows.append((rec, label.emotion))
    if not pos_rows and not neg_rows:
        raise ValidationError("no tweets carry a single-emotion emoticon label; nothing to validate")
    metrics: dict[str, Metrics] = {}
    for name, model, rows in (("positive_emotions", model_b, pos_rows), ("negative_emotions", model_c, neg_rows)):
        if not rows:
            continue
        labels = [str(c) for c in model.classes_]
        texts = [_model_input(r) for r, _ in rows]
        truth = [e.value for _, e in rows]
        metrics[name] = compute_metrics(truth, _predict(model, texts), labels)
    return ValidationReport(
        "emotion",
        part.sizes(),
        len(pos_rows) + len(neg_rows),
        metrics,
        excluded,
        note="extension: emoticon emotion labels checked against the stage B/C models",
    )
