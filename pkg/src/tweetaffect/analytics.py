"""Per-country daily series, normalization, averages, stacked emotions and correlations."""

from __future__ import annotations

import csv
import json
import math
from collections import defaultdict
from dataclasses import dataclass
from datetime import date, timedelta, timezone
from typing import Iterable, Mapping, Sequence

import numpy as np

from .emoticons import Emotion, Polarity

POLARITY_CLASSES = (Polarity.POSITIVE.value, Polarity.NEGATIVE.value)
EMOTION_CLASSES = (
    Emotion.JOY.value,
    Emotion.SURPRISE.value,
    Emotion.SAD.value,
    Emotion.FEAR.value,
    Emotion.ANGER.value,
)
CLASSES = POLARITY_CLASSES + EMOTION_CLASSES
STACK_GROUPS = {
    "positive": (Emotion.JOY.value, Emotion.SURPRISE.value),
    "negative": (Emotion.SAD.value, Emotion.FEAR.value, Emotion.ANGER.value),
}
UNASSIGNED = "unassigned"


def date_span(start: date, end: date) -> list[date]:
    return [start + timedelta(days=k) for k in range((end - start).days + 1)]


@dataclass
class DailySeries:
    """Per-day tweet counts for one country over a gap-free date axis."""

    country: str
    dates: list[date]
    counts: dict[str, np.ndarray]

    @property
    def tweets_per_day(self) -> np.ndarray:
        return self.counts[Polarity.POSITIVE.value] + self.counts[Polarity.NEGATIVE.value]

    @property
    def total(self) -> int:
        return int(self.tweets_per_day.sum())

    def series(self, cls: str) -> np.ndarray:
        return self.counts[cls].astype(np.float64)


@dataclass
class NormalizedSeries:
    country: str
    dates: list[date]
    values: dict[str, np.ndarray]

    def series(self, cls: str) -> np.ndarray:
        return self.values[cls]

    def restrict(self, dates: Sequence[date]) -> "NormalizedSeries":
        pos = {d: i for i, d in enumerate(self.dates)}
        idx = [pos[d] for d in dates]
        return NormalizedSeries(self.country, list(dates), {k: v[idx] for k, v in self.values.items()})


def _label_value(x) -> str:
    return str(getattr(x, "value", x))


def aggregate_daily(records: Iterable, predictions, start: date | None = None, end: date | None = None) -> dict[str, DailySeries]:
    """Count predicted classes per country per UTC day.

    ``predictions`` is either a mapping ``tweet_id -> (polarity, emotion)``
    or a sequence aligned with ``records`` holding such pairs or
    :class:`~tweetaffect.pipeline.Prediction` objects. Records without a
    country land in the ``"unassigned"`` series. Each country's date axis runs
    from its first to last tweet (or ``start``..``end``) with empty days as zeros.
    """
    records = list(records)
    if isinstance(predictions, Mapping):
        pairs = [predictions[r.tweet_id] for r in records]
    else:
        pairs = list(predictions)
        if len(pairs) != len(records):
            raise ValueError(f"{len(records)} records but {len(pairs)} predictions")
    tallies: dict[str, dict[date, dict[str, int]]] = defaultdict(lambda: defaultdict(lambda: defaultdict(int)))
    for rec, pred in zip(records, pairs):
        if hasattr(pred, "polarity"):
            polarity, emotion = pred.polarity, pred.emotion
        else:
            polarity, emotion = pred
        day = rec.time.astimezone(timezone.utc).date()
        if (start and day < start) or (end and day > end):
            continue
        bucket = tallies[rec.country or UNASSIGNED][day]
        bucket[_label_value(polarity)] += 1
        if emotion is not None:
            bucket[_label_value(emotion)] += 1
    out = {}
    for country in sorted(tallies):
        days = tallies[country]
        axis = date_span(start or min(days), end or max(days))
        counts = {cls: np.array([days.get(d, {}).get(cls, 0) for d in axis], dtype=np.int64) for cls in CLASSES}
        out[country] = DailySeries(country, axis, counts)
    return out


def normalize(series: DailySeries, mode: str = "total") -> NormalizedSeries:
    """Divide daily counts by the country's whole-period tweet total.

    ``mode="per-day"`` divides by each day's own tweet count instead (days
    without tweets stay at zero).
    """
    if mode == "total":
        total = series.total
        if total <= 0:
            raise ValueError(f"country {series.country!r} has no tweets to normalize by")
        values = {cls: series.counts[cls] / total for cls in CLASSES}
    elif mode == "per-day":
        per_day = series.tweets_per_day
        if per_day.sum() <= 0:
            raise ValueError(f"country {series.country!r} has no tweets to normalize by")
        safe = np.where(per_day > 0, per_day, 1)
        values = {cls: np.where(per_day > 0, series.counts[cls] / safe, 0.0) for cls in CLASSES}
    else:
        raise ValueError(f"unknown normalization mode {mode!r}")
    return NormalizedSeries(series.country, list(series.dates), values)


def average_line(series: NormalizedSeries) -> dict[str, float]:
    if not series.dates:
        raise ValueError("cannot average an empty series")
    return {cls: float(np.mean(v)) for cls, v in series.values.items()}


def stacked_emotions(series, scale_max: float = 25.0) -> dict[str, np.ndarray]:
    """Cumulative emotion stacks, one ``(n_emotions, n_days)`` array per polarity group.

    Row ``k`` is the running sum of the first ``k + 1`` emotions in the fixed
    order. Each group is scaled so the highest point of its top row equals
    ``scale_max``; an all-zero group stays zero.
    """
    if scale_max <= 0:
        raise ValueError("scale_max must be positive")
    out = {}
    for group, classes in STACK_GROUPS.items():
        stack = np.cumsum(np.vstack([series.series(c) for c in classes]), axis=0)
        peak = stack[-1].max() if stack.size else 0.0
        out[group] = stack * (scale_max / peak) if peak > 0 else np.zeros_like(stack, dtype=np.float64)
    return out


def pearson(x, y) -> float:
    """Sample Pearson correlation; NaN when either series is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("pearson needs two aligned 1-d series")
    if len(x) < 2:
        raise ValueError("pearson needs at least two points")
    # test constancy directly; the mean of a constant series can be off by an ulp
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return math.nan
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def common_dates(a: NormalizedSeries, b: NormalizedSeries) -> list[date]:
    shared = set(a.dates) & set(b.dates)
    return sorted(shared)


class CorrelationTable:
    """Symmetric ``(country, country) -> {class: r}`` lookup."""

    def __init__(self):
        self._rows: dict[tuple[str, str], dict[str, float]] = {}
        self.order: list[tuple[str, str]] = []
        self.n_days: dict[tuple[str, str], int] = {}

    def set(self, a, b, values, n_days):
        self._rows[(a, b)] = values
        self._rows[(b, a)] = values
        self.order.append((a, b))
        self.n_days[(a, b)] = self.n_days[(b, a)] = n_days

    def get(self, a, b) -> dict[str, float]:
        return self._rows[(a, b)]

    def as_dict(self) -> dict:
        return {
            f"{a}-{b}": {
                "n_days": self.n_days[(a, b)],
                "r": {cls: (None if math.isnan(v) else v) for cls, v in self._rows[(a, b)].items()},
            }
            for a, b in self.order
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def correlation_table(pairs: Iterable[tuple[str, str]], normalized: Mapping[str, NormalizedSeries], classes=CLASSES) -> CorrelationTable:
    """Pearson r per class for each country pair over their shared dates."""
    table = CorrelationTable()
    for a, b in pairs:
        for c in (a, b):
            if c not in normalized:
                raise KeyError(f"country {c!r} has no series")
        dates = common_dates(normalized[a], normalized[b])
        sa, sb = normalized[a].restrict(dates), normalized[b].restrict(dates)
        if len(dates) < 2:
            values = {cls: math.nan for cls in classes}
        else:
            values = {cls: pearson(sa.series(cls), sb.series(cls)) for cls in classes}
        table.set(a, b, values, len(dates))
    return table


# -- export -----------------------------------------------------------------


def tidy_rows(series_by_country: Mapping[str, object]):
    """Yield ``(country, date, class, value)`` rows for counts or normalized series."""
    for country in sorted(series_by_country):
        s = series_by_country[country]
        for cls in CLASSES:
            vals = s.series(cls)
            for d, v in zip(s.dates, vals):
                yield country, d.isoformat(), cls, v


def _fmt(v):
    v = float(v)
    return str(int(v)) if v.is_integer() else repr(v)


def write_tidy_csv(path, series_by_country: Mapping[str, object]):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["country", "date", "class", "value"])
        for country, d, cls, v in tidy_rows(series_by_country):
            writer.writerow([country, d, cls, _fmt(v)])


def series_to_json(series_by_country: Mapping[str, object]) -> dict:
    return {
        country: {
            "dates": [d.isoformat() for d in s.dates],
            "series": {cls: [float(v) for v in s.series(cls)] for cls in CLASSES},
        }
        for country, s in sorted(series_by_country.items())
    }


def read_tidy_csv(path) -> dict[str, NormalizedSeries]:
    """Inverse of :func:`write_tidy_csv` (values come back as floats)."""
    raw: dict[str, dict[str, dict[date, float]]] = defaultdict(lambda: defaultdict(dict))
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            raw[row["country"]][row["class"]][date.fromisoformat(row["date"])] = float(row["value"])
    out = {}
    for country, by_cls in raw.items():
        dates = sorted({d for vals in by_cls.values() for d in vals})
        values = {cls: np.array([by_cls.get(cls, {}).get(d, 0.0) for d in dates]) for cls in CLASSES}
        out[country] = NormalizedSeries(country, dates, values)
    return out
