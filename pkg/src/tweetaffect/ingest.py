"""Corpus parsers: Sentiment140, Emotional Tweets and hashtag/Kaggle tweet CSVs.

All parsers are generators reading one line at a time, so memory use does
not grow with the file. Per-line problems are collected on a
:class:`ParseReport` instead of aborting the stream.

Emotional Tweets layout
-----------------------
Two layouts are accepted, detected per line:

* the original distribution, ``<id>:<TAB><text><TAB>:: <label>``
* a delimited file whose last field is the label (``text<TAB>label`` or a
  ``text,label`` CSV). A header line whose label column reads ``label`` or
  ``emotion`` is skipped and not counted as a rejection.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Iterable, Iterator

from .emoticons import Emotion, Polarity, format_codepoint, parse_codepoint, parse_emotion

csv.field_size_limit(min(sys.maxsize, 2**31 - 1))

MAX_STORED_ERRORS = 1000


@dataclass(frozen=True)
class TweetRecord:
    tweet_id: str
    time: datetime
    original_text: str
    user_name: str = ""
    user_location: str = ""
    country: str | None = None
    cleaned_text: str | None = None
    emoticons: tuple[int, ...] | None = None
    subjectivity: Decimal | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.tweet_id:
            raise ValueError("tweet_id must be non-empty")
        if self.time.tzinfo is None:
            object.__setattr__(self, "time", self.time.replace(tzinfo=timezone.utc))


@dataclass(frozen=True)
class LabeledPolarityRecord:
    text: str
    polarity: Polarity

    @property
    def label(self):
        return self.polarity


@dataclass(frozen=True)
class LabeledEmotionRecord:
    text: str
    emotion: Emotion

    @property
    def label(self):
        return self.emotion


@dataclass
class ParseReport:
    """Accepted/rejected tallies plus the first few error messages."""

    lines: int = 0
    accepted: int = 0
    rejected: int = 0
    skipped_header: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)
    reasons: Counter = field(default_factory=Counter)

    def reject(self, lineno: int, reason: str, kind: str = "malformed"):
        self.rejected += 1
        self.reasons[kind] += 1
        if len(self.errors) < MAX_STORED_ERRORS:
            self.errors.append((lineno, reason))

    def as_dict(self) -> dict:
        return {
            "lines": self.lines,
            "accepted": self.accepted,
            "rejected": self.rejected,
            "skipped_header": self.skipped_header,
            "rejections_by_kind": dict(sorted(self.reasons.items())),
            "first_errors": [{"line": n, "reason": r} for n, r in self.errors[:20]],
        }


def _decode(raw: bytes) -> str:
    # Sentiment140 ships as latin-1 in places
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError:
        return raw.decode("latin-1")


def _iter_lines(path: str | Path) -> Iterator[tuple[int, str]]:
    with open(path, "rb") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = _decode(raw).rstrip("\r\n")
            if lineno == 1 and line.startswith("﻿"):
                line = line[1:]
            yield lineno, line


def _split_csv_line(line: str, delimiter: str = ",") -> list[str]:
    rows = list(csv.reader([line], delimiter=delimiter, strict=True))
    return rows[0] if rows else []


SENTIMENT140_CODES = {"0": Polarity.NEGATIVE, "4": Polarity.POSITIVE}


def parse_sentiment140(path: str | Path, report: ParseReport | None = None) -> Iterator[LabeledPolarityRecord]:
    """Stream Sentiment140 rows as polarity records.

    Each line holds six quoted fields: code, id, date, query, user, text.
    Code 0 is negative and 4 is positive. Any other code is rejected.
    """
    report = report if report is not None else ParseReport()
    for lineno, line in _iter_lines(path):
        report.lines += 1
        if not line.strip():
            report.reject(lineno, "blank line")
            continue
        try:
            fields = _split_csv_line(line)
        except csv.Error as exc:
            report.reject(lineno, f"csv error: {exc}")
            continue
        if len(fields) != 6:
            report.reject(lineno, f"expected 6 fields, found {len(fields)}")
            continue
        code = fields[0].strip()
        if code not in SENTIMENT140_CODES:
            report.reject(lineno, f"sentiment code {code!r} not in {{0, 4}}", kind="bad_label")
            continue
        report.accepted += 1
        yield LabeledPolarityRecord(fields[5], SENTIMENT140_CODES[code])


_EMOTION_HEADER_NAMES = {"label", "emotion", "class", "affect dimension"}


def parse_emotional_tweets(path: str | Path, report: ParseReport | None = None) -> Iterator[LabeledEmotionRecord]:
    report = report if report is not None else ParseReport()
    for lineno, line in _iter_lines(path):
        report.lines += 1
        if not line.strip():
            report.reject(lineno, "blank line")
            continue
        if "\t::" in line:
            body, _, label = line.rpartition("\t::")
            text = body.split("\t", 1)[1] if "\t" in body else body
        else:
            delim = "\t" if "\t" in line else ","
            try:
                fields = _split_csv_line(line, delim)
            except csv.Error as exc:
                report.reject(lineno, f"csv error: {exc}")
                continue
            if len(fields) < 2:
                report.reject(lineno, "expected text and label fields")
                continue
            text, label = fields[-2], fields[-1]
            if lineno == 1 and label.strip().lower() in _EMOTION_HEADER_NAMES:
                report.lines -= 1
                report.skipped_header += 1
                continue
        try:
            emotion = parse_emotion(label)
        except ValueError as exc:
            report.reject(lineno, str(exc), kind="bad_label")
            continue
        report.accepted += 1
        yield LabeledEmotionRecord(text.strip(), emotion)


def dataset_stats(records: Iterable) -> dict:
    """Per-class counts (in label-enum order) and the total."""
    counts: Counter = Counter()
    label_type = None
    for rec in records:
        counts[rec.label] += 1
        label_type = type(rec.label)
    members = list(label_type) if label_type is not None else []
    out = {m.value: counts.get(m, 0) for m in members}
    return {"counts": out, "total": sum(counts.values())}


# -- hashtag / Kaggle tweet catalogs ------------------------------------------

# canonical field -> accepted header spellings (compared lowercased, '_' == ' ')
COLUMN_ALIASES = {
    "tweet_id": ("tweet id", "tweet_id", "id", "status id", "status_id", "id_str"),
    "time": ("time", "created at", "created_at", "date", "timestamp"),
    "original_text": ("original text", "original_text", "text", "tweet", "full_text"),
    "cleaned_text": ("cleaned text", "cleaned_text"),
    "user_name": ("user name", "user_name", "screen name", "screen_name", "username", "user"),
    "user_location": ("user location", "user_location", "location"),
    "country": ("country", "country code", "country_code"),
    "emoticons": ("emoticons",),
    "subjectivity": ("subjectivity",),
}


def _norm_header(name: str) -> str:
    return name.strip().lower().replace("_", " ")


def resolve_columns(header: list[str]) -> dict[str, int]:
    normalized = [_norm_header(h) for h in header]
    mapping: dict[str, int] = {}
    for canon, aliases in COLUMN_ALIASES.items():
        for alias in aliases:
            alias = _norm_header(alias)
            if alias in normalized:
                mapping[canon] = normalized.index(alias)
                break
    missing = [c for c in ("tweet_id", "time", "original_text") if c not in mapping]
    if missing:
        raise ValueError(f"tweet CSV lacks required columns {missing}; header was {header}")
    return mapping


def parse_timestamp(value: str) -> datetime:
    value = value.strip()
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(value)
    except ValueError:
        dt = datetime.strptime(value, "%a %b %d %H:%M:%S %z %Y")
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def load_location_map(path: str | Path) -> dict[str, str]:
    """Read ``location<TAB>CC`` lines; keys are lowercased."""
    mapping = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip() or line.startswith("#"):
                continue
            loc, _, cc = line.rstrip("\n").rpartition("\t")
            if not loc:
                raise ValueError(f"bad location map line: {line!r}")
            mapping[loc.strip().lower()] = cc.strip().upper()
    return mapping


def country_from_location(location: str, mapping: dict[str, str]) -> str | None:
    """Exact (case-insensitive) match first, then each comma-separated part from the right."""
    loc = location.strip().lower()
    if not loc:
        return None
    if loc in mapping:
        return mapping[loc]
    for part in reversed(loc.split(",")):
        part = part.strip()
        if part in mapping:
            return mapping[part]
    return None


def _parse_emoticon_field(value: str) -> tuple[int, ...] | None:
    value = value.strip()
    if not value:
        return None
    if value == "-":
        return ()
    return tuple(parse_codepoint(tok) for tok in value.split())


def parse_tweet_csv(
    path: str | Path,
    location_map: dict[str, str] | None = None,
    report: ParseReport | None = None,
) -> Iterator[TweetRecord]:
    """Stream a hashtag-catalog or Kaggle-style tweet CSV as :class:`TweetRecord`.

    Uses ``csv.reader`` over the open file, so quoted multi-line text fields
    are supported; line numbers in errors refer to the physical line where the
    offending row ends.
    """
    report = report if report is not None else ParseReport()
    with open(path, encoding="utf-8", errors="replace", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            return
        cols = resolve_columns(header)
        report.skipped_header += 1
        while True:
            try:
                row = next(reader)
            except StopIteration:
                break
            except csv.Error as exc:
                report.lines += 1
                report.reject(reader.line_num, f"csv error: {exc}")
                continue
            report.lines += 1
            try:
                rec = _row_to_record(row, cols, location_map)
            except (ValueError, IndexError, InvalidOperation) as exc:
                report.reject(reader.line_num, str(exc))
                continue
            report.accepted += 1
            yield rec


def _row_to_record(row, cols, location_map) -> TweetRecord:
    def get(name):
        idx = cols.get(name)
        return row[idx] if idx is not None and idx < len(row) else ""

    if len(row) < len(set(cols.values())):
        raise ValueError(f"row has {len(row)} fields")
    country = get("country").strip().upper() or None
    location = get("user_location")
    if country is None and location_map:
        country = country_from_location(location, location_map)
    subj = get("subjectivity").strip()
    return TweetRecord(
        tweet_id=get("tweet_id").strip(),
        time=parse_timestamp(get("time")),
        original_text=get("original_text"),
        user_name=get("user_name"),
        user_location=location,
        country=country,
        cleaned_text=get("cleaned_text") or None,
        emoticons=_parse_emoticon_field(get("emoticons")),
        subjectivity=Decimal(subj) if subj else None,
    )


CANONICAL_HEADER = [
    "tweet_id",
    "time",
    "original_text",
    "cleaned_text",
    "user_name",
    "user_location",
    "country",
    "emoticons",
    "subjectivity",
]


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def record_to_row(rec: TweetRecord) -> list[str]:
    if rec.emoticons is None:
        emo = ""
    elif not rec.emoticons:
        emo = "-"
    else:
        emo = " ".join(format_codepoint(cp) for cp in rec.emoticons)
    return [
        rec.tweet_id,
        format_timestamp(rec.time),
        rec.original_text,
        rec.cleaned_text if rec.cleaned_text is not None else "",
        rec.user_name,
        rec.user_location,
        rec.country or "",
        emo,
        str(rec.subjectivity) if rec.subjectivity is not None else "",
    ]


def write_records(records: Iterable[TweetRecord], out) -> int:
    """Write canonical-record CSV to a path or text stream; returns the row count."""
    if isinstance(out, (str, Path)):
        with open(out, "w", encoding="utf-8", newline="") as fh:
            return write_records(records, fh)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CANONICAL_HEADER)
    n = 0
    for rec in records:
        writer.writerow(record_to_row(rec))
        n += 1
    return n


def read_records(path: str | Path, report: ParseReport | None = None) -> Iterator[TweetRecord]:
    """Re-read canonical CSV written by :func:`write_records`."""
    return parse_tweet_csv(path, report=report)


def records_to_string(records: Iterable[TweetRecord]) -> str:
    buf = io.StringIO()
    write_records(records, buf)
    return buf.getvalue()


def with_country(rec: TweetRecord, country: str | None) -> TweetRecord:
    return replace(rec, country=country)


def stats_json(stats: dict, report: ParseReport | None = None) -> str:
    payload = dict(stats)
    if report is not None:
        payload["parse"] = report.as_dict()
    return json.dumps(payload, indent=2, sort_keys=True)
