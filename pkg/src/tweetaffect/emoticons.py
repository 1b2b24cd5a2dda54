"""Emotion/polarity label spaces, the emoticon lexicon and weak labels."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping


class Polarity(str, enum.Enum):
    NEGATIVE = "negative"
    POSITIVE = "positive"


class Emotion(str, enum.Enum):
    JOY = "joy"
    SURPRISE = "surprise"
    SAD = "sad"
    FEAR = "fear"
    ANGER = "anger"
    DISGUST = "disgust"

    @property
    def polarity(self) -> Polarity:
        return polarity_of(self)


POSITIVE_EMOTIONS = (Emotion.JOY, Emotion.SURPRISE)
NEGATIVE_EMOTIONS = (Emotion.SAD, Emotion.FEAR, Emotion.ANGER, Emotion.DISGUST)

_EMOTION_ALIASES = {
    "joy": Emotion.JOY,
    "surprise": Emotion.SURPRISE,
    "sad": Emotion.SAD,
    "sadness": Emotion.SAD,
    "fear": Emotion.FEAR,
    "anger": Emotion.ANGER,
    "disgust": Emotion.DISGUST,
}


def parse_emotion(label: str) -> Emotion:
    """Case-insensitive label lookup; raises ``ValueError`` for unknown names."""
    key = label.strip().lower()
    try:
        return _EMOTION_ALIASES[key]
    except KeyError:
        raise ValueError(f"unknown emotion label {label!r}") from None


def polarity_of(emotion: Emotion) -> Polarity:
    return Polarity.POSITIVE if emotion in POSITIVE_EMOTIONS else Polarity.NEGATIVE


def format_codepoint(cp: int) -> str:
    return f"U+{cp:04X}"


def parse_codepoint(text: str) -> int:
    text = text.strip().upper()
    if text.startswith("U+"):
        text = text[2:]
    return int(text, 16)


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class EmoticonLexicon:
    """Immutable codepoint -> Emotion map."""

    entries: Mapping[int, Emotion]
    descriptions: Mapping[int, str] = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, cp):
        return cp in self.entries

    def emotion_of(self, cp: int) -> Emotion | None:
        return self.entries.get(cp)

    @classmethod
    def from_lines(cls, lines: Iterable[str]) -> "EmoticonLexicon":
        entries: dict[int, Emotion] = {}
        descriptions: dict[int, str] = {}
        for lineno, raw in enumerate(lines, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise LexiconError(f"line {lineno}: expected 'U+XXXX<TAB>emotion[<TAB>description]'")
            try:
                cp = parse_codepoint(parts[0])
                emotion = parse_emotion(parts[1])
            except ValueError as exc:
                raise LexiconError(f"line {lineno}: {exc}") from None
            if cp in entries and entries[cp] is not emotion:
                raise LexiconError(
                    f"line {lineno}: {format_codepoint(cp)} mapped to both "
                    f"{entries[cp].value} and {emotion.value}"
                )
            entries[cp] = emotion
            descriptions[cp] = parts[2] if len(parts) > 2 else ""
        return cls(entries, descriptions)

    @classmethod
    def load(cls, path: str | Path) -> "EmoticonLexicon":
        with open(path, encoding="utf-8") as fh:
            return cls.from_lines(fh)

    @classmethod
    def default(cls) -> "EmoticonLexicon":
        text = resources.files("tweetaffect.data").joinpath("emoticons.tsv").read_text("utf-8")
        return cls.from_lines(text.splitlines())

    def to_lines(self) -> list[str]:
        return [
            f"{format_codepoint(cp)}\t{emo.value}\t{self.descriptions.get(cp, '')}"
            for cp, emo in self.entries.items()
        ]


_DEFAULT: EmoticonLexicon | None = None


def default_lexicon() -> EmoticonLexicon:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = EmoticonLexicon.default()
    return _DEFAULT


def emotion_of(cp: int, lexicon: EmoticonLexicon | None = None) -> Emotion | None:
    return (lexicon or default_lexicon()).emotion_of(cp)


# -- weak labels ------------------------------------------------------------


class WeakLabelKind(str, enum.Enum):
    POLARITY_ONLY = "polarity_only"
    EMOTION = "emotion"
    MIXED = "mixed"
    NO_EMOTICON = "no_emoticon"


@dataclass(frozen=True)
class WeakLabel:
    kind: WeakLabelKind
    polarity: Polarity | None = None
    emotion: Emotion | None = None

    @property
    def is_evaluable(self) -> bool:
        return self.polarity is not None


NO_EMOTICON = WeakLabel(WeakLabelKind.NO_EMOTICON)
MIXED = WeakLabel(WeakLabelKind.MIXED)


def weak_label(emoticons: Iterable[int], lexicon: EmoticonLexicon | None = None) -> WeakLabel:
    """Derive a weak label from the emoticons found in a tweet.

    Unmapped codepoints are ignored. A single shared emotion gives an
    ``EMOTION`` label, several emotions of one polarity give
    ``POLARITY_ONLY``, and emoticons of both polarities give ``MIXED``
    (treated as sarcasm and excluded from validation).
    """
    lex = lexicon or default_lexicon()
    emotions = {e for e in (lex.emotion_of(cp) for cp in emoticons) if e is not None}
    if not emotions:
        return NO_EMOTICON
    polarities = {polarity_of(e) for e in emotions}
    if len(polarities) > 1:
        return MIXED
    (pol,) = polarities
    if len(emotions) == 1:
        (emo,) = emotions
        return WeakLabel(WeakLabelKind.EMOTION, pol, emo)
    return WeakLabel(WeakLabelKind.POLARITY_ONLY, pol)


@dataclass
class CorpusPartition:
    no_emoticon: list = field(default_factory=list)
    positive: list = field(default_factory=list)
    negative: list = field(default_factory=list)
    mixed: list = field(default_factory=list)

    def sizes(self) -> dict[str, int]:
        return {
            "no_emoticon": len(self.no_emoticon),
            "positive": len(self.positive),
            "negative": len(self.negative),
            "mixed": len(self.mixed),
        }

    def __len__(self):
        return sum(self.sizes().values())


def partition_corpus(records: Iterable, lexicon: EmoticonLexicon | None = None) -> CorpusPartition:
    """Split records (with ``emoticons`` populated) into the four sub-corpora."""
    part = CorpusPartition()
    for rec in records:
        if rec.emoticons is None:
            raise ValueError(f"record {rec.tweet_id!r} has no extracted emoticons")
        label = weak_label(rec.emoticons, lexicon)
        if label.kind is WeakLabelKind.NO_EMOTICON:
            part.no_emoticon.append(rec)
        elif label.kind is WeakLabelKind.MIXED:
            part.mixed.append(rec)
        elif label.polarity is Polarity.POSITIVE:
            part.positive.append(rec)
        else:
            part.negative.append(rec)
    return part
