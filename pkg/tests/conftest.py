"""Shared synthetic corpora and small embedding files.

Everything here is generated from fixed seeds so the files are identical on
every run; no network or real datasets are needed.
"""

from __future__ import annotations

import csv
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

POS_WORDS = ["love", "great", "happy", "awesome", "wonderful", "best", "thanks", "amazing", "fun", "nice"]
NEG_WORDS = ["hate", "awful", "sad", "terrible", "worst", "angry", "bad", "sick", "cry", "miss"]
FILLER = ["day", "today", "work", "time", "game", "movie", "night", "home", "week", "friend",
          "phone", "food", "music", "school", "weather", "city", "news", "team", "show", "coffee"]
EMOTION_WORDS = {
    "joy": ["delighted", "cheerful", "glad", "joyful", "smiling"],
    "surprise": ["shocked", "unexpected", "wow", "astonished", "sudden"],
    "sadness": ["lonely", "tears", "grief", "gloomy", "heartbroken"],
    "fear": ["scared", "afraid", "terrified", "nervous", "panic"],
    "anger": ["furious", "rage", "annoyed", "mad", "outraged"],
    "disgust": ["gross", "nasty", "vile", "revolting", "yuck"],
}


def synthetic_sentence(rng, keywords, n_key=2, n_fill=4):
    words = list(rng.choice(keywords, size=n_key)) + list(rng.choice(FILLER, size=n_fill))
    rng.shuffle(words)
    return " ".join(words)


def write_sentiment140(path, n=10_000, seed=7):
    """Six-field quoted lines, code 0/4 balanced."""
    rng = np.random.default_rng(seed)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_ALL, lineterminator="\n")
        for i in range(n):
            positive = i % 2 == 0
            text = synthetic_sentence(rng, POS_WORDS if positive else NEG_WORDS)
            if i % 7 == 0:
                text = f"@user{i} " + text
            writer.writerow(["4" if positive else "0", str(1000 + i), "Mon Apr 06 22:19:45 PDT 2009",
                             "NO_QUERY", f"user{i}", text])
    return path


def write_emotional_tweets(path, per_class=400, seed=11):
    """``id:<TAB>text<TAB>:: label`` lines."""
    rng = np.random.default_rng(seed)
    rows = []
    for label, words in EMOTION_WORDS.items():
        for _ in range(per_class):
            rows.append((synthetic_sentence(rng, words), label))
    order = rng.permutation(len(rows))
    with open(path, "w", encoding="utf-8") as fh:
        for k, i in enumerate(order):
            text, label = rows[i]
            fh.write(f"{100000 + k}:\t{text}\t:: {label}\n")
    return path


def write_embeddings(path, words, dim, fmt, seed=3):
    rng = np.random.default_rng(seed)
    with open(path, "w", encoding="utf-8") as fh:
        if fmt == "fasttext-vec":
            fh.write(f"{len(words)} {dim}\n")
        for w in words:
            vec = rng.normal(scale=0.3, size=dim)
            fh.write(w + " " + " ".join(f"{v:.5f}" for v in vec) + "\n")
    return path


LOCATIONS = {"US": "New York, NY", "CA": "Toronto, Canada"}
LOCATION_MAP = "new york, ny\tUS\nny\tUS\ntoronto\tCA\ncanada\tCA\n"

POSITIVE_EMOJI = ["\U0001F600", "\U0001F602", "\U0001F632"]
NEGATIVE_EMOJI = ["\U0001F622", "\U0001F620", "\U0001F628"]


def write_tweet_csv(path, n=600, days=10, seed=5):
    """Kaggle-style tweet catalog for two countries, some tweets carrying emoticons."""
    rng = np.random.default_rng(seed)
    start = datetime(2020, 3, 1, tzinfo=timezone.utc)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["Tweet Id", "Time", "Original Text", "User Name", "User Location"])
        for i in range(n):
            country = "US" if i % 2 == 0 else "CA"
            positive = rng.random() < 0.5
            text = synthetic_sentence(rng, POS_WORDS if positive else NEG_WORDS)
            r = rng.random()
            if r < 0.4:
                text += " " + rng.choice(POSITIVE_EMOJI if positive else NEGATIVE_EMOJI)
            elif r < 0.45:
                text += " " + POSITIVE_EMOJI[0] + NEGATIVE_EMOJI[0]
            when = start + timedelta(days=int(rng.integers(days)), seconds=int(rng.integers(86400)))
            writer.writerow([str(500000 + i), when.strftime("%Y-%m-%dT%H:%M:%SZ"), text, f"u{i}",
                             LOCATIONS[country]])
    return path


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    write_sentiment140(d / "sentiment140.csv")
    write_emotional_tweets(d / "emotional.txt")
    write_tweet_csv(d / "tweets.csv")
    (d / "locations.tsv").write_text(LOCATION_MAP, encoding="utf-8")
    vocab = POS_WORDS + NEG_WORDS + FILLER + [w for ws in EMOTION_WORDS.values() for w in ws]
    write_embeddings(d / "fasttext.vec", vocab[::2], 300, "fasttext-vec")
    write_embeddings(d / "glove200.txt", vocab[::2], 200, "glove-text")
    return d


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def tiny_training_set(stage, n_per_class=60, seed=0):
    """Small keyword-separable texts for the labels of one stage."""
    rng = np.random.default_rng(seed)
    words = {
        "A": {"negative": NEG_WORDS, "positive": POS_WORDS},
        "B": {"joy": EMOTION_WORDS["joy"], "surprise": EMOTION_WORDS["surprise"]},
        "C": {"sad": EMOTION_WORDS["sadness"], "fear": EMOTION_WORDS["fear"], "anger": EMOTION_WORDS["anger"]},
    }[stage]
    texts, labels = [], []
    for label, kws in words.items():
        for _ in range(n_per_class):
            texts.append(synthetic_sentence(rng, kws))
            labels.append(label)
    return texts, labels


@pytest.fixture(scope="session")
def tiny_models():
    """Stage A/B/C classifiers trained for a few epochs on keyword data."""
    from tweetaffect.pipeline import ClassifierSpec

    models = {}
    for stage in "ABC":
        spec = ClassifierSpec(stage, "lstm-scratch", epochs=4, seed=1,
                              options={"seq_len": 20, "embedding_dim": 16, "units": 8, "batch_size": 16,
                                       "learning_rate": 0.01})
        texts, labels = tiny_training_set(stage)
        models[stage] = spec.estimator().fit(texts, labels)
    return models
