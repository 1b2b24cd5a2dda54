import json
import math
from datetime import date, datetime, timedelta, timezone

import numpy as np
import pytest

from tweetaffect.analytics import (
    CLASSES,
    DailySeries,
    NormalizedSeries,
    aggregate_daily,
    average_line,
    correlation_table,
    normalize,
    pearson,
    read_tidy_csv,
    series_to_json,
    stacked_emotions,
    write_tidy_csv,
)
from tweetaffect.emoticons import Emotion, Polarity
from tweetaffect.ingest import TweetRecord


def brute_pearson(x, y):
    """Two-pass reference with compensated sums."""
    n = len(x)
    mx = math.fsum(x) / n
    my = math.fsum(y) / n
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def _rec(i, day, country="US", hour=12):
    when = datetime(2020, 3, day, hour, tzinfo=timezone.utc)
    return TweetRecord(str(i), when, "t", country=country)


def _series(country, values_by_class, start=date(2020, 3, 1)):
    n = len(next(iter(values_by_class.values())))
    dates = [start + timedelta(days=k) for k in range(n)]
    vals = {c: np.asarray(values_by_class.get(c, [0.0] * n), dtype=float) for c in CLASSES}
    return NormalizedSeries(country, dates, vals)


def test_pearson_examples():
    x = np.arange(10.0)
    assert pearson(x, x) == 1.0
    assert pearson(x, -3 * x + 7) == -1.0
    assert pearson([1, 2, 3], [2, 4, 7]) == pytest.approx(5 / (math.sqrt(2) * math.sqrt(38 / 3)), abs=1e-12)
    assert pearson([1, 2, 3], [2, 4, 7]) == pytest.approx(0.9934, abs=1e-4)
    assert math.isnan(pearson([1, 1, 1], [1, 2, 3]))
    with pytest.raises(ValueError):
        pearson([1.0], [2.0])


def test_pearson_matches_oracle_on_1000_pairs():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        n = int(rng.integers(2, 200))
        x = rng.normal(size=n) * rng.uniform(0.01, 100) + rng.uniform(-50, 50)
        y = 0.5 * x + rng.normal(size=n) * rng.uniform(0.01, 10)
        assert abs(pearson(x, y) - brute_pearson(list(x), list(y))) < 1e-12


def test_pearson_symmetry_and_affine_invariance():
    rng = np.random.default_rng(1)
    x, y = rng.random(30), rng.random(30)
    r = pearson(x, y)
    assert pearson(y, x) == pytest.approx(r, abs=1e-15)
    assert pearson(3.5 * x + 2, y) == pytest.approx(r, abs=1e-12)
    assert pearson(x, 0.1 * y - 4) == pytest.approx(r, abs=1e-12)


def test_aggregate_hand_tally():
    recs = [_rec(0, 1), _rec(1, 1), _rec(2, 1)]
    preds = [(Polarity.POSITIVE, Emotion.JOY), (Polarity.POSITIVE, Emotion.SURPRISE), (Polarity.NEGATIVE, Emotion.SAD)]
    (s,) = aggregate_daily(recs, preds).values()
    assert s.counts["positive"].tolist() == [2] and s.counts["negative"].tolist() == [1]
    assert s.counts["joy"].tolist() == [1] and s.counts["sad"].tolist() == [1]
    assert aggregate_daily([], []) == {}


def test_aggregate_gap_fill_utc_and_unassigned():
    recs = [_rec(0, 1), _rec(1, 5), _rec(2, 3, country=None)]
    recs.append(TweetRecord("3", datetime(2020, 3, 2, 23, 30, tzinfo=timezone(timedelta(hours=-5))), "t", country="US"))
    preds = {r.tweet_id: (Polarity.NEGATIVE, Emotion.FEAR) for r in recs}
    out = aggregate_daily(recs, preds)
    us = out["US"]
    assert us.dates == [date(2020, 3, d) for d in range(1, 6)]
    # 23:30 at UTC-5 is 04:30 UTC the next day
    assert us.counts["negative"].tolist() == [1, 0, 1, 0, 1]
    assert out["unassigned"].total == 1


def test_normalize_examples():
    dates = [date(2020, 3, d) for d in (1, 2, 3)]
    counts = {c: np.zeros(3, dtype=np.int64) for c in CLASSES}
    counts["positive"] = np.array([2, 1, 1])
    s = DailySeries("US", dates, counts)
    n = normalize(s)
    assert n.values["positive"].tolist() == [0.5, 0.25, 0.25]
    assert not n.values["anger"].any()
    one = DailySeries("US", dates[:1], {c: np.array([3 if c == "positive" else 1 if c == "negative" else 0]) for c in CLASSES})
    assert normalize(one).values["positive"].tolist() == [0.75]
    with pytest.raises(ValueError):
        normalize(DailySeries("XX", dates, {c: np.zeros(3, dtype=np.int64) for c in CLASSES}))


def test_normalize_per_day_and_argmax():
    rng = np.random.default_rng(0)
    dates = [date(2020, 3, 1) + timedelta(days=k) for k in range(20)]
    counts = {c: rng.integers(0, 9, size=20) for c in CLASSES}
    s = DailySeries("US", dates, counts)
    n = normalize(s)
    for c in CLASSES:
        assert n.values[c].argmax() == counts[c].argmax()
        assert np.all((n.values[c] >= 0) & (n.values[c] <= 1))
    total = normalize(s)
    assert math.isclose(total.values["positive"].sum() + total.values["negative"].sum(), 1.0)
    per_day = normalize(s, "per-day")
    pd_sum = per_day.values["positive"] + per_day.values["negative"]
    assert np.allclose(pd_sum[s.tweets_per_day > 0], 1.0)


def test_average_line():
    assert average_line(_series("US", {"positive": [0.1, 0.3]}))["positive"] == pytest.approx(0.2)
    assert average_line(_series("US", {"joy": [0.4] * 5}))["joy"] == pytest.approx(0.4)


def test_stacked_emotions():
    s = _series("US", {"sad": [0.2, 0.2], "fear": [0.2, 0.2]})
    stacks = stacked_emotions(s, 25)
    np.testing.assert_allclose(stacks["negative"], [[12.5, 12.5], [25, 25], [25, 25]])
    assert not stacks["positive"].any()
    only = stacked_emotions(_series("US", {"joy": [0.1, 0.4, 0.2]}), 25)["positive"]
    np.testing.assert_allclose(only[0], [6.25, 25, 12.5])
    np.testing.assert_allclose(only[1], only[0])
    rng = np.random.default_rng(3)
    rand = stacked_emotions(_series("US", {c: rng.random(15) for c in CLASSES}), 25)
    for arr in rand.values():
        assert np.all(np.diff(arr, axis=0) >= 0)
        assert arr[-1].max() == pytest.approx(25)
    with pytest.raises(ValueError):
        stacked_emotions(s, 0)


def test_correlation_table():
    rng = np.random.default_rng(7)
    a = _series("US", {c: rng.random(30) for c in CLASSES})
    table = correlation_table([("US", "US")], {"US": a})
    assert all(v == pytest.approx(1.0) for v in table.get("US", "US").values())
    b = _series("CA", {c: rng.random(30) for c in CLASSES}, start=date(2020, 3, 11))
    table = correlation_table([("US", "CA")], {"US": a, "CA": b})
    assert table.get("CA", "US") is table.get("US", "CA")
    assert table.n_days[("US", "CA")] == 20
    want = brute_pearson(list(a.values["joy"][10:]), list(b.values["joy"][:20]))
    assert table.get("US", "CA")["joy"] == pytest.approx(want, abs=1e-12)
    assert set(table.get("US", "CA")) == set(CLASSES)
    with pytest.raises(KeyError):
        correlation_table([("US", "MX")], {"US": a})


def test_independent_noise_is_weakly_correlated():
    rng = np.random.default_rng(2024)
    a = _series("A", {c: rng.random(60) for c in CLASSES})
    b = _series("B", {c: rng.random(60) for c in CLASSES})
    table = correlation_table([("A", "B")], {"A": a, "B": b})
    assert all(abs(r) < 0.3 for r in table.get("A", "B").values())


def test_constant_series_reported_as_undefined():
    a = _series("A", {"positive": [0.1, 0.1, 0.1], "negative": [0.1, 0.2, 0.3]})
    b = _series("B", {"positive": [0.3, 0.1, 0.2], "negative": [0.2, 0.2, 0.5]})
    table = correlation_table([("A", "B")], {"A": a, "B": b})
    assert math.isnan(table.get("A", "B")["positive"])
    assert json.loads(table.to_json())["A-B"]["r"]["positive"] is None


def test_tidy_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    series = {"US": _series("US", {c: rng.random(4) for c in CLASSES}),
              "CA": _series("CA", {c: rng.random(3) for c in CLASSES})}
    write_tidy_csv(tmp_path / "s.csv", series)
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "country,date,class,value"
    back = read_tidy_csv(tmp_path / "s.csv")
    for c in series:
        assert back[c].dates == series[c].dates
        for cls in CLASSES:
            assert back[c].values[cls].tolist() == series[c].values[cls].tolist()
    assert series_to_json(series)["US"]["dates"][0] == "2020-03-01"
