import numpy as np
import pytest
from sklearn.base import clone

from conftest import FILLER, tiny_training_set
from tweetaffect.emoticons import NEGATIVE_EMOTIONS, POSITIVE_EMOTIONS, Emotion, Polarity
from tweetaffect.metrics import compute_metrics, metrics_from_confusion
from tweetaffect.pipeline import (
    ClassifierSpec,
    TweetClassifier,
    TwoStageAnalyser,
    read_predictions,
    split_dataset,
    train_classifier,
    write_predictions,
)


def test_split_ratios():
    labels = ["pos"] * 500 + ["neg"] * 500
    train, val, test = split_dataset(labels, seed=0)
    assert (len(train), len(val), len(test)) == (810, 90, 100)
    assert sum(labels[i] == "pos" for i in test) == 50
    assert not (set(train) & set(val) or set(train) & set(test) or set(val) & set(test))
    again = split_dataset(labels, seed=0)
    assert all(np.array_equal(a, b) for a, b in zip((train, val, test), again))
    assert not np.array_equal(split_dataset(labels, seed=1)[2], test)


def test_split_rejects_tiny_class():
    with pytest.raises(ValueError, match="only 9"):
        split_dataset(["a"] * 50 + ["b"] * 9, seed=0)


def test_metrics_hand_examples():
    m = metrics_from_confusion(np.array([[40, 10], [20, 30]]), ["negative", "positive"])
    assert m.accuracy == pytest.approx(0.70)
    assert m.f1 == pytest.approx(2 / 3)
    y = ["a", "b", "c"] * 4
    m = compute_metrics(y, ["a"] * 12, ["a", "b", "c"])
    assert m.macro_f1 == pytest.approx(0.5 / 3) and m.f1 == m.macro_f1
    perfect = compute_metrics(y, y, ["a", "b", "c"])
    assert perfect.accuracy == 1.0 and perfect.f1 == 1.0


def _brute_force(truth, pred, labels):
    acc = sum(t == p for t, p in zip(truth, pred)) / len(truth)
    f1s = []
    for lab in labels:
        tp = sum(t == lab and p == lab for t, p in zip(truth, pred))
        fp = sum(t != lab and p == lab for t, p in zip(truth, pred))
        fn = sum(t == lab and p != lab for t, p in zip(truth, pred))
        f1s.append(0.0 if tp + fp + fn == 0 else 2 * tp / (2 * tp + fp + fn))
    return acc, f1s


def test_metrics_match_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(200):
        k = int(rng.integers(2, 4))
        labels = [f"c{i}" for i in range(k)]
        n = int(rng.integers(1, 60))
        truth = list(rng.choice(labels, size=n))
        pred = list(rng.choice(labels, size=n))
        m = compute_metrics(truth, pred, labels)
        acc, f1s = _brute_force(truth, pred, labels)
        assert m.accuracy == pytest.approx(acc, abs=1e-12)
        assert m.macro_f1 == pytest.approx(sum(f1s) / k, abs=1e-12)
        assert m.f1 == pytest.approx(f1s[-1] if k == 2 else sum(f1s) / k, abs=1e-12)
        assert m.accuracy == np.trace(m.confusion) / m.confusion.sum()


def test_spec_label_sets():
    assert ClassifierSpec("B").labels == ("joy", "surprise")
    assert ClassifierSpec("C").labels == ("sad", "fear", "anger")
    assert ClassifierSpec("A").variant == "lstm-fasttext"
    assert ClassifierSpec("C").variant == "lstm-glove-twitter"
    texts, labels = ClassifierSpec("C").select(["a", "b", "c"], ["disgust", "sad", "joy"])
    assert (texts, labels) == (["b"], ["sad"])


def test_estimator_api():
    clf = TweetClassifier(variant="dnn-baseline", seq_len=10, epochs=1)
    assert clone(clf).get_params() == clf.get_params()
    clf.set_params(units=4)
    assert clf.units == 4


def test_missing_embedding_fails_before_training(tmp_path):
    clf = TweetClassifier(variant="lstm-fasttext", embedding_path=str(tmp_path / "nope.vec"))
    with pytest.raises(FileNotFoundError):
        clf.fit(["a b"] * 20, ["x", "y"] * 10)


def test_train_classifier_with_pretrained(corpus_dir):
    texts, labels = tiny_training_set("A", n_per_class=80)
    spec = ClassifierSpec("A", "lstm-fasttext", epochs=3, seed=2,
                          options={"seq_len": 20, "embedding_path": str(corpus_dir / "fasttext.vec"),
                                   "learning_rate": 0.01, "batch_size": 16})
    result = train_classifier(spec, texts, labels)
    assert result.split_sizes == {"train": 130, "val": 14, "test": 16}
    assert [row["epoch"] for row in result.history] == [1, 2, 3]
    assert {"val_loss", "val_accuracy"} <= set(result.history[0])
    assert 0 < result.model.embedding_coverage_ <= 1
    assert result.metrics.accuracy >= 0.75


def test_classifier_save_load(tiny_models, tmp_path):
    model = tiny_models["C"]
    texts = ["scared of the dark", "furious about the game", ""]
    model.save(tmp_path / "c.ckpt")
    back = TweetClassifier.load(tmp_path / "c.ckpt")
    assert back.decision_scores(texts).tobytes() == model.decision_scores(texts).tobytes()
    assert list(back.classes_) == ["sad", "fear", "anger"]
    np.testing.assert_allclose(model.predict_proba(texts).sum(axis=1), 1.0)


def test_two_stage_routing(tiny_models):
    analyser = TwoStageAnalyser(tiny_models["A"], tiny_models["B"], tiny_models["C"])
    texts = ["love love great day", "hate awful worst night", "", "@who :"]
    preds = analyser.predict(texts)
    assert len(preds) == 4
    assert preds[0].polarity is Polarity.POSITIVE and preds[0].emotion in POSITIVE_EMOTIONS
    assert preds[1].polarity is Polarity.NEGATIVE and preds[1].emotion in NEGATIVE_EMOTIONS
    assert preds[2].low_confidence and preds[3].low_confidence
    assert not preds[0].low_confidence
    assert len(preds[1].emotion_scores) == 3 and len(preds[0].emotion_scores) == 2


def test_two_stage_rejects_wrong_models(tiny_models):
    with pytest.raises(ValueError):
        TwoStageAnalyser(tiny_models["A"], tiny_models["C"], tiny_models["B"])


def test_routing_invariant_fuzzed(tiny_models):
    analyser = TwoStageAnalyser(tiny_models["A"], tiny_models["B"], tiny_models["C"])
    rng = np.random.default_rng(0)
    vocab = FILLER + ["love", "hate", "glad", "scared", "furious", "wow", "é", "😀", "@x", ":"]
    texts = [" ".join(rng.choice(vocab, size=rng.integers(0, 8))) for _ in range(500)]
    for p in analyser.predict(texts):
        assert p.emotion.polarity is p.polarity


def test_predictions_csv_round_trip(tiny_models, tmp_path):
    analyser = TwoStageAnalyser(tiny_models["A"], tiny_models["B"], tiny_models["C"])
    preds = analyser.predict(["great fun", "sad tears"])
    write_predictions(tmp_path / "p.csv", ["1", "2"], preds)
    back = read_predictions(tmp_path / "p.csv")
    assert back == {"1": (preds[0].polarity, preds[0].emotion), "2": (preds[1].polarity, preds[1].emotion)}
    header = (tmp_path / "p.csv").read_text().splitlines()[0]
    assert header == "tweet_id,polarity,p_scores,emotion,e_scores,low_confidence"


def test_class_weight_changes_training():
    texts, labels = tiny_training_set("B", n_per_class=30)
    base = dict(variant="lstm-scratch", seq_len=12, epochs=1, embedding_dim=8, units=4, batch_size=8)
    a = TweetClassifier(**base).fit(texts, labels)
    b = TweetClassifier(**base, class_weight="balanced").fit(texts, labels)
    c = TweetClassifier(**base, class_weight=[1.0, 3.0]).fit(texts, labels)
    # balanced data: "balanced" weights are all one
    assert a.decision_scores(texts).tobytes() == b.decision_scores(texts).tobytes()
    assert a.decision_scores(texts).tobytes() != c.decision_scores(texts).tobytes()
    assert Emotion.JOY.value in a.classes_
