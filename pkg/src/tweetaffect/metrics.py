from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


def confusion_matrix(y_true, y_pred, labels: Sequence) -> np.ndarray:
    """Rows are true labels, columns predictions, both in ``labels`` order."""
    index = {lab: i for i, lab in enumerate(labels)}
    cm = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        try:
            cm[index[t], index[p]] += 1
        except KeyError as exc:
            raise ValueError(f"label {exc.args[0]!r} not in {list(labels)}") from None
    return cm


def _f1_per_class(cm):
    tp = np.diag(cm).astype(float)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    denom = 2 * tp + fp + fn
    with np.errstate(invalid="ignore", divide="ignore"):
        f1 = np.where(denom > 0, 2 * tp / np.where(denom > 0, denom, 1), 0.0)
        precision = np.where(tp + fp > 0, tp / np.where(tp + fp > 0, tp + fp, 1), 0.0)
        recall = np.where(tp + fn > 0, tp / np.where(tp + fn > 0, tp + fn, 1), 0.0)
    return precision, recall, f1


@dataclass
class Metrics:
    labels: list
    confusion: np.ndarray
    accuracy: float
    f1: float
    macro_f1: float
    precision: np.ndarray
    recall: np.ndarray
    per_class_f1: np.ndarray

    @property
    def support(self):
        return self.confusion.sum(axis=1)

    def as_dict(self) -> dict:
        return {
            "labels": [str(getattr(lab, "value", lab)) for lab in self.labels],
            "accuracy": self.accuracy,
            "f1": self.f1,
            "macro_f1": self.macro_f1,
            "precision": self.precision.tolist(),
            "recall": self.recall.tolist(),
            "per_class_f1": self.per_class_f1.tolist(),
            "support": self.support.tolist(),
            "confusion": self.confusion.tolist(),
        }


def metrics_from_confusion(cm, labels) -> Metrics:
    """Accuracy plus F1 (last label as the positive class for two labels, macro otherwise)."""
    cm = np.asarray(cm)
    total = cm.sum()
    accuracy = float(np.trace(cm) / total) if total else 0.0
    precision, recall, f1 = _f1_per_class(cm)
    macro = float(f1.mean()) if len(f1) else 0.0
    headline = float(f1[-1]) if len(labels) == 2 else macro
    return Metrics(list(labels), cm, accuracy, headline, macro, precision, recall, f1)


def compute_metrics(y_true, y_pred, labels) -> Metrics:
    return metrics_from_confusion(confusion_matrix(y_true, y_pred, labels), labels)
