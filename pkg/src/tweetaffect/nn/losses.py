"""Output heads and losses.

``quadratic`` is the classic mean squared cost ``(1/2n) * sum ||y - a||^2``
over ``n`` samples. ``cross-entropy`` means binary cross-entropy averaged
over units for a sigmoid head and categorical cross-entropy for a softmax
head; both are computed from logits for stability.
"""

from __future__ import annotations

import numpy as np

from .layers import sigmoid

LOSS_KINDS = ("cross-entropy", "quadratic")
HEADS = ("sigmoid", "softmax")


def softmax(z):
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def activate(z, head):
    if head == "sigmoid":
        return sigmoid(z)
    if head == "softmax":
        return softmax(z)
    raise ValueError(f"unknown head {head!r}")


def _weights(n, sample_weight, dtype):
    if sample_weight is None:
        return np.ones(n, dtype=dtype)
    return np.asarray(sample_weight, dtype=dtype)


def loss_from_logits(z, y, head, kind="cross-entropy", sample_weight=None):
    """Return ``(loss, dloss/dz)`` for a batch of logits ``z`` and one-hot ``y``."""
    n, k = z.shape
    w = _weights(n, sample_weight, z.dtype)
    if kind == "cross-entropy":
        if head == "sigmoid":
            per = (np.maximum(z, 0) - y * z + np.log1p(np.exp(-np.abs(z)))).mean(axis=1)
            dz = (sigmoid(z) - y) / z.dtype.type(k)
        else:
            zs = z - z.max(axis=1, keepdims=True)
            logp = zs - np.log(np.exp(zs).sum(axis=1, keepdims=True))
            per = -(y * logp).sum(axis=1)
            dz = np.exp(logp) - y
    elif kind == "quadratic":
        a = activate(z, head)
        per = 0.5 * ((y - a) ** 2).sum(axis=1)
        da = a - y
        if head == "sigmoid":
            dz = da * a * (1 - a)
        else:
            dz = a * (da - (da * a).sum(axis=1, keepdims=True))
    else:
        raise ValueError(f"unknown loss kind {kind!r}")
    loss = float((w * per).sum() / n)
    dz = dz * (w / z.dtype.type(n))[:, None]
    return loss, dz.astype(z.dtype)


def loss(scores, targets, kind="cross-entropy", head="sigmoid", eps=1e-7):
    """Loss on activated scores (probabilities), mainly for reporting."""
    a = np.asarray(scores, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if a.shape != y.shape:
        raise ValueError(f"scores {a.shape} and targets {y.shape} differ in shape")
    n = a.shape[0]
    if kind == "quadratic":
        return float(((y - a) ** 2).sum() / (2 * n))
    if kind != "cross-entropy":
        raise ValueError(f"unknown loss kind {kind!r}")
    a = np.clip(a, eps, 1 - eps)
    if head == "sigmoid":
        return float(-(y * np.log(a) + (1 - y) * np.log(1 - a)).mean())
    return float(-(y * np.log(a)).sum() / n)
