from __future__ import annotations

import numpy as np

from .network import Network, NumericalError


class Adam:
    """Adaptive-moment optimizer with optional global max-norm clipping."""

    def __init__(self, network: Network, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8, max_norm=None):
        self.network = network
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.max_norm = max_norm
        self.step_count = 0
        self.m = {}
        self.v = {}
        for layer, name in network.trainable_params():
            p = layer.params[name]
            self.m[id(layer), name] = np.zeros_like(p)
            self.v[id(layer), name] = np.zeros_like(p)

    def step(self):
        pairs = self.network.trainable_params()
        scale = 1.0
        if self.max_norm is not None:
            norm = np.sqrt(sum(float((layer.grads[n].astype(np.float64) ** 2).sum()) for layer, n in pairs))
            if norm > self.max_norm:
                scale = self.max_norm / norm
        self.step_count += 1
        t = self.step_count
        lr_t = self.lr * np.sqrt(1 - self.beta2**t) / (1 - self.beta1**t)
        for layer, name in pairs:
            p, g = layer.params[name], layer.grads[name]
            if scale != 1.0:
                g = g * p.dtype.type(scale)
            m, v = self.m[id(layer), name], self.v[id(layer), name]
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * (g * g)
            p -= (lr_t * m / (np.sqrt(v) + self.eps)).astype(p.dtype)


def train_epoch(network: Network, X, Y, batch_size, optimizer: Adam, shuffle_rng, dropout_rng, sample_weight=None):
    """One pass over ``(X, Y)`` in shuffled mini-batches; returns mean loss and accuracy."""
    n = len(X)
    order = shuffle_rng.permutation(n)
    total_loss = 0.0
    correct = 0
    for start in range(0, n, batch_size):
        idx = order[start : start + batch_size]
        sw = None if sample_weight is None else sample_weight[idx]
        try:
            value, scores = network.loss_and_grads(X[idx], Y[idx], training=True, rng=dropout_rng, sample_weight=sw)
        except NumericalError as exc:
            raise NumericalError(
                f"{exc} at optimizer step {optimizer.step_count + 1} (batch starting at {start}, lr={optimizer.lr})"
            ) from None
        optimizer.step()
        total_loss += value * len(idx)
        correct += int((scores.argmax(axis=1) == Y[idx].argmax(axis=1)).sum())
    return {"loss": total_loss / max(n, 1), "accuracy": correct / max(n, 1)}
