from __future__ import annotations

import zlib

import numpy as np

from .layers import LAYER_TYPES, Layer
from .losses import HEADS, LOSS_KINDS, activate, loss_from_logits


class NumericalError(RuntimeError):
    """Raised when a loss or activation turns non-finite."""


def sub_rng(seed: int, name: str) -> np.random.Generator:
    """Independent generator for a named purpose (``init``, ``shuffle``, ...)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(name.encode())]))


class Network:
    """Ordered layer stack feeding a sigmoid or softmax head.

    The last layer produces logits; ``forward`` returns activated scores.
    """

    def __init__(self, layers: list[Layer], seq_len: int, head="sigmoid", loss="cross-entropy", seed=0, debug=False):
        if head not in HEADS:
            raise ValueError(f"head must be one of {HEADS}")
        if loss not in LOSS_KINDS:
            raise ValueError(f"loss must be one of {LOSS_KINDS}")
        self.layers = layers
        self.seq_len = seq_len
        self.head = head
        self.loss_kind = loss
        self.seed = seed
        self.debug = debug

    def initialize(self):
        rng = sub_rng(self.seed, "init")
        for layer in self.layers:
            layer.init_params(rng)
        return self

    @property
    def num_classes(self) -> int:
        return self.layers[-1].units

    @property
    def dtype(self):
        for layer in self.layers:
            for p in layer.params.values():
                return p.dtype
        return np.dtype(np.float32)

    def astype(self, dtype):
        for layer in self.layers:
            layer.astype(dtype)
        return self

    def trainable_params(self):
        """List of ``(layer, name)`` pairs the optimizer updates."""
        return [(layer, name) for layer in self.layers if layer.trainable for name in layer.params]

    def zero_grads(self):
        for layer in self.layers:
            layer.zero_grads()

    def _check(self, X):
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.seq_len:
            raise ValueError(f"expected sequences of shape (n, {self.seq_len}), got {X.shape}")
        return X

    def logits(self, X, training=False, rng=None):
        X = self._check(X)
        mask = X != 0
        out = X
        for layer in self.layers:
            out = layer.forward(out, training=training, rng=rng, mask=mask if layer.supports_mask else None)
            if self.debug and not np.all(np.isfinite(out)):
                raise NumericalError(f"non-finite activations after {layer.kind}")
        return out

    def forward(self, X, training=False, rng=None):
        return activate(self.logits(X, training, rng), self.head)

    predict_proba = forward

    def backward(self, dz):
        grad = dz
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
            if grad is None:
                break

    def loss_and_grads(self, X, Y, training=False, rng=None, sample_weight=None):
        """Forward + backward on one batch; gradients are left in each layer's ``grads``."""
        self.zero_grads()
        z = self.logits(X, training=training, rng=rng)
        value, dz = loss_from_logits(z, Y.astype(z.dtype), self.head, self.loss_kind, sample_weight)
        if not np.isfinite(value):
            raise NumericalError(f"non-finite loss {value}")
        self.backward(dz)
        return value, activate(z, self.head)

    def config(self) -> dict:
        return {
            "seq_len": self.seq_len,
            "head": self.head,
            "loss": self.loss_kind,
            "seed": self.seed,
            "layers": [{"kind": layer.kind, **layer.config()} for layer in self.layers],
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "Network":
        layers = []
        for spec in cfg["layers"]:
            spec = dict(spec)
            kind = spec.pop("kind")
            try:
                layer_cls = LAYER_TYPES[kind]
            except KeyError:
                raise ValueError(f"unknown layer kind {kind!r}") from None
            layers.append(layer_cls(**spec))
        return cls(layers, cfg["seq_len"], cfg["head"], cfg["loss"], cfg.get("seed", 0))
