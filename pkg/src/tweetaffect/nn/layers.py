"""Layers with explicit forward/backward passes.

Every layer keeps its trainable arrays in ``params`` and the matching
gradients in ``grads`` (same keys, same shapes). ``forward`` caches what
``backward`` needs; ``backward`` takes dLoss/dOutput and returns
dLoss/dInput (``None`` for the embedding lookup).
"""

from __future__ import annotations

import numpy as np


def sigmoid(x):
    # split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def glorot_uniform(rng, fan_in, fan_out, dtype=np.float32):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(dtype)


class Layer:
    kind = "layer"
    supports_mask = False

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.trainable = True

    def init_params(self, rng):
        pass

    def zero_grads(self):
        self.grads = {k: np.zeros_like(v) for k, v in self.params.items()}

    def astype(self, dtype):
        self.params = {k: v.astype(dtype) for k, v in self.params.items()}
        self.zero_grads()

    def config(self) -> dict:
        return {}

    def param_shapes(self) -> dict:
        return {}

    def output_dim(self, input_dim):
        return input_dim

    def forward(self, x, training=False, rng=None, mask=None):
        raise NotImplementedError

    def backward(self, grad):
        raise NotImplementedError


class Embedding(Layer):
    kind = "embedding"

    def __init__(self, vocab_size, dim, trainable=True, weights=None):
        super().__init__()
        self.vocab_size = vocab_size
        self.dim = dim
        self.trainable = trainable
        if weights is not None:
            weights = np.asarray(weights)
            if weights.shape != (vocab_size, dim):
                raise ValueError(f"embedding weights {weights.shape} != ({vocab_size}, {dim})")
            self.params["W"] = weights.astype(np.float32)

    def init_params(self, rng):
        if "W" not in self.params:
            W = rng.uniform(-0.05, 0.05, size=(self.vocab_size, self.dim)).astype(np.float32)
            W[0] = 0.0
            self.params["W"] = W
        self.zero_grads()

    def config(self):
        return {"vocab_size": self.vocab_size, "dim": self.dim, "trainable": self.trainable}

    def param_shapes(self):
        return {"W": (self.vocab_size, self.dim)}

    def output_dim(self, input_dim):
        return self.dim

    def forward(self, x, training=False, rng=None, mask=None):
        self._idx = x
        return self.params["W"][x]

    def backward(self, grad):
        if self.trainable:
            np.add.at(self.grads["W"], self._idx.reshape(-1), grad.reshape(-1, self.dim))
        return None


class LSTM(Layer):
    """Gated recurrent layer returning the final hidden state.

    Gate order in the packed weights is input, forget, candidate, output.
    Timesteps where ``mask`` is false carry (h, c) through unchanged, so
    post-padding does not dilute the final state. Dropout masks are drawn
    once per sequence for both the inputs and the recurrent state.
    """

    kind = "lstm"
    supports_mask = True

    def __init__(self, input_dim, units, dropout=0.0, recurrent_dropout=0.0):
        super().__init__()
        if not (0.0 <= dropout < 1.0 and 0.0 <= recurrent_dropout < 1.0):
            raise ValueError("dropout rates must lie in [0, 1)")
        self.input_dim = input_dim
        self.units = units
        self.dropout = dropout
        self.recurrent_dropout = recurrent_dropout

    def init_params(self, rng):
        D, H = self.input_dim, self.units
        scale = 1.0 / np.sqrt(H)
        b = np.zeros(4 * H, dtype=np.float32)
        b[H : 2 * H] = 1.0
        self.params = {
            "W": glorot_uniform(rng, D, 4 * H),
            "U": rng.uniform(-scale, scale, size=(H, 4 * H)).astype(np.float32),
            "b": b,
        }
        self.zero_grads()

    def config(self):
        return {
            "input_dim": self.input_dim,
            "units": self.units,
            "dropout": self.dropout,
            "recurrent_dropout": self.recurrent_dropout,
        }

    def param_shapes(self):
        D, H = self.input_dim, self.units
        return {"W": (D, 4 * H), "U": (H, 4 * H), "b": (4 * H,)}

    def output_dim(self, input_dim):
        return self.units

    def forward(self, x, training=False, rng=None, mask=None):
        N, T, D = x.shape
        if D != self.input_dim:
            raise ValueError(f"LSTM expects input dim {self.input_dim}, got {D}")
        H = self.units
        W, U, b = self.params["W"], self.params["U"], self.params["b"]
        dtype = W.dtype
        if mask is None:
            mask = np.ones((N, T), dtype=bool)
        active = np.flatnonzero(mask.any(axis=0))
        T_eff = int(active[-1]) + 1 if active.size else 0

        mx = np.ones((N, D), dtype=dtype)
        mh = np.ones((N, H), dtype=dtype)
        if training and rng is not None:
            if self.dropout > 0:
                keep = 1.0 - self.dropout
                mx = (rng.random((N, D)) < keep).astype(dtype) / dtype.type(keep)
            if self.recurrent_dropout > 0:
                keep = 1.0 - self.recurrent_dropout
                mh = (rng.random((N, H)) < keep).astype(dtype) / dtype.type(keep)

        xd = x[:, :T_eff] * mx[:, None, :]
        zx = (xd.reshape(-1, D) @ W).reshape(N, T_eff, 4 * H) + b
        h = np.zeros((N, H), dtype=dtype)
        c = np.zeros((N, H), dtype=dtype)
        steps = []
        for t in range(T_eff):
            hd = h * mh
            z = zx[:, t] + hd @ U
            i = sigmoid(z[:, :H])
            f = sigmoid(z[:, H : 2 * H])
            g = np.tanh(z[:, 2 * H : 3 * H])
            o = sigmoid(z[:, 3 * H :])
            c_new = f * c + i * g
            tc = np.tanh(c_new)
            h_new = o * tc
            m = mask[:, t, None]
            steps.append((i, f, g, o, c, tc, hd, m))
            c = np.where(m, c_new, c)
            h = np.where(m, h_new, h)
        self._cache = (x.shape, xd, mx, mh, steps)
        return h

    def backward(self, dh):
        (N, T, D), xd, mx, mh, steps = self._cache
        H = self.units
        W, U = self.params["W"], self.params["U"]
        T_eff = len(steps)
        dzx = np.zeros((N, T_eff, 4 * H), dtype=W.dtype)
        dU = np.zeros_like(U)
        dc = np.zeros_like(dh)
        for t in range(T_eff - 1, -1, -1):
            i, f, g, o, c_prev, tc, hd, m = steps[t]
            dh_new = np.where(m, dh, 0)
            dc_new = np.where(m, dc, 0)
            do = dh_new * tc
            dct = dc_new + dh_new * o * (1 - tc * tc)
            dz = np.concatenate(
                [
                    dct * g * i * (1 - i),
                    dct * c_prev * f * (1 - f),
                    dct * i * (1 - g * g),
                    do * o * (1 - o),
                ],
                axis=1,
            )
            dzx[:, t] = dz
            dU += hd.T @ dz
            dh = np.where(m, 0, dh) + (dz @ U.T) * mh
            dc = np.where(m, 0, dc) + dct * f
        flat = dzx.reshape(-1, 4 * H)
        self.grads["W"] += xd.reshape(-1, D).T @ flat
        self.grads["U"] += dU
        self.grads["b"] += flat.sum(axis=0)
        dx = np.zeros((N, T, D), dtype=W.dtype)
        dx[:, :T_eff] = (flat @ W.T).reshape(N, T_eff, D) * mx[:, None, :]
        return dx


def lstm_cell_step(x_t, h_prev, c_prev, W, U, b):
    """One gated update; returns ``(h_t, c_t)``. Same packing as :class:`LSTM`."""
    H = h_prev.shape[-1]
    if W.shape != (x_t.shape[-1], 4 * H) or U.shape != (H, 4 * H) or b.shape != (4 * H,):
        raise ValueError("LSTM parameter shapes do not match the input/state sizes")
    z = x_t @ W + h_prev @ U + b
    i = sigmoid(z[..., :H])
    f = sigmoid(z[..., H : 2 * H])
    g = np.tanh(z[..., 2 * H : 3 * H])
    o = sigmoid(z[..., 3 * H :])
    c_t = f * c_prev + i * g
    return o * np.tanh(c_t), c_t


class Dense(Layer):
    kind = "dense"

    def __init__(self, input_dim, units, activation="linear"):
        super().__init__()
        if activation not in ("linear", "relu"):
            raise ValueError(f"unsupported activation {activation!r}")
        self.input_dim = input_dim
        self.units = units
        self.activation = activation

    def init_params(self, rng):
        self.params = {
            "W": glorot_uniform(rng, self.input_dim, self.units),
            "b": np.zeros(self.units, dtype=np.float32),
        }
        self.zero_grads()

    def config(self):
        return {"input_dim": self.input_dim, "units": self.units, "activation": self.activation}

    def param_shapes(self):
        return {"W": (self.input_dim, self.units), "b": (self.units,)}

    def output_dim(self, input_dim):
        return self.units

    def forward(self, x, training=False, rng=None, mask=None):
        if x.shape[-1] != self.input_dim:
            raise ValueError(f"Dense expects input dim {self.input_dim}, got {x.shape[-1]}")
        self._x = x
        z = x @ self.params["W"] + self.params["b"]
        if self.activation == "relu":
            self._active = z > 0
            return np.where(self._active, z, 0).astype(z.dtype)
        return z

    def backward(self, grad):
        if self.activation == "relu":
            grad = np.where(self._active, grad, 0).astype(grad.dtype)
        self.grads["W"] += self._x.T @ grad
        self.grads["b"] += grad.sum(axis=0)
        return grad @ self.params["W"].T


class GlobalMaxPool1D(Layer):
    """Max over the time axis; the gradient goes to the first argmax only.

    Padded steps are left out of the max. A sequence with no active step
    pools to zeros and passes no gradient back.
    """

    kind = "global_max_pool"
    supports_mask = True

    def forward(self, x, training=False, rng=None, mask=None):
        self._shape = x.shape
        if mask is None:
            self._empty = None
            self._arg = x.argmax(axis=1)
            return np.take_along_axis(x, self._arg[:, None, :], axis=1)[:, 0, :]
        masked = np.where(mask[:, :, None], x, -np.inf)
        self._arg = masked.argmax(axis=1)
        self._empty = ~mask.any(axis=1)
        out = np.take_along_axis(x, self._arg[:, None, :], axis=1)[:, 0, :]
        out[self._empty] = 0
        return out

    def backward(self, grad):
        if self._empty is not None and self._empty.any():
            grad = np.where(self._empty[:, None], 0, grad).astype(grad.dtype)
        dx = np.zeros(self._shape, dtype=grad.dtype)
        np.put_along_axis(dx, self._arg[:, None, :], grad[:, None, :], axis=1)
        return dx


class Dropout(Layer):
    """Inverted dropout: identity at inference, scaled Bernoulli mask in training."""

    kind = "dropout"

    def __init__(self, rate):
        super().__init__()
        if not 0.0 <= rate < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")
        self.rate = rate

    def config(self):
        return {"rate": self.rate}

    def forward(self, x, training=False, rng=None, mask=None):
        if not training or self.rate == 0 or rng is None:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (rng.random(x.shape) < keep).astype(x.dtype) / x.dtype.type(keep)
        return x * self._mask

    def backward(self, grad):
        return grad if self._mask is None else grad * self._mask


LAYER_TYPES = {cls.kind: cls for cls in (Embedding, LSTM, Dense, GlobalMaxPool1D, Dropout)}
