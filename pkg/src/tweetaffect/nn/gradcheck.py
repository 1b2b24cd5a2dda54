from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .network import Network

# below this magnitude errors are measured absolutely
REL_ERR_FLOOR = 1e-6


@dataclass
class GradCheckReport:
    max_rel_error: float
    checked: int
    tolerance: float
    worst: tuple = ()
    errors: list = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def relative_error(a, b):
    return abs(a - b) / max(abs(a), abs(b), REL_ERR_FLOOR)


def gradient_check(
    network: Network,
    X,
    Y,
    epsilon=1e-5,
    tolerance=1e-4,
    n_samples=200,
    seed=0,
    include_frozen=False,
) -> GradCheckReport:
    """Compare backprop gradients with central differences in float64.

    Works on a float64 deep copy in inference mode (no dropout). Samples
    ``n_samples`` parameter entries uniformly over all trainable tensors, or
    checks every entry if there are fewer.
    """
    net = copy.deepcopy(network).astype(np.float64)
    if include_frozen:
        for layer in net.layers:
            layer.trainable = True
    X = np.asarray(X)
    Y = np.asarray(Y, dtype=np.float64)
    net.loss_and_grads(X, Y)
    pairs = net.trainable_params()
    analytic = {(id(layer), name): layer.grads[name].copy() for layer, name in pairs}

    sizes = np.array([layer.params[name].size for layer, name in pairs])
    total = int(sizes.sum())
    rng = np.random.default_rng(seed)
    if total <= n_samples:
        flat_ids = np.arange(total)
    else:
        flat_ids = np.sort(rng.choice(total, size=n_samples, replace=False))
    offsets = np.concatenate([[0], np.cumsum(sizes)])

    def loss_value():
        value, _ = net.loss_and_grads(X, Y)
        return value

    errors = []
    for fid in flat_ids:
        k = int(np.searchsorted(offsets, fid, side="right") - 1)
        layer, name = pairs[k]
        p = layer.params[name].reshape(-1)
        j = int(fid - offsets[k])
        orig = p[j]
        p[j] = orig + epsilon
        up = loss_value()
        p[j] = orig - epsilon
        down = loss_value()
        p[j] = orig
        numeric = (up - down) / (2 * epsilon)
        a = float(analytic[id(layer), name].reshape(-1)[j])
        errors.append(((layer.kind, name, j), a, numeric, relative_error(a, numeric)))

    if not errors:
        return GradCheckReport(0.0, 0, tolerance)
    worst = max(errors, key=lambda e: e[3])
    return GradCheckReport(worst[3], len(errors), tolerance, worst, errors)
