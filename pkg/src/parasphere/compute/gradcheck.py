"""Central-difference validation of the reverse-mode gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import ParameterStore, forward_backward


@dataclass
class GradCheckReport:
    epsilon: float
    per_param: dict[str, float]

    @property
    def max_rel_error(self) -> float:
        return max(self.per_param.values()) if self.per_param else 0.0

    def lines(self) -> list[str]:
        rows = [f"{name}\t{err:.3e}" for name, err in sorted(self.per_param.items())]
        rows.append(f"max\t{self.max_rel_error:.3e}")
        return rows


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)


def gradient_check(store: ParameterStore, loss_fn, epsilon: float = 1e-5,
                   coords_per_param: int = 200,
                   rng: np.random.Generator | None = None) -> GradCheckReport:
    """Compare analytic gradients to central differences on sampled coordinates.

    `loss_fn` must be deterministic (disable dropout); every trainable
    parameter is probed on up to `coords_per_param` coordinates.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    _, grads = forward_backward(store, loss_fn)
    per_param: dict[str, float] = {}
    for name in store.trainable_names():
        data = store[name].data
        flat = data.reshape(-1)
        n = flat.size
        idx = np.arange(n) if n <= coords_per_param else rng.choice(n, size=coords_per_param, replace=False)
        worst = 0.0
        gflat = grads[name].reshape(-1)
        for i in idx:
            orig = flat[i]
            flat[i] = orig + epsilon
            lo_plus = loss_fn().data.item()
            flat[i] = orig - epsilon
            lo_minus = loss_fn().data.item()
            flat[i] = orig
            numeric = (lo_plus - lo_minus) / (2.0 * epsilon)
            worst = max(worst, relative_error(float(gflat[i]), numeric))
        per_param[name] = worst
    return GradCheckReport(epsilon=epsilon, per_param=per_param)
