"""Adam with bias correction and an inverse-square-root warmup schedule."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import ParameterStore
from .tensor import ComputeError


@dataclass
class AdamState:
    lr: float = 2e-4
    beta1: float = 0.9
    beta2: float = 0.998
    eps: float = 1e-9
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_init(store: ParameterStore, lr: float = 2e-4, beta1: float = 0.9,
              beta2: float = 0.998, eps: float = 1e-9) -> AdamState:
    state = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps)
    for name in store.trainable_names():
        data = store[name].data
        state.m[name] = np.zeros_like(data)
        state.v[name] = np.zeros_like(data)
    return state


def adam_step(store: ParameterStore, grads: dict[str, np.ndarray],
              state: AdamState, lr: float | None = None) -> None:
    """One in-place update; frozen parameters are never touched."""
    state.step += 1
    eta = state.lr if lr is None else lr
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1 ** state.step
    bc2 = 1.0 - b2 ** state.step
    for name, g in grads.items():
        if name not in state.m:
            raise ComputeError(f"no optimizer state for {name!r}")
        if g.shape != store[name].data.shape:
            raise ComputeError(f"gradient shape mismatch for {name!r}")
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / bc1
        v_hat = v / bc2
        store[name].data -= eta * m_hat / (np.sqrt(v_hat) + state.eps)


def warmup_inverse_sqrt(step: int, base_lr: float, warmup_steps: int) -> float:
    """Linear ramp to base_lr over `warmup_steps`, then 1/sqrt decay."""
    step = max(step, 1)
    if step <= warmup_steps:
        return base_lr * step / warmup_steps
    return base_lr * (warmup_steps / step) ** 0.5
