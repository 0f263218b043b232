"""Named parameter collection with per-parameter freezing."""

from __future__ import annotations

import hashlib

import numpy as np

from .tensor import ComputeError, Tensor, first_non_finite


def derive_rng(seed: int, *tags: str) -> np.random.Generator:
    """Independent generator derived from a base seed and a name path.

    Hashing the tag path decouples the stream from call order, so adding a
    module never perturbs the init of its neighbours.
    """
    h = hashlib.sha256(("/".join(tags) + f"#{seed}").encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(h[:8], "little"))


class ParameterStore:
    """Ordered dict of named Tensors; frozen entries never receive gradient."""

    def __init__(self):
        self._params: dict[str, Tensor] = {}
        self._trainable: dict[str, bool] = {}

    def add(self, name: str, array, trainable: bool = True) -> Tensor:
        if name in self._params:
            raise ComputeError(f"duplicate parameter {name!r}")
        t = Tensor(np.asarray(array, dtype=np.float64), requires_grad=trainable, name=name)
        self._params[name] = t
        self._trainable[name] = trainable
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def names(self) -> list[str]:
        return list(self._params)

    def trainable_names(self) -> list[str]:
        return [n for n, t in self._trainable.items() if t]

    def is_trainable(self, name: str) -> bool:
        return self._trainable[name]

    def arrays(self) -> dict[str, np.ndarray]:
        return {n: p.data for n, p in self._params.items()}

    def n_parameters(self, trainable_only: bool = False) -> int:
        names = self.trainable_names() if trainable_only else self.names()
        return int(sum(self._params[n].data.size for n in names))

    def zero_grad(self) -> None:
        for p in self._params.values():
            p.grad = None


def forward_backward(store: ParameterStore, loss_fn) -> tuple[float, dict[str, np.ndarray]]:
    """Run one forward pass, backprop, and collect trainable gradients.

    `loss_fn` takes no arguments (close over the store) and returns a scalar
    Tensor.  A non-finite loss is reported with the earliest offending tensor
    in the graph, which localizes overflow far better than the loss value.
    """
    store.zero_grad()
    loss = loss_fn()
    if not isinstance(loss, Tensor) or loss.data.shape != ():
        raise ComputeError("loss_fn must return a scalar Tensor")
    if not np.isfinite(loss.data):
        culprit = first_non_finite(loss)
        where = culprit.name if culprit is not None else "loss"
        raise ComputeError(f"non-finite loss; first bad tensor: {where}")
    loss.backward()
    grads = {}
    for name in store.trainable_names():
        p = store[name]
        grads[name] = p.grad if p.grad is not None else np.zeros_like(p.data)
    return float(loss.data), grads
