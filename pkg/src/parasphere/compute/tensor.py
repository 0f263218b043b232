"""Reverse-mode autodiff over float64 numpy arrays.

A Tensor records its parents and a backward closure when it results from a
differentiable op; backward() walks the graph in reverse topological order.
Only the ops the seq2seq model needs are provided, each with a hand-written
vector-Jacobian product (checked against central differences in the tests).
"""

from __future__ import annotations

import itertools

import numpy as np

from .. import vmf as _vmf

_counter = itertools.count()


class ComputeError(RuntimeError):
    pass


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "parents", "backward_fn", "name", "ctr")

    def __init__(self, data, requires_grad=False, parents=(), backward_fn=None, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self.parents = parents
        self.backward_fn = backward_fn
        self.name = name
        self.ctr = next(_counter)

    @property
    def shape(self):
        return self.data.shape

    def __repr__(self):
        tag = self.name or "tensor"
        return f"Tensor({tag}, shape={self.data.shape})"

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def backward(self):
        if self.data.shape != ():
            raise ComputeError("backward() requires a scalar loss")
        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node.parents:
                if p.requires_grad and id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones(())
        for node in reversed(order):
            if node.backward_fn is not None and node.grad is not None:
                node.backward_fn(node.grad)


def first_non_finite(loss: Tensor) -> Tensor | None:
    """Earliest-created tensor reachable from `loss` holding a non-finite value."""
    found = []
    seen = set()
    stack = [loss]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if not np.all(np.isfinite(node.data)):
            found.append(node)
        stack.extend(node.parents)
    if not found:
        return None
    return min(found, key=lambda t: t.ctr)


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _unbroadcast(g, shape):
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def add(a, b, name=None):
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.data + b.data, parents=(a, b), name=name or "add")

    def bwd(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.data.shape))

    out.backward_fn = bwd
    return out


def sub(a, b):
    return add(a, mul(b, -1.0), name="sub")


def mul(a, b, name=None):
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(a.data * b.data, parents=(a, b), name=name or "mul")

    def bwd(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.data.shape))

    out.backward_fn = bwd
    return out


def matmul(a, b, name=None):
    a, b = _as_tensor(a), _as_tensor(b)
    out = Tensor(np.matmul(a.data, b.data), parents=(a, b), name=name or "matmul")

    def bwd(g):
        if a.requires_grad:
            ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
            a._accumulate(_unbroadcast(ga, a.data.shape))
        if b.requires_grad:
            gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
            b._accumulate(_unbroadcast(gb, b.data.shape))

    out.backward_fn = bwd
    return out


def relu(x, name=None):
    x = _as_tensor(x)
    out = Tensor(np.maximum(x.data, 0.0), parents=(x,), name=name or "relu")

    def bwd(g):
        if x.requires_grad:
            x._accumulate(g * (x.data > 0))

    out.backward_fn = bwd
    return out


def reshape(x, shape, name=None):
    x = _as_tensor(x)
    out = Tensor(x.data.reshape(shape), parents=(x,), name=name or "reshape")

    def bwd(g):
        if x.requires_grad:
            x._accumulate(g.reshape(x.data.shape))

    out.backward_fn = bwd
    return out


def transpose(x, axes, name=None):
    x = _as_tensor(x)
    out = Tensor(x.data.transpose(axes), parents=(x,), name=name or "transpose")
    inv = np.argsort(axes)

    def bwd(g):
        if x.requires_grad:
            x._accumulate(g.transpose(inv))

    out.backward_fn = bwd
    return out


def softmax(x, name=None):
    """Softmax over the last axis."""
    x = _as_tensor(x)
    shifted = x.data - x.data.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=-1, keepdims=True)
    out = Tensor(y, parents=(x,), name=name or "softmax")

    def bwd(g):
        if x.requires_grad:
            dot = (g * y).sum(axis=-1, keepdims=True)
            x._accumulate(y * (g - dot))

    out.backward_fn = bwd
    return out


def layer_norm(x, gain, bias, eps=1e-6, name=None):
    """Normalization over the last axis with learned gain/bias."""
    x, gain, bias = _as_tensor(x), _as_tensor(gain), _as_tensor(bias)
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = Tensor(gain.data * xhat + bias.data, parents=(x, gain, bias), name=name or "layer_norm")

    def bwd(g):
        if gain.requires_grad:
            gain._accumulate(_unbroadcast(g * xhat, gain.data.shape))
        if bias.requires_grad:
            bias._accumulate(_unbroadcast(g, bias.data.shape))
        if x.requires_grad:
            dxhat = g * gain.data
            m1 = dxhat.mean(axis=-1, keepdims=True)
            m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
            x._accumulate(inv * (dxhat - m1 - xhat * m2))

    out.backward_fn = bwd
    return out


def dropout(x, p, rng, name=None):
    """Inverted dropout; identity when p == 0."""
    x = _as_tensor(x)
    if p <= 0.0:
        return x
    mask = (rng.random(x.data.shape) >= p) / (1.0 - p)
    out = Tensor(x.data * mask, parents=(x,), name=name or "dropout")

    def bwd(g):
        if x.requires_grad:
            x._accumulate(g * mask)

    out.backward_fn = bwd
    return out


def embedding(table, ids, name=None):
    """Row gather from a [V, d] table; scatter-add on the way back."""
    table = _as_tensor(table)
    ids = np.asarray(ids)
    out = Tensor(table.data[ids], parents=(table,), name=name or "embedding")

    def bwd(g):
        if table.requires_grad:
            if table.grad is None:
                table.grad = np.zeros_like(table.data)
            np.add.at(table.grad, ids, g)

    out.backward_fn = bwd
    return out


def sum_all(x, name=None):
    x = _as_tensor(x)
    out = Tensor(x.data.sum(), parents=(x,), name=name or "sum")

    def bwd(g):
        if x.requires_grad:
            x._accumulate(np.broadcast_to(g, x.data.shape).copy())

    out.backward_fn = bwd
    return out


def mean_all(x):
    n = np.prod(x.data.shape) if x.data.shape else 1.0
    return mul(sum_all(x), 1.0 / float(n), name="mean")


def cross_entropy(logits, targets, weights, name=None):
    """Weighted token cross-entropy.

    logits [n, V], targets int [n], weights float [n] (>= 0, typically a
    0/1 padding mask).  Returns the weight-normalized mean NLL.
    """
    logits = _as_tensor(logits)
    targets = np.asarray(targets)
    weights = np.asarray(weights, dtype=np.float64)
    total = weights.sum()
    if total <= 0:
        raise ComputeError("cross_entropy needs at least one active position")
    shifted = logits.data - logits.data.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1)) + logits.data.max(axis=-1)
    rows = np.arange(len(targets))
    nll = lse - logits.data[rows, targets]
    out = Tensor((nll * weights).sum() / total, parents=(logits,), name=name or "cross_entropy")

    def bwd(g):
        if logits.requires_grad:
            soft = np.exp(shifted)
            soft /= soft.sum(axis=-1, keepdims=True)
            soft[rows, targets] -= 1.0
            logits._accumulate(soft * (weights * (g / total))[:, None])

    out.backward_fn = bwd
    return out


def vmf_loss(e_hat, target_vectors, weights, cfg: _vmf.VmfConfig, name=None):
    """Weighted mean spherical NLL with its analytic gradient.

    e_hat [n, d] predictions, target_vectors const [n, d] unit rows,
    weights float [n].
    """
    e_hat = _as_tensor(e_hat)
    targets = np.asarray(target_vectors, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    total = weights.sum()
    if total <= 0:
        raise ComputeError("vmf_loss needs at least one active position")
    if not np.isfinite(e_hat.data).all():
        # divergence shows up here first: report it as a compute failure so
        # training loops can abort and keep their last good checkpoint
        raise ComputeError("non-finite prediction reaching the vMF head")
    losses, grads, _ = _vmf.nll_vmf_batch(e_hat.data, targets, cfg)
    out = Tensor((losses * weights).sum() / total, parents=(e_hat,), name=name or "vmf_loss")

    def bwd(g):
        if e_hat.requires_grad:
            e_hat._accumulate(grads * (weights * (g / total))[:, None])

    out.backward_fn = bwd
    return out
