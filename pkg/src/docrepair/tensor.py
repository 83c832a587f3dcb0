"""Minimal reverse-mode autodiff on float64 numpy arrays.

Every operation records its inputs and a backward closure; calling
``backward()`` on a scalar result walks the record in reverse topological
order and accumulates exact gradients into every reachable tensor that
has ``requires_grad`` set. Records are rebuilt on every forward pass and
recorded tensors are never mutated in place, so repeated forwards are
independent.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class NonFiniteError(ValueError):
    """Raised when a NaN or Inf shows up where finite values are required."""


def _check_finite(values: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(values)):
        raise NonFiniteError(f"non-finite values in {what}")


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to the original operand shape."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    """A float64 array with an optional gradient accumulator.

    ``grad`` accumulates across ``backward()`` calls until reset; parameter
    updates happen between recorded forward passes (single writer).
    """

    __slots__ = ("values", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, values, requires_grad: bool = False):
        v = np.asarray(values, dtype=np.float64)
        _check_finite(v, "tensor constructor")
        self.values = v
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None

    @classmethod
    def _from_op(
        cls,
        values: np.ndarray,
        parents: Sequence["Tensor"],
        backward: Callable[[np.ndarray], None],
    ) -> "Tensor":
        out = cls.__new__(cls)
        out.values = values
        out.grad = None
        grad_parents = tuple(p for p in parents if p.requires_grad)
        out.requires_grad = bool(grad_parents)
        out._parents = grad_parents
        out._backward = backward if grad_parents else None
        return out

    # -- bookkeeping ----------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def size(self) -> int:
        return self.values.size

    def item(self) -> float:
        return float(self.values.reshape(()))

    def accumulate_grad(self, g: np.ndarray) -> None:
        g = _unbroadcast(g, self.values.shape)
        if self.grad is None:
            self.grad = g.copy()
        else:
            self.grad += g

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.values.copy())

    def __repr__(self) -> str:
        return f"Tensor(shape={self.values.shape}, requires_grad={self.requires_grad})"

    # -- reverse pass ----------------------------------------------------

    def backward(self) -> None:
        """Populate gradients of every reachable requires_grad tensor.

        The record must be acyclic and ``self`` must hold a single value.
        """
        if self.values.size != 1:
            raise ValueError(f"backward requires a scalar, got shape {self.values.shape}")
        if not self.requires_grad:
            return
        order = self._toposort()
        self.accumulate_grad(np.ones_like(self.values))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
                if node._parents:
                    node.grad = None  # intermediate grads are not retained

    def _toposort(self) -> list["Tensor"]:
        WHITE, GRAY, BLACK = 0, 1, 2
        color: dict[int, int] = {}
        order: list[Tensor] = []
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, done = stack.pop()
            nid = id(node)
            if done:
                color[nid] = BLACK
                order.append(node)
                continue
            c = color.get(nid, WHITE)
            if c == BLACK:
                continue
            if c == GRAY:
                raise ValueError("cycle detected in operation record")
            color[nid] = GRAY
            stack.append((node, True))
            for p in node._parents:
                if color.get(id(p), WHITE) != BLACK:
                    stack.append((p, False))
        return order

    # -- operators ---------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __neg__(self):
        return mul(self, -1.0)

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return mul(self, power(other, -1.0))
        return mul(self, 1.0 / float(other))

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, p):
        return power(self, p)


def _coerce(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


# -- primitives -------------------------------------------------------------


def add(a, b) -> Tensor:
    a, b = _coerce(a), _coerce(b)
    out_values = a.values + b.values

    def backward(g):
        a.accumulate_grad(g)
        b.accumulate_grad(g)

    return Tensor._from_op(out_values, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = _coerce(a), _coerce(b)
    out_values = a.values * b.values

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(g * b.values)
        if b.requires_grad:
            b.accumulate_grad(g * a.values)

    return Tensor._from_op(out_values, (a, b), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out_values = np.matmul(a.values, b.values)

    def backward(g):
        if a.requires_grad:
            a.accumulate_grad(np.matmul(g, np.swapaxes(b.values, -1, -2)))
        if b.requires_grad:
            b.accumulate_grad(np.matmul(np.swapaxes(a.values, -1, -2), g))

    return Tensor._from_op(out_values, (a, b), backward)


def power(a: Tensor, p: float) -> Tensor:
    p = float(p)
    out_values = a.values**p

    def backward(g):
        a.accumulate_grad(g * p * a.values ** (p - 1.0))

    return Tensor._from_op(out_values, (a,), backward)


def exp(a: Tensor) -> Tensor:
    out_values = np.exp(a.values)

    def backward(g):
        a.accumulate_grad(g * out_values)

    return Tensor._from_op(out_values, (a,), backward)


def log(a: Tensor) -> Tensor:
    out_values = np.log(a.values)

    def backward(g):
        a.accumulate_grad(g / a.values)

    return Tensor._from_op(out_values, (a,), backward)


def relu(a: Tensor) -> Tensor:
    out_values = np.maximum(a.values, 0.0)

    def backward(g):
        a.accumulate_grad(g * (a.values > 0.0))

    return Tensor._from_op(out_values, (a,), backward)


def tanh(a: Tensor) -> Tensor:
    out_values = np.tanh(a.values)

    def backward(g):
        a.accumulate_grad(g * (1.0 - out_values * out_values))

    return Tensor._from_op(out_values, (a,), backward)


def reshape(a: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    out_values = a.values.reshape(shape)

    def backward(g):
        a.accumulate_grad(g.reshape(a.values.shape))

    return Tensor._from_op(out_values, (a,), backward)


def transpose(a: Tensor, axes) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    out_values = a.values.transpose(axes)

    def backward(g):
        a.accumulate_grad(g.transpose(inverse))

    return Tensor._from_op(out_values, (a,), backward)


def tensor_sum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out_values = a.values.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is None:
            a.accumulate_grad(np.broadcast_to(g, a.values.shape))
            return
        if not keepdims:
            g = np.expand_dims(g, axis)
        a.accumulate_grad(np.broadcast_to(g, a.values.shape))

    return Tensor._from_op(out_values, (a,), backward)


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    n = a.values.size if axis is None else a.values.shape[axis]
    return mul(tensor_sum(a, axis=axis, keepdims=keepdims), 1.0 / n)


def embedding(weight: Tensor, ids: np.ndarray) -> Tensor:
    """Row lookup: ids of any integer shape pick rows of a [V, d] table."""
    ids = np.asarray(ids)
    out_values = weight.values[ids]

    def backward(g):
        full = np.zeros_like(weight.values)
        np.add.at(full, ids, g)
        weight.accumulate_grad(full)

    return Tensor._from_op(out_values, (weight,), backward)


def pick(a: Tensor, ids: np.ndarray) -> Tensor:
    """Per-row column selection: a is [P, V], ids is [P], result is [P]."""
    ids = np.asarray(ids)
    rows = np.arange(a.values.shape[0])
    out_values = a.values[rows, ids]

    def backward(g):
        full = np.zeros_like(a.values)
        full[rows, ids] = g
        a.accumulate_grad(full)

    return Tensor._from_op(out_values, (a,), backward)


def dropout(a: Tensor, p: float, rng: np.random.Generator) -> Tensor:
    """Inverted dropout; identity when p == 0."""
    if p == 0.0:
        return a
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must be in [0, 1), got {p}")
    keep = (rng.random(a.values.shape) >= p) / (1.0 - p)
    out_values = a.values * keep

    def backward(g):
        a.accumulate_grad(g * keep)

    return Tensor._from_op(out_values, (a,), backward)


# -- composite ops used by the model -----------------------------------------


def _check_axis(axis: int, ndim: int) -> int:
    if not -ndim <= axis < ndim:
        raise ValueError(f"axis {axis} invalid for {ndim}-dimensional input")
    return axis % ndim


def softmax(logits: Tensor, axis: int = -1) -> Tensor:
    """Max-subtracted softmax along ``axis``; rows sum to 1 within 1e-12."""
    axis = _check_axis(axis, logits.values.ndim)
    _check_finite(logits.values, "softmax input")
    shifted = logits.values - logits.values.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_values = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        inner = (g * out_values).sum(axis=axis, keepdims=True)
        logits.accumulate_grad((g - inner) * out_values)

    return Tensor._from_op(out_values, (logits,), backward)


def log_softmax(logits: Tensor, axis: int = -1) -> Tensor:
    axis = _check_axis(axis, logits.values.ndim)
    _check_finite(logits.values, "log_softmax input")
    shifted = logits.values - logits.values.max(axis=axis, keepdims=True)
    out_values = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

    def backward(g):
        probs = np.exp(out_values)
        logits.accumulate_grad(g - probs * g.sum(axis=axis, keepdims=True))

    return Tensor._from_op(out_values, (logits,), backward)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-6) -> Tensor:
    """Normalize the last axis to mean 0 / variance 1, then scale and shift.

    Variance uses the population (1/N) convention.
    """
    d = x.values.shape[-1]
    if gain.values.shape != (d,) or bias.values.shape != (d,):
        raise ValueError(
            f"gain/bias must have shape ({d},), got {gain.values.shape} and {bias.values.shape}"
        )
    mu = x.values.mean(axis=-1, keepdims=True)
    centered = x.values - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_sigma = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv_sigma
    out_values = xhat * gain.values + bias.values

    def backward(g):
        if gain.requires_grad:
            lead = tuple(range(g.ndim - 1))
            gain.accumulate_grad((g * xhat).sum(axis=lead))
        if bias.requires_grad:
            lead = tuple(range(g.ndim - 1))
            bias.accumulate_grad(g.sum(axis=lead))
        if x.requires_grad:
            gx_hat = g * gain.values
            m1 = gx_hat.mean(axis=-1, keepdims=True)
            m2 = (gx_hat * xhat).mean(axis=-1, keepdims=True)
            x.accumulate_grad(inv_sigma * (gx_hat - m1 - xhat * m2))

    return Tensor._from_op(out_values, (x, gain, bias), backward)


def cross_entropy(
    logits: Tensor,
    target_ids: np.ndarray,
    label_smoothing: float = 0.0,
    mask: np.ndarray | None = None,
) -> Tensor:
    """Mean smoothed negative log-likelihood over unmasked positions.

    ``logits`` is [positions, vocab]; the smoothed target distribution puts
    1 - eps on the target id plus eps/V spread uniformly over the whole
    vocabulary. Positions where ``mask`` is False are excluded from the mean.
    """
    if not 0.0 <= label_smoothing < 1.0:
        raise ValueError(f"label_smoothing must be in [0, 1), got {label_smoothing}")
    positions, vocab = logits.values.shape
    target_ids = np.asarray(target_ids)
    if target_ids.shape != (positions,):
        raise ValueError(f"target_ids must have shape ({positions},), got {target_ids.shape}")
    if target_ids.size and (target_ids.min() < 0 or target_ids.max() >= vocab):
        raise ValueError("target id out of vocabulary range")
    if mask is None:
        mask = np.ones(positions, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    n = int(mask.sum())
    if n == 0:
        raise ValueError("cross_entropy over zero unmasked positions")

    lp = log_softmax(logits, axis=-1)
    picked = pick(lp, target_ids)
    per_token = mul(picked, -(1.0 - label_smoothing))
    if label_smoothing > 0.0:
        uniform_part = mul(tensor_sum(lp, axis=-1), -(label_smoothing / vocab))
        per_token = add(per_token, uniform_part)
    weighted = mul(per_token, mask.astype(np.float64))
    return mul(tensor_sum(weighted), 1.0 / n)
