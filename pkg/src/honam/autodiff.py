"""Reverse-mode automatic differentiation over dense 2-D float64 arrays.

Every value in a computation is a :class:`Tensor` wrapping an ``(n, c)``
numpy array. Operations record the graph as they run: each result keeps a
tuple of parent tensors and a closure that pushes gradients to them.
``backward`` replays the recorded graph in reverse topological order exactly
once per forward pass; gradients accumulate with ``+=`` so fan-out is handled
naturally.

Shapes are checked loudly. Apart from Python scalars, the only sanctioned
broadcast is :func:`add_rowvec` (a ``(1, c)`` row added to every row of an
``(n, c)`` tensor), which exists so affine layers do not need silent numpy
broadcasting.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

from .exceptions import NumericError, ShapeError, StateError

Scalar = (int, float, np.integer, np.floating)


class Tensor:
    """A 2-D float64 array plus its gradient buffer and graph bookkeeping."""

    __slots__ = ("values", "grad", "requires_grad", "_parents", "_backward", "_backward_done")

    def __init__(self, values, requires_grad: bool = False, _parents: tuple = ()):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise ShapeError(f"tensors are 2-D, got array of shape {arr.shape}")
        self.values = arr
        self.grad = np.zeros_like(arr)
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward: Callable[[], None] = _noop
        self._backward_done = False

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    def item(self) -> float:
        if self.values.size != 1:
            raise ShapeError(f"item() needs a single element, shape is {self.shape}")
        return float(self.values[0, 0])

    def backward(self) -> None:
        """Backpropagate from this tensor, which must hold a single element.

        The recorded graph is replayed in reverse topological order. Replaying
        the same graph twice is an error: run a new forward pass instead.
        """
        if self.values.size != 1:
            raise ShapeError(f"backward() starts from a scalar, shape is {self.shape}")
        if self._backward_done:
            raise StateError("backward() already ran for this graph; run a new forward pass")
        self._backward_done = True
        self.grad[...] = 1.0
        for node in reversed(_topo_order(self)):
            node._backward()

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # Operator sugar. Scalars are accepted where the op allows them.
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


def _noop() -> None:
    return None


def _topo_order(root: Tensor) -> list[Tensor]:
    """Iterative depth-first linearization of the graph below ``root``."""
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, children_done = stack.pop()
        if children_done:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def parameter(values, rng: np.random.Generator | None = None) -> Tensor:
    """Wrap ``values`` as a trainable tensor."""
    del rng
    return Tensor(values, requires_grad=True)


def constant(values) -> Tensor:
    return Tensor(values, requires_grad=False)


def zeros(shape: tuple[int, int]) -> Tensor:
    return Tensor(np.zeros(shape))


def _check_same_shape(op: str, a: Tensor, b: Tensor) -> None:
    if a.values.shape != b.values.shape:
        raise ShapeError(f"{op} needs matching shapes, got {a.shape} and {b.shape}")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")
    out = Tensor(a.values @ b.values, _parents=(a, b))

    def backward() -> None:
        a.grad += out.grad @ b.values.T
        b.grad += a.values.T @ out.grad

    out._backward = backward
    return out


def add(a: Tensor, b) -> Tensor:
    if isinstance(b, Scalar):
        out = Tensor(a.values + float(b), _parents=(a,))

        def backward_scalar() -> None:
            a.grad += out.grad

        out._backward = backward_scalar
        return out
    _check_same_shape("add", a, b)
    out = Tensor(a.values + b.values, _parents=(a, b))

    def backward() -> None:
        a.grad += out.grad
        b.grad += out.grad

    out._backward = backward
    return out


def sub(a: Tensor, b) -> Tensor:
    if isinstance(b, Scalar):
        return add(a, -float(b))
    _check_same_shape("sub", a, b)
    out = Tensor(a.values - b.values, _parents=(a, b))

    def backward() -> None:
        a.grad += out.grad
        b.grad -= out.grad

    out._backward = backward
    return out


def mul(a: Tensor, b) -> Tensor:
    if isinstance(b, Scalar):
        return scale(a, float(b))
    _check_same_shape("mul", a, b)
    out = Tensor(a.values * b.values, _parents=(a, b))

    def backward() -> None:
        a.grad += out.grad * b.values
        b.grad += out.grad * a.values

    out._backward = backward
    return out


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)
    out = Tensor(a.values * c, _parents=(a,))

    def backward() -> None:
        a.grad += out.grad * c

    out._backward = backward
    return out


def neg(a: Tensor) -> Tensor:
    return scale(a, -1.0)


def pow_int(a: Tensor, i: int) -> Tensor:
    """Elementwise integer power, ``i >= 0``."""
    if not isinstance(i, (int, np.integer)) or isinstance(i, bool):
        raise ShapeError(f"pow_int exponent must be an integer, got {i!r}")
    if i < 0:
        raise ShapeError(f"pow_int exponent must be non-negative, got {i}")
    i = int(i)
    out = Tensor(a.values ** i, _parents=(a,))

    def backward() -> None:
        if i > 0:
            a.grad += out.grad * (i * a.values ** (i - 1))

    out._backward = backward
    return out


def exp(a: Tensor) -> Tensor:
    out = Tensor(np.exp(a.values), _parents=(a,))

    def backward() -> None:
        a.grad += out.grad * out.values

    out._backward = backward
    return out


def log(a: Tensor) -> Tensor:
    if np.any(a.values <= 0.0):
        raise NumericError("log needs strictly positive inputs")
    out = Tensor(np.log(a.values), _parents=(a,))

    def backward() -> None:
        a.grad += out.grad / a.values

    out._backward = backward
    return out


def add_rowvec(a: Tensor, v: Tensor) -> Tensor:
    """Add a ``(1, c)`` row vector to every row of an ``(n, c)`` tensor."""
    if v.shape[0] != 1 or v.shape[1] != a.shape[1]:
        raise ShapeError(f"add_rowvec needs (n, c) and (1, c), got {a.shape} and {v.shape}")
    out = Tensor(a.values + v.values, _parents=(a, v))

    def backward() -> None:
        a.grad += out.grad
        v.grad += out.grad.sum(axis=0, keepdims=True)

    out._backward = backward
    return out


def concat_cols(parts: Sequence[Tensor]) -> Tensor:
    """Concatenate tensors with equal row counts along columns."""
    if not parts:
        raise ShapeError("concat_cols needs at least one tensor")
    rows = parts[0].shape[0]
    for p in parts:
        if p.shape[0] != rows:
            raise ShapeError(f"concat_cols row counts differ: {[p.shape for p in parts]}")
    out = Tensor(np.concatenate([p.values for p in parts], axis=1), _parents=tuple(parts))
    widths = [p.shape[1] for p in parts]

    def backward() -> None:
        start = 0
        for p, w in zip(parts, widths):
            p.grad += out.grad[:, start:start + w]
            start += w

    out._backward = backward
    return out


def sum_all(a: Tensor) -> Tensor:
    out = Tensor(np.array([[a.values.sum()]]), _parents=(a,))

    def backward() -> None:
        a.grad += out.grad[0, 0]

    out._backward = backward
    return out


def mean_all(a: Tensor) -> Tensor:
    n = a.values.size
    out = Tensor(np.array([[a.values.mean()]]), _parents=(a,))

    def backward() -> None:
        a.grad += out.grad[0, 0] / n

    out._backward = backward
    return out


def relu(a: Tensor) -> Tensor:
    """max(0, x). The subgradient at exactly 0 is taken as 0."""
    out = Tensor(np.maximum(a.values, 0.0), _parents=(a,))
    mask = (a.values > 0.0).astype(np.float64)

    def backward() -> None:
        a.grad += out.grad * mask

    out._backward = backward
    return out


def relu_n(a: Tensor, n: float = 1.0) -> Tensor:
    """min(n, max(0, x)): a ReLU capped at ``n``. Zero subgradient at both kinks."""
    n = float(n)
    if not n > 0.0:
        raise ShapeError(f"relu_n cap must be positive, got {n}")
    out = Tensor(np.clip(a.values, 0.0, n), _parents=(a,))
    mask = ((a.values > 0.0) & (a.values < n)).astype(np.float64)

    def backward() -> None:
        a.grad += out.grad * mask

    out._backward = backward
    return out


def leaky_relu(a: Tensor, slope: float = 0.01) -> Tensor:
    """x for x > 0, slope*x otherwise; the point x = 0 uses the negative slope."""
    slope = float(slope)
    if not 0.0 < slope < 1.0:
        raise ShapeError(f"leaky_relu slope must lie in (0, 1), got {slope}")
    out = Tensor(np.where(a.values > 0.0, a.values, slope * a.values), _parents=(a,))
    mask = np.where(a.values > 0.0, 1.0, slope)

    def backward() -> None:
        a.grad += out.grad * mask

    out._backward = backward
    return out


def mse_loss(pred: Tensor, target: np.ndarray) -> Tensor:
    """Mean squared error against a constant target array."""
    target = np.asarray(target, dtype=np.float64).reshape(pred.shape)
    diff = pred.values - target
    out = Tensor(np.array([[np.mean(diff * diff)]]), _parents=(pred,))
    n = diff.size

    def backward() -> None:
        pred.grad += out.grad[0, 0] * (2.0 / n) * diff

    out._backward = backward
    return out


def logistic_loss(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean binary cross-entropy on raw logits, labels in {0, 1}.

    Computed as mean(log(1 + e^z) - y*z) via logaddexp for stability; the
    gradient is (sigmoid(z) - y) / n.
    """
    y = np.asarray(labels, dtype=np.float64).reshape(logits.shape)
    z = logits.values
    value = np.mean(np.logaddexp(0.0, z) - y * z)
    out = Tensor(np.array([[value]]), _parents=(logits,))
    n = z.size
    sig = 1.0 / (1.0 + np.exp(-z))

    def backward() -> None:
        logits.grad += out.grad[0, 0] * (sig - y) / n

    out._backward = backward
    return out


def grad_check(build_loss: Callable[[], Tensor], params: Iterable[Tensor], eps: float = 1e-5) -> float:
    """Compare analytic gradients against central finite differences.

    ``build_loss`` must run a fresh forward pass and return the scalar loss.
    Returns the worst relative error max|a - n| / max(1, |a|, |n|) over every
    entry of every parameter.
    """
    params = list(params)
    loss = build_loss()
    if not np.isfinite(loss.values).all():
        raise NumericError("grad_check forward produced a non-finite loss")
    for p in params:
        p.zero_grad()
    loss.backward()
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, grad in zip(params, analytic):
        flat = p.values.reshape(-1)
        for idx in range(flat.size):
            saved = flat[idx]
            flat[idx] = saved + eps
            up = build_loss().item()
            flat[idx] = saved - eps
            down = build_loss().item()
            flat[idx] = saved
            if not (np.isfinite(up) and np.isfinite(down)):
                raise NumericError("grad_check perturbation produced a non-finite loss")
            numeric = (up - down) / (2.0 * eps)
            a = grad.reshape(-1)[idx]
            err = abs(a - numeric) / max(1.0, abs(a), abs(numeric))
            worst = max(worst, err)
    return worst
