"""Feature-interaction kernels.

Given m representation vectors r_1..r_m (each k-dimensional), the order-t
interaction is the elementary symmetric sum

    fi_t = sum over all i_1 < ... < i_t of r_{i_1} * ... * r_{i_t}

with elementwise products. Enumerating the C(m, t) subsets costs
C(m, t) * (t - 1) * k multiplies; the Newton-identity recursion

    fi_i = (1/i) * sum_{j=1..i} (-1)^{j+1} * pfi_j * fi_{i-j},   fi_0 = 1

over the power sums pfi_j = sum_i r_i^j computes the same stack in
O(t * (t + m) * k). Both kernels ship: the recursion is what the model uses,
the enumeration is the independent route for cross-checks and benchmarks.

A CrossNet-style stack is included as a baseline. Unlike the symmetric sums
it projects each order through a weight matrix and its expansion contains
self-powers of features (x_i^2 and friends), which is what makes its terms
hard to read as pure interactions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .exceptions import ConfigError, ShapeError

KERNEL_KINDS = ("recursion", "enumeration")


def _as_stacked(reprs) -> np.ndarray:
    arr = np.asarray(reprs, dtype=np.float64)
    if arr.ndim < 1 or arr.shape[0] < 1:
        raise ShapeError("need at least one representation")
    return arr


def _check_order(t: int) -> int:
    if not isinstance(t, (int, np.integer)) or isinstance(t, bool) or t < 1:
        raise ConfigError(f"interaction order must be a positive integer, got {t!r}")
    return int(t)


def power_sums(reprs, t: int) -> np.ndarray:
    """Power sums pfi_1..pfi_t over the first axis, stacked along a new axis."""
    t = _check_order(t)
    r = _as_stacked(reprs)
    out = np.empty((t,) + r.shape[1:])
    power = r.copy()
    out[0] = power.sum(axis=0)
    for i in range(2, t + 1):
        power *= r
        out[i - 1] = power.sum(axis=0)
    return out


def enumerate_interactions(reprs, t: int) -> np.ndarray:
    """Order-t interaction by direct subset enumeration.

    ``reprs`` has shape (m, ...); the result drops the first axis. For t > m
    there are no subsets and the result is exactly zero.
    """
    t = _check_order(t)
    r = _as_stacked(reprs)
    m = r.shape[0]
    acc = np.zeros(r.shape[1:])
    if t > m:
        return acc
    for combo in itertools.combinations(range(m), t):
        prod = r[combo[0]].copy()
        for idx in combo[1:]:
            prod *= r[idx]
        acc += prod
    return acc


def esp_sums(reprs, t: int) -> np.ndarray:
    """Interaction orders 1..t via the recursion, stacked along a new axis.

    Orders above m are exactly zero (no subsets of that size exist), so they
    are short-circuited rather than left to floating-point cancellation.
    """
    t = _check_order(t)
    r = _as_stacked(reprs)
    m = r.shape[0]
    pfi = power_sums(r, t)
    fi = np.zeros((t,) + r.shape[1:])
    for i in range(1, min(t, m) + 1):
        if i == 1:
            fi[0] = pfi[0]
            continue
        acc = np.zeros(r.shape[1:])
        for j in range(1, i + 1):
            term = pfi[j - 1] if j == i else pfi[j - 1] * fi[i - j - 1]
            if j % 2 == 1:
                acc += term
            else:
                acc -= term
        fi[i - 1] = acc / i
    return fi


@dataclass
class InteractionStack:
    """Differentiable interaction orders 1..t for a batch.

    ``fi[j]`` holds order j+1; every entry has shape (n, k). The order-0 value
    is identically 1 and is never materialized or concatenated. ``pfi`` keeps
    the power sums the recursion ran on.
    """

    order: int
    fi: list[ad.Tensor]
    pfi: list[ad.Tensor]

    def concatenated(self) -> ad.Tensor:
        return ad.concat_cols(self.fi)


def _tensor_sum(parts: Sequence[ad.Tensor]) -> ad.Tensor:
    acc = parts[0]
    for p in parts[1:]:
        acc = ad.add(acc, p)
    return acc


def interaction_stack(reprs: Sequence[ad.Tensor], t: int) -> InteractionStack:
    """Build the graph computing fi_1..fi_t from per-feature representations."""
    t = _check_order(t)
    if not reprs:
        raise ShapeError("need at least one representation")
    shape = reprs[0].shape
    for r in reprs:
        if r.shape != shape:
            raise ShapeError(f"representations disagree in shape: {r.shape} vs {shape}")
    m = len(reprs)

    pfi: list[ad.Tensor] = []
    powers = list(reprs)
    pfi.append(_tensor_sum(powers))
    for i in range(2, t + 1):
        powers = [ad.mul(p, r) for p, r in zip(powers, reprs)]
        pfi.append(_tensor_sum(powers))

    fi: list[ad.Tensor] = []
    for i in range(1, t + 1):
        if i > m:
            fi.append(ad.zeros(shape))
            continue
        if i == 1:
            fi.append(pfi[0])
            continue
        total: ad.Tensor | None = None
        for j in range(1, i + 1):
            term = pfi[j - 1] if j == i else ad.mul(pfi[j - 1], fi[i - j - 1])
            signed = term if j % 2 == 1 else ad.neg(term)
            total = signed if total is None else ad.add(total, signed)
        fi.append(ad.scale(total, 1.0 / i))
    return InteractionStack(order=t, fi=fi, pfi=pfi)


class CrossNetStack:
    """Weights for a cross layer stack: g_1 = x W_1, g_i = (g_1 * g_{i-1}) W_i."""

    def __init__(self, num_features: int, k: int, order: int,
                 rng: np.random.Generator | None = None):
        order = _check_order(order)
        if num_features < 1 or k < 1:
            raise ConfigError(f"bad crossnet sizes m={num_features}, k={k}")
        rng = rng or np.random.default_rng()
        self.num_features = num_features
        self.k = k
        self.order = order
        self.weights = [ad.Tensor(rng.normal(0.0, np.sqrt(2.0 / num_features), (num_features, k)),
                                  requires_grad=True)]
        for _ in range(2, order + 1):
            self.weights.append(ad.Tensor(rng.normal(0.0, np.sqrt(2.0 / k), (k, k)),
                                          requires_grad=True))

    def parameters(self) -> list[ad.Tensor]:
        return list(self.weights)


def crossnet_forward(x: ad.Tensor, stack: CrossNetStack, t: int | None = None) -> ad.Tensor:
    """Run the cross layers up to order ``t`` (default: the stack's order)."""
    t = stack.order if t is None else _check_order(t)
    if t > stack.order:
        raise ConfigError(f"stack holds {stack.order} orders, asked for {t}")
    if x.shape[1] != stack.num_features:
        raise ShapeError(f"crossnet expects (n, {stack.num_features}), got {x.shape}")
    g1 = ad.matmul(x, stack.weights[0])
    g = g1
    for i in range(2, t + 1):
        g = ad.matmul(ad.mul(g1, g), stack.weights[i - 1])
    return g


def count_kernel_ops(kind: str, m: int, k: int, t: int) -> int:
    """Exact multiply count of a kernel invocation.

    enumeration: each of the C(m, t) subsets takes (t - 1) elementwise
    products of k-vectors. recursion: (t - 1) * m * k multiplies for the
    power sums plus k * (t(t+1)/2 - 1) inside the Newton recurrence (the
    per-order products and the 1/i scale). Additions are not counted; at
    t = 1 both kernels are pure sums and cost zero multiplies.
    """
    t = _check_order(t)
    if m < 1 or k < 1:
        raise ConfigError(f"bad kernel dimensions m={m}, k={k}")
    if kind == "enumeration":
        return comb(m, t) * (t - 1) * k
    if kind == "recursion":
        if t == 1:
            return 0
        return (t - 1) * m * k + k * (t * (t + 1) // 2 - 1)
    raise ConfigError(f"unknown kernel {kind!r}, expected one of {KERNEL_KINDS}")
