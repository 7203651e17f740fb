"""Hidden-layer unit kinds.

Three unit families share the affine-then-activate shape but differ in how
the weight enters:

* ``linear``: sigma(x @ W + b), the ordinary dense layer; bias is per output.
* ``exu``: sigma((x - b) @ exp(W)); bias shifts the input, the effective
  weight exp(W) is always positive, so the response can only climb in one
  direction. With a ReLU-family activation and b = 0 the layer is identically
  zero (value and weight gradient) on negative inputs.
* ``expdive``: sigma((x - b) @ (exp(W) - exp(-W))); the effective weight
  2*sinh(W) takes the sign of W, so a single unit can produce steep responses
  on either side of its bias, not just the positive one.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .exceptions import ConfigError

UNIT_KINDS = ("linear", "exu", "expdive")
ACTIVATION_KINDS = ("relu", "relu_n", "leaky_relu", "identity")


def apply_activation(x: ad.Tensor, kind: str, param: float | None = None) -> ad.Tensor:
    if kind == "identity":
        return x
    if kind == "relu":
        return ad.relu(x)
    if kind == "relu_n":
        return ad.relu_n(x, 1.0 if param is None else param)
    if kind == "leaky_relu":
        return ad.leaky_relu(x, 0.01 if param is None else param)
    raise ConfigError(f"unknown activation {kind!r}, expected one of {ACTIVATION_KINDS}")


class UnitLayer:
    """One dense layer of a chosen unit kind with its activation."""

    def __init__(
        self,
        in_size: int,
        out_size: int,
        kind: str = "linear",
        activation: str = "leaky_relu",
        activation_param: float | None = None,
        rng: np.random.Generator | None = None,
    ):
        if kind not in UNIT_KINDS:
            raise ConfigError(f"unknown unit kind {kind!r}, expected one of {UNIT_KINDS}")
        if activation not in ACTIVATION_KINDS:
            raise ConfigError(f"unknown activation {activation!r}, expected one of {ACTIVATION_KINDS}")
        if in_size < 1 or out_size < 1:
            raise ConfigError(f"layer sizes must be positive, got {in_size}x{out_size}")
        rng = rng or np.random.default_rng()
        self.kind = kind
        self.in_size = in_size
        self.out_size = out_size
        self.activation = activation
        self.activation_param = activation_param
        if kind == "linear":
            # He-style scale keeps activations from shrinking layer to layer.
            w = rng.normal(0.0, np.sqrt(2.0 / in_size), size=(in_size, out_size))
            b = np.zeros((1, out_size))
        else:
            # Centered at 0.5 so the effective weight starts away from the
            # dead point (exp(W) - exp(-W) vanishes at W = 0).
            w = rng.normal(0.5, 0.5, size=(in_size, out_size))
            b = rng.normal(0.0, 0.5, size=(1, in_size))
        self.W = ad.Tensor(w, requires_grad=True)
        self.b = ad.Tensor(b, requires_grad=True)

    def parameters(self) -> list[ad.Tensor]:
        return [self.W, self.b]

    def forward(self, x: ad.Tensor) -> ad.Tensor:
        if x.shape[1] != self.in_size:
            raise ConfigError(f"layer expects {self.in_size} inputs, got {x.shape}")
        if self.kind == "linear":
            pre = ad.add_rowvec(ad.matmul(x, self.W), self.b)
        else:
            shifted = ad.add_rowvec(x, ad.neg(self.b))
            if self.kind == "exu":
                weight = ad.exp(self.W)
            else:
                weight = ad.sub(ad.exp(self.W), ad.exp(ad.neg(self.W)))
            pre = ad.matmul(shifted, weight)
        return apply_activation(pre, self.activation, self.activation_param)

    def __call__(self, x: ad.Tensor) -> ad.Tensor:
        return self.forward(x)
