"""Per-feature shape networks.

Each input column gets its own small fully connected net mapping the scalar
feature to a k-dimensional representation. The nets share nothing, so every
representation depends on exactly one input column; that independence is what
makes the downstream contributions attributable to features.

The first layer's unit kind is selectable. With ``exu`` or ``expdive`` units
the first layer defaults to the capped ReLU activation (that pairing is what
produces sharp jumps); deeper layers are always plain linear units with the
configured activation.
"""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .exceptions import ConfigError, DataError
from .units import UnitLayer


class FeatureNet:
    """One column in, one k-vector out."""

    def __init__(
        self,
        repr_size: int,
        hidden_sizes: tuple[int, ...] = (32, 64, 32),
        unit: str = "linear",
        activation: str = "leaky_relu",
        activation_param: float | None = None,
        relu_cap: float = 1.0,
        rng: np.random.Generator | None = None,
    ):
        rng = rng or np.random.default_rng()
        sizes = [1, *hidden_sizes, repr_size]
        self.layers: list[UnitLayer] = []
        for depth, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            if depth == 0 and unit != "linear":
                layer = UnitLayer(fan_in, fan_out, kind=unit, activation="relu_n",
                                  activation_param=relu_cap, rng=rng)
            else:
                layer = UnitLayer(fan_in, fan_out, kind="linear", activation=activation,
                                  activation_param=activation_param, rng=rng)
            self.layers.append(layer)

    def forward(self, x: ad.Tensor) -> ad.Tensor:
        out = x
        for layer in self.layers:
            out = layer(out)
        return out

    def __call__(self, x: ad.Tensor) -> ad.Tensor:
        return self.forward(x)

    def parameters(self) -> list[ad.Tensor]:
        return [p for layer in self.layers for p in layer.parameters()]


class FeatureNetBank:
    """A stack of independent feature nets, one per input column."""

    def __init__(
        self,
        num_features: int,
        repr_size: int = 32,
        hidden_sizes: tuple[int, ...] = (32, 64, 32),
        unit: str = "linear",
        activation: str = "leaky_relu",
        activation_param: float | None = None,
        relu_cap: float = 1.0,
        rng: np.random.Generator | None = None,
    ):
        if num_features < 1:
            raise ConfigError(f"need at least one feature, got {num_features}")
        if repr_size < 1:
            raise ConfigError(f"representation size must be positive, got {repr_size}")
        rng = rng or np.random.default_rng()
        self.num_features = num_features
        self.repr_size = repr_size
        self.nets = [
            FeatureNet(repr_size, tuple(hidden_sizes), unit, activation,
                       activation_param, relu_cap, rng)
            for _ in range(num_features)
        ]

    def forward(self, x: np.ndarray) -> list[ad.Tensor]:
        """Map an (n, m) matrix to m representations of shape (n, k)."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.num_features:
            raise DataError(
                f"bank expects (n, {self.num_features}) input, got shape {x.shape}")
        return [net(ad.Tensor(x[:, i:i + 1])) for i, net in enumerate(self.nets)]

    def column_forward(self, i: int, values: np.ndarray) -> ad.Tensor:
        """Run net ``i`` alone on a 1-D grid of column values."""
        if not 0 <= i < self.num_features:
            raise ConfigError(f"feature index {i} out of range for {self.num_features} nets")
        col = np.asarray(values, dtype=np.float64).reshape(-1, 1)
        return self.nets[i](ad.Tensor(col))

    def parameters(self) -> list[ad.Tensor]:
        return [p for net in self.nets for p in net.parameters()]


def parameter_count(params) -> int:
    return sum(p.values.size for p in params)
