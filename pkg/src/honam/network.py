"""The full additive-interaction network.

Per-feature nets produce representations r_1..r_m; the interaction recursion
turns them into fi_1..fi_t; an affine head maps the concatenation to the
output. Rows [(p-1)*k, p*k) of the head weight belong to interaction order p,
which is what makes the model decomposable after training:

* order-1 contribution of feature i:       r_i . W[0:k]
* order-2 contribution of the pair (i, j): (r_i * r_j) . W[k:2k]
* order-p contribution of a subset S:      (prod_{i in S} r_i) . W[(p-1)k:pk]

The bias plus all subset contributions reproduce the raw output exactly (up
to float summation order). For classification the decomposed quantity is the
logit.

Ablation removes features by substituting a true zero for their
representation: every subset containing an ablated feature contributes
exactly 0, nothing is retrained, and the set can be changed or cleared at
any time.
"""

from __future__ import annotations

import base64
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .exceptions import ConfigError, DataError, ModelFormatError
from .featurenets import FeatureNetBank
from .interactions import esp_sums, interaction_stack

FORMAT_VERSION = 1
TASKS = ("regression", "binary-classification")


@dataclass
class ContributionReport:
    """Additive decomposition of one prediction.

    ``interactions`` maps sorted feature-index tuples (orders 2..cap) to
    their contribution; ``aggregates`` holds one total per order above the
    cap. ``prediction`` is the raw model output for the row.
    """

    bias: float
    prediction: float
    first_order: np.ndarray
    interactions: dict[tuple[int, ...], float] = field(default_factory=dict)
    aggregates: dict[int, float] = field(default_factory=dict)

    def total(self) -> float:
        return float(self.bias + self.first_order.sum()
                     + sum(self.interactions.values()) + sum(self.aggregates.values()))


class HonamNetwork:
    """Feature nets, interaction stack, and affine head in one object."""

    def __init__(
        self,
        num_features: int,
        order: int = 2,
        repr_size: int = 32,
        hidden_sizes: tuple[int, ...] = (32, 64, 32),
        unit: str = "linear",
        activation: str = "leaky_relu",
        activation_param: float | None = None,
        relu_cap: float = 1.0,
        task: str = "regression",
        seed: int = 0,
    ):
        if task not in TASKS:
            raise ConfigError(f"unknown task {task!r}, expected one of {TASKS}")
        if not isinstance(order, (int, np.integer)) or order < 1:
            raise ConfigError(f"interaction order must be a positive integer, got {order!r}")
        rng = np.random.default_rng(seed)
        self.num_features = num_features
        self.order = int(order)
        self.repr_size = repr_size
        self.hidden_sizes = tuple(int(h) for h in hidden_sizes)
        self.unit = unit
        self.activation = activation
        self.activation_param = activation_param
        self.relu_cap = relu_cap
        self.task = task
        self.seed = seed
        self.bank = FeatureNetBank(num_features, repr_size, self.hidden_sizes, unit,
                                   activation, activation_param, relu_cap, rng)
        width = self.order * repr_size
        self.head_W = ad.Tensor(rng.normal(0.0, np.sqrt(2.0 / width), (width, 1)),
                                requires_grad=True)
        self.head_b = ad.Tensor(np.zeros((1, 1)), requires_grad=True)
        self.ablated: frozenset[int] = frozenset()

    # ---- forward ---------------------------------------------------------

    def _check_input(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.num_features:
            raise DataError(
                f"model was built for {self.num_features} features, got input shape {x.shape}")
        if not np.isfinite(x).all():
            raise DataError("model input contains non-finite values")
        return x

    def representations(self, x) -> list[ad.Tensor]:
        """Per-feature representations with ablated ones replaced by zero."""
        x = self._check_input(x)
        n = x.shape[0]
        reprs: list[ad.Tensor] = []
        for i in range(self.num_features):
            if i in self.ablated:
                reprs.append(ad.zeros((n, self.repr_size)))
            else:
                reprs.append(self.bank.nets[i](ad.Tensor(x[:, i:i + 1])))
        return reprs

    def forward(self, x) -> ad.Tensor:
        stack = interaction_stack(self.representations(x), self.order)
        return ad.add_rowvec(ad.matmul(stack.concatenated(), self.head_W), self.head_b)

    def predict_raw(self, x) -> np.ndarray:
        """Raw outputs (regression value or logit) as a 1-D array."""
        return self.forward(x).values[:, 0]

    def parameters(self) -> list[ad.Tensor]:
        return [*self.bank.parameters(), *self.head_parameters()]

    def head_parameters(self) -> list[ad.Tensor]:
        return [self.head_W, self.head_b]

    # ---- interpretation --------------------------------------------------

    def head_slice(self, p: int) -> np.ndarray:
        """Head-weight rows owned by interaction order ``p``, as a k-vector."""
        if not 1 <= p <= self.order:
            raise ConfigError(f"order {p} outside 1..{self.order}")
        k = self.repr_size
        return self.head_W.values[(p - 1) * k:p * k, 0]

    def _row_representations(self, x_row) -> np.ndarray:
        x_row = np.asarray(x_row, dtype=np.float64).reshape(1, -1)
        reprs = self.representations(x_row)
        return np.stack([r.values[0] for r in reprs])

    def local_contributions(self, x_row, max_order: int | None = None) -> ContributionReport:
        """Decompose one row's prediction into per-subset contributions.

        Subsets are enumerated up to ``max_order`` (default: min(order, 3),
        since C(m, p) grows quickly); higher orders are reported as one
        aggregate total each, so the report always sums to the prediction.
        """
        cap = min(self.order, 3) if max_order is None else int(max_order)
        if cap < 1:
            raise ConfigError(f"max_order must be at least 1, got {max_order}")
        cap = min(cap, self.order)
        r = self._row_representations(x_row)
        first = r @ self.head_slice(1)
        report = ContributionReport(
            bias=float(self.head_b.values[0, 0]),
            prediction=float(self.predict_raw(np.asarray(x_row).reshape(1, -1))[0]),
            first_order=first,
        )
        for p in range(2, cap + 1):
            w = self.head_slice(p)
            for combo in itertools.combinations(range(self.num_features), p):
                prod = r[combo[0]].copy()
                for idx in combo[1:]:
                    prod *= r[idx]
                report.interactions[combo] = float(prod @ w)
        if cap < self.order:
            fi = esp_sums(r, self.order)
            for p in range(cap + 1, self.order + 1):
                report.aggregates[p] = float(fi[p - 1] @ self.head_slice(p))
        return report

    def global_shape(self, i: int, grid) -> np.ndarray:
        """Order-1 contribution of feature ``i`` along a grid of input values."""
        if not 0 <= i < self.num_features:
            raise ConfigError(f"feature index {i} out of range")
        grid = np.asarray(grid, dtype=np.float64).reshape(-1)
        if i in self.ablated:
            return np.zeros(grid.shape)
        r = self.bank.column_forward(i, grid).values
        return r @ self.head_slice(1)

    def global_pair_shape(self, i: int, j: int, grid_i, grid_j) -> np.ndarray:
        """Order-2 contribution surface for the pair (i, j) on a value grid."""
        if self.order < 2:
            raise ConfigError("pair shapes need an order-2 model or higher")
        for idx in (i, j):
            if not 0 <= idx < self.num_features:
                raise ConfigError(f"feature index {idx} out of range")
        if i == j:
            raise ConfigError("pair shape needs two distinct features")
        grid_i = np.asarray(grid_i, dtype=np.float64).reshape(-1)
        grid_j = np.asarray(grid_j, dtype=np.float64).reshape(-1)
        if i in self.ablated or j in self.ablated:
            return np.zeros((grid_i.size, grid_j.size))
        ri = self.bank.column_forward(i, grid_i).values
        rj = self.bank.column_forward(j, grid_j).values
        return np.einsum("ak,bk,k->ab", ri, rj, self.head_slice(2))

    # ---- ablation --------------------------------------------------------

    def ablate(self, features) -> "HonamNetwork":
        """Zero the given feature indices in every subsequent forward pass."""
        cleaned = set()
        for i in features:
            if not isinstance(i, (int, np.integer)) or not 0 <= i < self.num_features:
                raise ConfigError(f"cannot ablate feature {i!r}: index out of range")
            cleaned.add(int(i))
        self.ablated = frozenset(self.ablated | cleaned)
        return self

    def clear_ablation(self) -> "HonamNetwork":
        self.ablated = frozenset()
        return self

    # ---- persistence -----------------------------------------------------

    def _named_parameters(self) -> dict[str, ad.Tensor]:
        named: dict[str, ad.Tensor] = {}
        for i, net in enumerate(self.bank.nets):
            for j, layer in enumerate(net.layers):
                named[f"net{i}.layer{j}.W"] = layer.W
                named[f"net{i}.layer{j}.b"] = layer.b
        named["head.W"] = self.head_W
        named["head.b"] = self.head_b
        return named

    def save(self, path, extra: dict | None = None) -> None:
        """Write the versioned model container (JSON, documented in README)."""
        payload = {
            "format_version": FORMAT_VERSION,
            "kind": "honam-model",
            "task": self.task,
            "num_features": self.num_features,
            "repr_size": self.repr_size,
            "order": self.order,
            "unit": self.unit,
            "activation": self.activation,
            "activation_param": self.activation_param,
            "relu_cap": self.relu_cap,
            "hidden_sizes": list(self.hidden_sizes),
            "ablated": sorted(self.ablated),
            "pipeline": extra or {},
            "params": {
                name: {"shape": list(t.values.shape),
                       "data": base64.b64encode(t.values.astype("<f8").tobytes()).decode()}
                for name, t in self._named_parameters().items()
            },
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> tuple["HonamNetwork", dict]:
        """Rebuild a saved model bit-exactly. Returns (network, pipeline dict)."""
        try:
            with open(path, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
        except (json.JSONDecodeError, UnicodeDecodeError) as err:
            raise ModelFormatError(f"model file {path} is corrupt: {err}") from err
        if not isinstance(payload, dict) or payload.get("kind") != "honam-model":
            raise ModelFormatError(f"{path} is not a model container")
        version = payload.get("format_version")
        if version != FORMAT_VERSION:
            raise ModelFormatError(
                f"model format version {version!r} unsupported (this build reads {FORMAT_VERSION})")
        try:
            net = cls(
                num_features=payload["num_features"],
                order=payload["order"],
                repr_size=payload["repr_size"],
                hidden_sizes=tuple(payload["hidden_sizes"]),
                unit=payload["unit"],
                activation=payload["activation"],
                activation_param=payload["activation_param"],
                relu_cap=payload["relu_cap"],
                task=payload["task"],
            )
            named = net._named_parameters()
            stored = payload["params"]
            if set(stored) != set(named):
                raise ModelFormatError(
                    f"parameter names in {path} do not match the declared architecture")
            for name, tensor in named.items():
                entry = stored[name]
                arr = np.frombuffer(base64.b64decode(entry["data"]), dtype="<f8")
                arr = arr.reshape(entry["shape"]).astype(np.float64)
                if arr.shape != tensor.values.shape:
                    raise ModelFormatError(
                        f"parameter {name} has shape {arr.shape}, expected {tensor.values.shape}")
                tensor.values[...] = arr
            net.ablated = frozenset(int(i) for i in payload.get("ablated", []))
        except ModelFormatError:
            raise
        except (KeyError, TypeError, ValueError) as err:
            raise ModelFormatError(f"model file {path} is malformed: {err}") from err
        return net, payload.get("pipeline", {})
