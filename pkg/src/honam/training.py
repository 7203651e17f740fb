"""Mini-batch training with best-validation-epoch selection.

The loop is deliberately plain: seeded shuffles, a batch size derived from
the training-partition size (n // batch_divisor, at least 1), a loss chosen
by the network's task (squared error on values, logistic loss on logits),
and one validation scoring per epoch. The parameter snapshot from the best
validation epoch is restored into the network before returning, so callers
always end up holding the selected model, not the last one.

Runs are bit-reproducible: the same network seed, data, and config produce
identical parameters and history.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from . import metrics as mx
from .exceptions import ConfigError, NumericError
from .network import HonamNetwork

OPTIMIZERS = ("adam", "sgd")
# Selection metrics and whether bigger is better.
SELECTION_METRICS = {
    "loss": False,
    "r_squared": True,
    "r_absolute": True,
    "auroc": True,
    "auprc": True,
}


@dataclass
class TrainConfig:
    epochs: int = 1000
    learning_rate: float = 0.001
    batch_divisor: int = 100
    optimizer: str = "adam"
    selection: str = "loss"
    seed: int = 0
    freeze_bank: bool = False

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be positive, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")
        if self.batch_divisor < 1:
            raise ConfigError(f"batch divisor must be positive, got {self.batch_divisor}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {self.optimizer!r}, expected one of {OPTIMIZERS}")
        if self.selection not in SELECTION_METRICS:
            raise ConfigError(
                f"unknown selection metric {self.selection!r}, "
                f"expected one of {tuple(SELECTION_METRICS)}")

    @classmethod
    def from_dict(cls, payload: dict) -> "TrainConfig":
        unknown = set(payload) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown training config key(s): {', '.join(sorted(unknown))}")
        return cls(**payload)


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    validation_score: float
    is_best: bool


@dataclass
class TrainResult:
    history: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = -1
    best_score: float = float("nan")


class Sgd:
    def __init__(self, params: list[ad.Tensor], lr: float):
        self.params = params
        self.lr = lr

    def step(self) -> None:
        for p in self.params:
            p.values -= self.lr * p.grad


class Adam:
    """Adaptive moment estimation with the usual constants."""

    def __init__(self, params: list[ad.Tensor], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.values) for p in params]
        self.v = [np.zeros_like(p.values) for p in params]

    def step(self) -> None:
        self.t += 1
        correct1 = 1.0 - self.beta1 ** self.t
        correct2 = 1.0 - self.beta2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * p.grad
            v *= self.beta2
            v += (1.0 - self.beta2) * p.grad * p.grad
            p.values -= self.lr * (m / correct1) / (np.sqrt(v / correct2) + self.eps)


def make_optimizer(name: str, params: list[ad.Tensor], lr: float):
    return Adam(params, lr) if name == "adam" else Sgd(params, lr)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def _validation_score(network: HonamNetwork, x, y, selection: str) -> float:
    raw = network.predict_raw(x)
    if selection == "loss":
        if network.task == "regression":
            return float(np.mean((raw - y) ** 2))
        return float(np.mean(np.logaddexp(0.0, raw) - y * raw))
    if selection == "r_squared":
        return mx.r_squared(y, raw)
    if selection == "r_absolute":
        return mx.r_absolute(y, raw)
    scores = _sigmoid(raw)
    return mx.auroc(y, scores) if selection == "auroc" else mx.auprc(y, scores)


def train(network: HonamNetwork, x_train, y_train, x_valid, y_valid,
          config: TrainConfig | None = None) -> TrainResult:
    """Fit the network in place and leave it at the best validation epoch."""
    config = config or TrainConfig()
    x_train = np.asarray(x_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64).reshape(-1)
    x_valid = np.asarray(x_valid, dtype=np.float64)
    y_valid = np.asarray(y_valid, dtype=np.float64).reshape(-1)
    n = x_train.shape[0]
    if n == 0 or x_valid.shape[0] == 0:
        raise ConfigError("training and validation partitions must be non-empty")
    if y_train.size != n or y_valid.size != x_valid.shape[0]:
        raise ConfigError("feature/target row counts disagree")
    if network.task == "binary-classification":
        for name, arr in (("training", y_train), ("validation", y_valid)):
            if not np.isin(arr, (0.0, 1.0)).all():
                raise ConfigError(f"classification needs 0/1 {name} targets")

    params = network.head_parameters() if config.freeze_bank else network.parameters()
    optimizer = make_optimizer(config.optimizer, params, config.learning_rate)
    batch_size = max(1, n // config.batch_divisor)
    rng = np.random.default_rng(config.seed)
    higher_better = SELECTION_METRICS[config.selection]

    result = TrainResult()
    best_params: list[np.ndarray] | None = None
    y_col = y_train.reshape(-1, 1)

    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, batch_size):
            batch_idx = order[start:start + batch_size]
            xb = x_train[batch_idx]
            yb = y_col[batch_idx]
            out = network.forward(xb)
            if network.task == "regression":
                loss = ad.mse_loss(out, yb)
            else:
                loss = ad.logistic_loss(out, yb)
            loss_value = loss.item()
            if not np.isfinite(loss_value):
                norms = max(float(np.abs(p.values).max()) for p in params)
                raise NumericError(
                    f"loss became non-finite at epoch {epoch}, batch {start // batch_size} "
                    f"(max |parameter| = {norms:.3e}); lower the learning rate")
            for p in params:
                p.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += loss_value * len(batch_idx)
        epoch_loss /= n

        score = _validation_score(network, x_valid, y_valid, config.selection)
        is_best = (
            result.best_epoch < 0
            or (higher_better and score > result.best_score)
            or (not higher_better and score < result.best_score)
        )
        if is_best:
            result.best_epoch = epoch
            result.best_score = score
            best_params = [p.values.copy() for p in network.parameters()]
        result.history.append(EpochRecord(epoch, epoch_loss, score, is_best))

    for p, saved in zip(network.parameters(), best_params):
        p.values[...] = saved
    return result
