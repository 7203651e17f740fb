"""Estimator wrappers with the familiar fit/predict surface.

``HonamRegressor`` and ``HonamClassifier`` wrap the network, the training
loop, and (for regression) internal target standardization behind
``sklearn.base.BaseEstimator``, so get_params/set_params, cloning, and
pipeline composition behave the way the rest of the ecosystem expects.
Interpretation stays first-class: fitted estimators expose per-row
contribution reports, global shape curves, pair surfaces, and feature
ablation.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import metrics as mx
from .network import ContributionReport, HonamNetwork
from .training import TrainConfig, TrainResult, train
from .validation import as_float_matrix, as_float_vector, check_same_rows


class _BaseHonamEstimator(BaseEstimator):
    _task = "regression"

    def __init__(self, order=2, repr_size=32, hidden_sizes=(32, 64, 32), unit="linear",
                 activation="leaky_relu", activation_param=None, relu_cap=1.0,
                 epochs=1000, learning_rate=0.001, batch_divisor=100, optimizer="adam",
                 selection="loss", validation_fraction=0.2, random_state=0):
        self.order = order
        self.repr_size = repr_size
        self.hidden_sizes = hidden_sizes
        self.unit = unit
        self.activation = activation
        self.activation_param = activation_param
        self.relu_cap = relu_cap
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.batch_divisor = batch_divisor
        self.optimizer = optimizer
        self.selection = selection
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    # ---- fitting -----------------------------------------------------------

    def _split_validation(self, x, y):
        n = x.shape[0]
        n_valid = max(1, int(round(self.validation_fraction * n)))
        if n_valid >= n:
            raise NotFittedError(
                f"validation_fraction={self.validation_fraction} leaves no training rows")
        order = np.random.default_rng(self.random_state).permutation(n)
        valid_idx, train_idx = order[:n_valid], order[n_valid:]
        return x[train_idx], y[train_idx], x[valid_idx], y[valid_idx]

    def _prepare_targets(self, y_train, y_valid):
        return y_train, y_valid

    def fit(self, X, y, validation_data=None):
        """Fit on (X, y); holds out validation_fraction unless a
        (X_valid, y_valid) pair is passed explicitly."""
        x = as_float_matrix(X)
        y = as_float_vector(y)
        check_same_rows(x, y)
        if validation_data is not None:
            xv = as_float_matrix(validation_data[0], name="X_valid")
            yv = as_float_vector(validation_data[1], name="y_valid")
            check_same_rows(xv, yv)
            if xv.shape[1] != x.shape[1]:
                raise ValueError("validation data has a different feature count")
            xt, yt = x, y
        else:
            xt, yt, xv, yv = self._split_validation(x, y)

        self.network_ = HonamNetwork(
            num_features=x.shape[1],
            order=self.order,
            repr_size=self.repr_size,
            hidden_sizes=tuple(self.hidden_sizes),
            unit=self.unit,
            activation=self.activation,
            activation_param=self.activation_param,
            relu_cap=self.relu_cap,
            task=self._task,
            seed=self.random_state,
        )
        yt_fit, yv_fit = self._prepare_targets(yt, yv)
        config = TrainConfig(
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            batch_divisor=self.batch_divisor,
            optimizer=self.optimizer,
            selection=self.selection,
            seed=self.random_state,
        )
        self.train_result_: TrainResult = train(self.network_, xt, yt_fit, xv, yv_fit, config)
        self.n_features_in_ = x.shape[1]
        return self

    def _fitted_network(self) -> HonamNetwork:
        network = getattr(self, "network_", None)
        if network is None:
            raise NotFittedError(f"{type(self).__name__} is not fitted yet; call fit first")
        return network

    # ---- interpretation ------------------------------------------------------

    def feature_contributions(self, X, max_order=None) -> list[ContributionReport]:
        network = self._fitted_network()
        x = as_float_matrix(X)
        return [network.local_contributions(row, max_order=max_order) for row in x]

    def shape_curve(self, feature_index: int, grid) -> np.ndarray:
        return self._fitted_network().global_shape(feature_index, grid)

    def pair_shape(self, i: int, j: int, grid_i, grid_j) -> np.ndarray:
        return self._fitted_network().global_pair_shape(i, j, grid_i, grid_j)

    def ablate_features(self, feature_indices):
        """Zero the given features in every later prediction; returns self."""
        self._fitted_network().ablate(feature_indices)
        return self

    def clear_ablation(self):
        self._fitted_network().clear_ablation()
        return self


class HonamRegressor(_BaseHonamEstimator):
    """Additive-interaction regressor; targets are standardized internally."""

    _task = "regression"
    _estimator_type = "regressor"

    def _prepare_targets(self, y_train, y_valid):
        self.target_mean_ = float(y_train.mean())
        scale = float(y_train.std())
        self.target_scale_ = scale if scale > 0 else 1.0
        return ((y_train - self.target_mean_) / self.target_scale_,
                (y_valid - self.target_mean_) / self.target_scale_)

    def predict(self, X) -> np.ndarray:
        raw = self._fitted_network().predict_raw(as_float_matrix(X))
        return raw * self.target_scale_ + self.target_mean_

    def score(self, X, y) -> float:
        return mx.r_squared(as_float_vector(y), self.predict(X))


class HonamClassifier(_BaseHonamEstimator):
    """Binary classifier on logits; predict_proba is the logistic of the output."""

    _task = "binary-classification"
    _estimator_type = "classifier"

    def fit(self, X, y, validation_data=None):
        labels = as_float_vector(y)
        if not np.isin(labels, (0.0, 1.0)).all():
            raise ValueError("classifier targets must be 0 or 1")
        self.classes_ = np.array([0.0, 1.0])
        return super().fit(X, labels, validation_data=validation_data)

    def decision_function(self, X) -> np.ndarray:
        return self._fitted_network().predict_raw(as_float_matrix(X))

    def predict_proba(self, X) -> np.ndarray:
        z = np.clip(self.decision_function(X), -500, 500)
        p = 1.0 / (1.0 + np.exp(-z))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(np.float64)

    def score(self, X, y) -> float:
        return mx.auroc(as_float_vector(y), self.predict_proba(X)[:, 1])
