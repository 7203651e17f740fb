"""Evaluation metrics.

All of these are authored here (no sklearn.metrics) so the test suite can
hold them against independent oracles: the rank-based AUROC is checked
against literal all-pairs counting, and the regression scores against their
closed forms. Undefined cases (constant targets, single-class labels, empty
groups) return NaN with a warning instead of raising, so multi-seed sweeps
never die on a degenerate partition.
"""

from __future__ import annotations

import warnings

import numpy as np

from .exceptions import ConfigError


def _as_1d(name, values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).reshape(-1)
    if not np.isfinite(arr).all():
        raise ConfigError(f"{name} contains non-finite values")
    return arr


def _paired(y, yhat) -> tuple[np.ndarray, np.ndarray]:
    y = _as_1d("targets", y)
    yhat = _as_1d("predictions", yhat)
    if y.shape != yhat.shape:
        raise ConfigError(f"target and prediction lengths differ: {y.size} vs {yhat.size}")
    if y.size < 2:
        raise ConfigError(f"need at least 2 samples, got {y.size}")
    return y, yhat


def r_squared(y, yhat) -> float:
    """1 - sum (y - yhat)^2 / sum (y - mean)^2."""
    y, yhat = _paired(y, yhat)
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0.0:
        warnings.warn("r_squared is undefined for a constant target")
        return float("nan")
    sse = float(np.sum((y - yhat) ** 2))
    return 1.0 - sse / sst

def adjusted_r_squared(y, yhat, n_features: int) -> float:
    """R^2 penalized for model size: 1 - (1 - R^2)(n - 1)/(n - p - 1)."""
    y, yhat = _paired(y, yhat)
    n = y.size
    if n_features < 0 or n - n_features - 1 <= 0:
        raise ConfigError(f"adjusted R^2 needs n > p + 1, got n={n}, p={n_features}")
    r2 = r_squared(y, yhat)
    return 1.0 - (1.0 - r2) * (n - 1) / (n - n_features - 1)


def r_absolute(y, yhat) -> float:
    """Absolute-error analogue of R^2: 1 - sum|y - yhat| / sum|y - mean|.

    Predicting the target mean scores exactly 0 and a perfect fit exactly 1,
    mirroring the squared version.
    """
    y, yhat = _paired(y, yhat)
    denom = float(np.sum(np.abs(y - y.mean())))
    if denom == 0.0:
        warnings.warn("r_absolute is undefined for a constant target")
        return float("nan")
    return 1.0 - float(np.sum(np.abs(y - yhat))) / denom


def _check_binary_labels(labels) -> np.ndarray:
    labels = _as_1d("labels", labels)
    if not np.isin(labels, (0.0, 1.0)).all():
        raise ConfigError("labels must be 0 or 1")
    return labels


def _midranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks; tied scores share the average of their positions."""
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.size, dtype=np.float64)
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auroc(labels, scores) -> float:
    """Probability a random positive outranks a random negative; ties count half.

    Computed through midranks, which is algebraically the normalized count
    over all positive/negative pairs.
    """
    labels = _check_binary_labels(labels)
    scores = _as_1d("scores", scores)
    if labels.shape != scores.shape:
        raise ConfigError(f"label and score lengths differ: {labels.size} vs {scores.size}")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        warnings.warn("auroc is undefined when only one class is present")
        return float("nan")
    ranks = _midranks(scores)
    pos_rank_sum = float(ranks[labels == 1.0].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def auprc(labels, scores) -> float:
    """Average precision: the step-wise sum of precision * recall increments.

    Thresholds sweep the distinct scores from high to low, so tied scores
    enter together.
    """
    labels = _check_binary_labels(labels)
    scores = _as_1d("scores", scores)
    if labels.shape != scores.shape:
        raise ConfigError(f"label and score lengths differ: {labels.size} vs {scores.size}")
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.size:
        warnings.warn("auprc is undefined when only one class is present")
        return float("nan")
    order = np.argsort(-scores, kind="mergesort")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    ap = 0.0
    tp = 0
    seen = 0
    i = 0
    while i < sorted_scores.size:
        j = i
        while j + 1 < sorted_scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        group_pos = int(sorted_labels[i:j + 1].sum())
        tp += group_pos
        seen = j + 1
        if group_pos:
            precision = tp / seen
            ap += precision * (group_pos / n_pos)
        i = j + 1
    return ap


def disparate_impact(predictions, groups, group_a, group_b,
                     threshold: float = 0.5, favorable: str = "below") -> float:
    """Symmetric ratio of favorable-outcome rates between two groups.

    ``favorable="below"`` counts predictions under the threshold (the
    low-risk class) as the favorable outcome; ``"above"`` flips it. The
    returned min(ra/rb, rb/ra) lies in (0, 1] where 1 is parity; it is NaN
    when a group is empty or neither group ever receives the favorable
    outcome, and 0.0 when exactly one of them never does.
    """
    if favorable not in ("below", "above"):
        raise ConfigError(f"favorable must be 'below' or 'above', got {favorable!r}")
    predictions = _as_1d("predictions", predictions)
    groups = np.asarray(groups)
    if groups.shape[0] != predictions.size:
        raise ConfigError("predictions and groups must align")
    rates = []
    for g in (group_a, group_b):
        mask = groups == g
        if not mask.any():
            warnings.warn(f"group {g!r} is empty; disparate impact undefined")
            return float("nan")
        wins = predictions[mask] < threshold if favorable == "below" \
            else predictions[mask] >= threshold
        rates.append(float(np.mean(wins)))
    ra, rb = rates
    if ra == 0.0 and rb == 0.0:
        warnings.warn("no favorable outcomes in either group; disparate impact undefined")
        return float("nan")
    if ra == 0.0 or rb == 0.0:
        return 0.0
    return min(ra / rb, rb / ra)


def regression_report(y, yhat, n_features: int) -> dict[str, float]:
    return {
        "r_squared": r_squared(y, yhat),
        "adjusted_r_squared": adjusted_r_squared(y, yhat, n_features),
        "r_absolute": r_absolute(y, yhat),
        "mse": float(np.mean((_as_1d("targets", y) - _as_1d("predictions", yhat)) ** 2)),
    }


def classification_report(labels, scores) -> dict[str, float]:
    labels_arr = _check_binary_labels(labels)
    scores_arr = _as_1d("scores", scores)
    eps = 1e-12
    clipped = np.clip(scores_arr, eps, 1.0 - eps)
    logloss = float(-np.mean(labels_arr * np.log(clipped)
                             + (1.0 - labels_arr) * np.log(1.0 - clipped)))
    return {
        "auroc": auroc(labels_arr, scores_arr),
        "auprc": auprc(labels_arr, scores_arr),
        "log_loss": logloss,
    }
