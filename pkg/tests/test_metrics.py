import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from honam import metrics as mx
from honam.exceptions import ConfigError


def auroc_all_pairs(labels, scores):
    """Literal pairwise counting: wins 1, ties 0.5, losses 0."""
    labels = np.asarray(labels, dtype=float)
    scores = np.asarray(scores, dtype=float)
    pos = scores[labels == 1.0]
    neg = scores[labels == 0.0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (pos.size * neg.size)


def test_r_squared_hand_cases():
    y = [1.0, 2.0, 3.0]
    assert mx.r_squared(y, y) == pytest.approx(1.0)
    assert mx.r_squared(y, [2.0, 2.0, 2.0]) == pytest.approx(0.0)
    assert mx.r_squared([0.0, 2.0], [2.0, 0.0]) == pytest.approx(-3.0)


def test_r_squared_sentinel_for_constant_target():
    with pytest.warns(UserWarning):
        assert np.isnan(mx.r_squared([2.0, 2.0, 2.0], [1.0, 2.0, 3.0]))


def test_r_squared_needs_two_samples():
    with pytest.raises(ConfigError):
        mx.r_squared([1.0], [1.0])


def test_adjusted_r_squared_hand_case():
    y = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    yhat = y + np.array([0.1, -0.1, 0.1, -0.1, 0.1, -0.1])
    r2 = mx.r_squared(y, yhat)
    expected = 1.0 - (1.0 - r2) * 5 / (6 - 2 - 1)
    assert mx.adjusted_r_squared(y, yhat, 2) == pytest.approx(expected)
    assert mx.adjusted_r_squared(y, yhat, 2) < r2


def test_adjusted_r_squared_guards_degrees_of_freedom():
    with pytest.raises(ConfigError):
        mx.adjusted_r_squared([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], 2)


def test_r_absolute_exact_endpoints():
    y = np.array([1.0, 4.0, -2.0, 3.0])
    assert mx.r_absolute(y, y) == 1.0
    assert mx.r_absolute(y, np.full(4, y.mean())) == 0.0


def test_r_absolute_less_than_one_for_imperfect_fit():
    y = np.array([0.0, 1.0, 2.0])
    assert mx.r_absolute(y, [0.1, 1.0, 1.9]) == pytest.approx(1.0 - 0.2 / 2.0)


def test_auroc_hand_cases():
    assert mx.auroc([1, 0], [0.9, 0.1]) == 1.0
    assert mx.auroc([1, 0], [0.1, 0.9]) == 0.0
    assert mx.auroc([1, 0, 1], [0.9, 0.8, 0.7]) == pytest.approx(0.5)
    assert mx.auroc([1, 0, 1, 0], [0.5, 0.5, 0.5, 0.5]) == pytest.approx(0.5)


def test_auroc_matches_all_pairs_on_small_randomized_sets():
    rng = np.random.default_rng(0)
    for _ in range(300):
        n = int(rng.integers(2, 11))
        labels = rng.integers(0, 2, size=n).astype(float)
        if labels.sum() in (0, n):
            labels[0] = 1.0 - labels[0]
        # Coarse scores force plenty of ties.
        scores = np.round(rng.uniform(size=n), 1)
        assert mx.auroc(labels, scores) == pytest.approx(
            auroc_all_pairs(labels, scores), abs=1e-12)


@settings(deadline=None, max_examples=60)
@given(st.integers(0, 2 ** 31 - 1), st.floats(0.5, 3.0), st.floats(-2.0, 2.0))
def test_auroc_invariant_under_monotone_transform(seed, scale_factor, shift):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=20).astype(float)
    if labels.sum() in (0, 20):
        labels[0] = 1.0 - labels[0]
    scores = rng.normal(size=20)
    base = mx.auroc(labels, scores)
    assert mx.auroc(labels, scores * scale_factor + shift) == pytest.approx(base)


def test_auroc_single_class_sentinel():
    with pytest.warns(UserWarning):
        assert np.isnan(mx.auroc([1, 1, 1], [0.1, 0.5, 0.9]))


def test_auprc_perfect_and_uninformative():
    assert mx.auprc([1, 1, 0, 0], [0.9, 0.8, 0.2, 0.1]) == pytest.approx(1.0)
    # All scores tied: one step at precision = positive rate.
    assert mx.auprc([1, 0, 0, 0], [0.5, 0.5, 0.5, 0.5]) == pytest.approx(0.25)


def test_auprc_hand_case():
    # Descending scores, labels 1,0,1: steps at ranks 1 (P=1) and 3 (P=2/3).
    value = mx.auprc([1, 0, 1], [0.9, 0.8, 0.7])
    assert value == pytest.approx((1.0 + 2.0 / 3.0) / 2.0)


def test_disparate_impact_hand_case():
    preds = np.array([0.0, 0.0, 1.0, 1.0, 0.0, 1.0])
    groups = np.array(["a", "a", "a", "b", "b", "b"])
    # Favorable = prediction below 0.5. Group a: 2/3, group b: 1/3.
    di = mx.disparate_impact(preds, groups, "a", "b")
    assert di == pytest.approx(0.5)
    # Symmetric in the group order.
    assert mx.disparate_impact(preds, groups, "b", "a") == pytest.approx(di)


def test_disparate_impact_parity_is_one():
    preds = np.array([0.0, 1.0, 0.0, 1.0])
    groups = np.array(["a", "a", "b", "b"])
    assert mx.disparate_impact(preds, groups, "a", "b") == pytest.approx(1.0)


def test_disparate_impact_favorable_above():
    preds = np.array([1.0, 1.0, 0.0, 0.0, 1.0, 0.0])
    groups = np.array(["a", "a", "a", "b", "b", "b"])
    below = mx.disparate_impact(preds, groups, "a", "b", favorable="below")
    above = mx.disparate_impact(preds, groups, "a", "b", favorable="above")
    assert below == pytest.approx(0.5)
    assert above == pytest.approx(0.5)


def test_disparate_impact_sentinels():
    preds = np.array([1.0, 1.0, 1.0, 1.0])
    groups = np.array(["a", "a", "b", "b"])
    with pytest.warns(UserWarning):
        assert np.isnan(mx.disparate_impact(preds, groups, "a", "b"))
    with pytest.warns(UserWarning):
        assert np.isnan(mx.disparate_impact(preds, groups, "a", "zzz"))
    mixed = np.array([0.0, 1.0, 1.0, 1.0])
    assert mx.disparate_impact(mixed, groups, "a", "b") == 0.0


def test_disparate_impact_validation():
    with pytest.raises(ConfigError):
        mx.disparate_impact([0.0, 1.0], ["a", "a"], "a", "b", favorable="sideways")


def test_reports_have_expected_keys():
    rng = np.random.default_rng(1)
    y = rng.normal(size=50)
    reg = mx.regression_report(y, y + 0.1 * rng.normal(size=50), n_features=3)
    assert set(reg) == {"r_squared", "adjusted_r_squared", "r_absolute", "mse"}
    labels = rng.integers(0, 2, size=50).astype(float)
    scores = np.clip(rng.uniform(size=50), 0.01, 0.99)
    cls = mx.classification_report(labels, scores)
    assert set(cls) == {"auroc", "auprc", "log_loss"}
    assert all(np.isfinite(v) for v in cls.values())


def test_label_validation():
    with pytest.raises(ConfigError):
        mx.auroc([0, 2], [0.1, 0.2])
    with pytest.raises(ConfigError):
        mx.auroc([0, 1], [0.1, np.nan])
