import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from honam import autodiff as ad
from honam import interactions as ik
from honam.exceptions import ConfigError, ShapeError


def test_hand_case_1_2_3():
    r = np.array([[1.0], [2.0], [3.0]])
    fi = ik.esp_sums(r, 3)
    np.testing.assert_allclose(fi[:, 0], [6.0, 11.0, 6.0])
    pfi = ik.power_sums(r, 3)
    np.testing.assert_allclose(pfi[:, 0], [6.0, 14.0, 36.0])


def test_hand_case_mixed_signs():
    # e_1..e_4 of {2, -1, 0.5, 3}, worked by hand.
    r = np.array([[2.0], [-1.0], [0.5], [3.0]])
    fi = ik.esp_sums(r, 4)
    np.testing.assert_allclose(fi[:, 0], [4.5, 3.0, -5.5, -3.0], atol=1e-12)


def test_second_order_identity():
    # fi_2 = (pfi_1^2 - pfi_2) / 2 for random vectors.
    rng = np.random.default_rng(0)
    r = rng.uniform(-2, 2, size=(5, 3))
    pfi = ik.power_sums(r, 2)
    np.testing.assert_allclose(ik.esp_sums(r, 2)[1],
                               0.5 * (pfi[0] ** 2 - pfi[1]), atol=1e-12)


def test_enumeration_hand_case():
    r = np.array([[1.0], [2.0], [3.0]])
    assert ik.enumerate_interactions(r, 2)[0] == pytest.approx(11.0)
    assert ik.enumerate_interactions(r, 3)[0] == pytest.approx(6.0)


def test_enumeration_full_product_at_t_equals_m():
    rng = np.random.default_rng(1)
    r = rng.uniform(-2, 2, size=(4, 6))
    np.testing.assert_allclose(ik.enumerate_interactions(r, 4), np.prod(r, axis=0),
                               atol=1e-12)


def test_recursion_matches_enumeration_randomized():
    rng = np.random.default_rng(2)
    for _ in range(100):
        m = int(rng.integers(1, 9))
        t = int(rng.integers(1, 6))
        k = int(rng.integers(1, 5))
        r = rng.uniform(-2, 2, size=(m, k))
        fi = ik.esp_sums(r, t)
        for order in range(1, t + 1):
            np.testing.assert_allclose(fi[order - 1], ik.enumerate_interactions(r, order),
                                       atol=1e-10)


def test_orders_above_m_are_exact_zero():
    rng = np.random.default_rng(3)
    r = rng.uniform(-2, 2, size=(3, 4))
    fi = ik.esp_sums(r, 6)
    for order in range(4, 7):
        assert np.all(fi[order - 1] == 0.0)
    assert np.all(ik.enumerate_interactions(r, 5) == 0.0)


def test_tensor_stack_matches_numpy_kernels():
    rng = np.random.default_rng(4)
    reprs_np = rng.uniform(-2, 2, size=(5, 7, 3))
    stack = ik.interaction_stack([ad.Tensor(r) for r in reprs_np], 4)
    fi_np = ik.esp_sums(reprs_np, 4)
    for order in range(1, 5):
        np.testing.assert_allclose(stack.fi[order - 1].values, fi_np[order - 1], atol=1e-12)
        np.testing.assert_allclose(stack.fi[order - 1].values,
                                   ik.enumerate_interactions(reprs_np, order), atol=1e-10)
    pfi_np = ik.power_sums(reprs_np, 4)
    for order in range(1, 5):
        np.testing.assert_allclose(stack.pfi[order - 1].values, pfi_np[order - 1], atol=1e-12)


def test_tensor_stack_zero_above_m_bit_exact():
    rng = np.random.default_rng(5)
    reprs = [ad.Tensor(rng.normal(size=(4, 2))) for _ in range(2)]
    stack = ik.interaction_stack(reprs, 4)
    assert np.all(stack.fi[2].values == 0.0)
    assert np.all(stack.fi[3].values == 0.0)


def test_concatenated_layout():
    rng = np.random.default_rng(6)
    reprs = [ad.Tensor(rng.normal(size=(3, 4))) for _ in range(5)]
    stack = ik.interaction_stack(reprs, 3)
    cat = stack.concatenated()
    assert cat.shape == (3, 12)
    np.testing.assert_array_equal(cat.values[:, 4:8], stack.fi[1].values)


def test_stack_gradients_against_finite_differences():
    rng = np.random.default_rng(7)
    base = [rng.uniform(-1.5, 1.5, size=(2, 3)) for _ in range(4)]
    params = [ad.Tensor(b, requires_grad=True) for b in base]
    head = rng.normal(size=(9, 1))

    def build():
        stack = ik.interaction_stack(params, 3)
        return ad.mean_all(ad.matmul(stack.concatenated(), ad.Tensor(head)))

    assert ad.grad_check(build, params) < 1e-6


@settings(deadline=None, max_examples=40)
@given(st.integers(2, 6), st.integers(1, 4), st.integers(0, 2 ** 31 - 1))
def test_first_slot_decomposition(m, t, seed):
    # e_t(r_0, rest) = r_0 * e_{t-1}(rest) + e_t(rest), with e_0 = 1.
    rng = np.random.default_rng(seed)
    r = rng.uniform(-2, 2, size=(m, 2))
    rest = r[1:]
    with_slot = ik.esp_sums(r, t)[t - 1]
    e_prev = np.ones(2) if t == 1 else ik.esp_sums(rest, t - 1)[t - 2]
    e_same = ik.esp_sums(rest, t)[t - 1]
    np.testing.assert_allclose(with_slot, r[0] * e_prev + e_same, atol=1e-9)


@settings(deadline=None, max_examples=40)
@given(st.integers(2, 7), st.integers(1, 4), st.randoms(use_true_random=False))
def test_permutation_symmetry(m, t, py_rng):
    rng = np.random.default_rng(23)
    r = rng.uniform(-2, 2, size=(m, 3))
    perm = list(range(m))
    py_rng.shuffle(perm)
    np.testing.assert_allclose(ik.esp_sums(r, t)[t - 1],
                               ik.esp_sums(r[perm], t)[t - 1], atol=1e-10)


def test_crossnet_order_one_is_projection():
    rng = np.random.default_rng(8)
    stack = ik.CrossNetStack(4, 3, order=1, rng=np.random.default_rng(9))
    x = ad.Tensor(rng.normal(size=(5, 4)))
    out = ik.crossnet_forward(x, stack)
    np.testing.assert_allclose(out.values, x.values @ stack.weights[0].values, atol=1e-12)


def test_crossnet_contains_self_powers():
    # One feature only: no pairwise interaction exists, yet the order-2 cross
    # term is x^2. The symmetric-sum kernel is exactly zero there.
    stack = ik.CrossNetStack(1, 1, order=2, rng=np.random.default_rng(10))
    stack.weights[0].values[...] = [[1.0]]
    stack.weights[1].values[...] = [[1.0]]
    x = ad.Tensor([[3.0]])
    assert ik.crossnet_forward(stack=stack, x=x).item() == pytest.approx(9.0)
    assert ik.esp_sums(np.array([[3.0]]), 2)[1, 0] == 0.0


def test_crossnet_identity_weights_expand_to_squares():
    # With k = m and identity weights, order 2 is elementwise x * x.
    m = 3
    stack = ik.CrossNetStack(m, m, order=2, rng=np.random.default_rng(11))
    stack.weights[0].values[...] = np.eye(m)
    stack.weights[1].values[...] = np.eye(m)
    x = np.array([[1.0, -2.0, 0.5]])
    out = ik.crossnet_forward(ad.Tensor(x), stack)
    np.testing.assert_allclose(out.values, x * x, atol=1e-12)


def test_crossnet_grad_check():
    rng = np.random.default_rng(12)
    stack = ik.CrossNetStack(3, 4, order=3, rng=np.random.default_rng(13))
    x = rng.normal(size=(6, 3))

    def build():
        return ad.mean_all(ik.crossnet_forward(ad.Tensor(x), stack))

    assert ad.grad_check(build, stack.parameters()) < 1e-5


def test_count_kernel_ops_enumeration_formula():
    assert ik.count_kernel_ops("enumeration", 20, 1, 5) == 62016
    assert ik.count_kernel_ops("enumeration", 6, 3, 2) == 15 * 1 * 3


def test_count_kernel_ops_order_one_is_free_for_both():
    assert ik.count_kernel_ops("enumeration", 50, 8, 1) == 0
    assert ik.count_kernel_ops("recursion", 50, 8, 1) == 0


def test_count_kernel_ops_recursion_linear_in_m():
    # m=20, t=5, k=1: 4*20 power-sum multiplies + 14 in the recurrence.
    assert ik.count_kernel_ops("recursion", 20, 1, 5) == 94
    assert ik.count_kernel_ops("recursion", 20, 1, 5) <= 5 * (5 + 20)
    doubled = ik.count_kernel_ops("recursion", 200, 4, 4)
    single = ik.count_kernel_ops("recursion", 100, 4, 4)
    assert doubled < 2.5 * single


def test_kernel_validation_errors():
    with pytest.raises(ConfigError):
        ik.count_kernel_ops("magic", 3, 1, 2)
    with pytest.raises(ConfigError):
        ik.esp_sums(np.ones((2, 1)), 0)
    with pytest.raises(ShapeError):
        ik.interaction_stack([], 2)
    with pytest.raises(ShapeError):
        ik.interaction_stack([ad.Tensor(np.ones((2, 2))), ad.Tensor(np.ones((2, 3)))], 2)
    stack = ik.CrossNetStack(2, 2, order=2, rng=np.random.default_rng(14))
    with pytest.raises(ConfigError):
        ik.crossnet_forward(ad.Tensor(np.ones((1, 2))), stack, 3)
    with pytest.raises(ShapeError):
        ik.crossnet_forward(ad.Tensor(np.ones((1, 3))), stack)
