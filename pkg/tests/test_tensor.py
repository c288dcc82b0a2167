import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ltcn.tensor import (
    detensorize,
    fold,
    frobenius,
    mode_product,
    outer_product,
    tensor_geometry,
    tensorize,
    unfold,
)

geometry = st.tuples(st.integers(2, 3), st.integers(1, 4))


def test_tensorize_digit_order():
    A = tensorize(np.arange(8.0), 2, 3)
    # t = a1 + 2 a2 + 4 a3
    for a1 in range(2):
        for a2 in range(2):
            for a3 in range(2):
                assert A[a1, a2, a3] == a1 + 2 * a2 + 4 * a3


def test_tensorize_pads_and_rejects():
    A = tensorize([1.0, 2.0], 3, 2)
    assert A.shape == (3, 3) and A[1, 0] == 2.0 and frobenius(A) == pytest.approx(5 ** 0.5)
    with pytest.raises(ValueError):
        tensorize(np.ones(9), 2, 3)
    with pytest.raises(ValueError):
        tensorize([1.0], 1, 3)
    with pytest.raises(ValueError):
        tensorize([1.0], 2, 0)


@settings(max_examples=30, deadline=None)
@given(geo=geometry, seed=st.integers(0, 1000))
def test_tensorize_round_trip(geo, seed):
    l, K = geo
    rho = np.random.default_rng(seed).standard_normal(l ** K)
    np.testing.assert_array_equal(detensorize(tensorize(rho, l, K)), rho)
    assert tensor_geometry(tensorize(rho, l, K)) == (l, K)


def test_unfold_column_order():
    A = tensorize(np.arange(27.0), 3, 3)
    U = unfold(A, 2)
    # column index a1 + 3 a3
    for a1 in range(3):
        for a2 in range(3):
            for a3 in range(3):
                assert U[a2, a1 + 3 * a3] == A[a1, a2, a3]


@settings(max_examples=30, deadline=None)
@given(geo=geometry, seed=st.integers(0, 1000), data=st.data())
def test_fold_inverts_unfold(geo, seed, data):
    l, K = geo
    mode = data.draw(st.integers(1, K))
    A = np.random.default_rng(seed).standard_normal((l,) * K)
    assert unfold(A, mode).shape == (l, l ** (K - 1))
    np.testing.assert_array_equal(fold(unfold(A, mode), mode, l, K), A)


@settings(max_examples=30, deadline=None)
@given(geo=geometry, seed=st.integers(0, 1000), data=st.data())
def test_mode_product_matches_einsum(geo, seed, data):
    l, K = geo
    mode = data.draw(st.integers(1, K))
    rng = np.random.default_rng(seed)
    A, U = rng.standard_normal((l,) * K), rng.standard_normal((l, l))
    want = np.moveaxis(np.tensordot(U, A, axes=([1], [mode - 1])), 0, mode - 1)
    np.testing.assert_allclose(mode_product(A, U, mode), want, atol=1e-12)


def test_mode_products_commute_across_modes():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((2, 2, 2))
    U, V = rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
    np.testing.assert_allclose(mode_product(mode_product(A, U, 1), V, 3),
                               mode_product(mode_product(A, V, 3), U, 1), atol=1e-13)


def test_mode_product_rejects_bad_shapes():
    A = np.zeros((2, 2))
    with pytest.raises(ValueError):
        mode_product(A, np.eye(3), 1)
    with pytest.raises(ValueError):
        unfold(A, 3)


def test_outer_product_layer_order():
    w0, w1 = np.array([1.0, 2.0]), np.array([3.0, 5.0])
    A = outer_product([w1, w0])
    # least-significant digit belongs to the innermost layer
    np.testing.assert_array_equal(detensorize(A), [3, 6, 5, 10])
    assert A[1, 0] == w0[1] * w1[0]


def test_outer_product_rejects_mismatch():
    with pytest.raises(ValueError):
        outer_product([[1.0, 2.0], [1.0]])
    with pytest.raises(ValueError):
        outer_product([])
