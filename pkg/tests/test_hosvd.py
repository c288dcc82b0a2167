import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ltcn.hosvd import (
    NOISE_RTOL,
    RankOneTerm,
    hosvd,
    rank_one_tensor,
    reconstruct,
    spectrum,
    svd,
    truncate,
)
from ltcn.tensor import frobenius, mode_product, outer_product, tensorize, unfold


def random_tensor(seed, l, K):
    return np.random.default_rng(seed).standard_normal((l,) * K)


@pytest.mark.parametrize("shape", [(1, 1), (3, 3), (5, 2), (2, 7), (6, 6), (4, 9)])
def test_svd_reconstructs_and_is_orthogonal(shape):
    A = np.random.default_rng(sum(shape)).standard_normal(shape)
    U, S, V = svd(A)
    m, n = shape
    k = min(m, n)
    # thin factors; U is square whenever m <= n
    assert U.shape == (m, k) and S.shape == (k,) and V.shape == (n, k)
    np.testing.assert_allclose(U * S @ V.T, A, atol=1e-12)
    np.testing.assert_allclose(U.T @ U, np.eye(k), atol=1e-12)
    np.testing.assert_allclose(V.T @ V, np.eye(k), atol=1e-12)
    assert np.all(np.diff(S) <= 0) and np.all(S >= 0)


@pytest.mark.parametrize("seed", range(8))
def test_svd_values_match_numpy_oracle(seed):
    A = np.random.default_rng(seed).standard_normal((4, 8))
    np.testing.assert_allclose(svd(A).S, np.linalg.svd(A, compute_uv=False), rtol=1e-12)


def test_svd_values_match_gram_eigenvalues():
    A = np.random.default_rng(11).standard_normal((3, 9))
    eig = np.sort(np.linalg.eigvalsh(A @ A.T))[::-1]
    np.testing.assert_allclose(svd(A).S ** 2, eig, rtol=1e-11)


def test_svd_rank_deficient_completes_basis():
    A = np.outer([1.0, 2.0, 2.0], [1.0, 0.0, 1.0, 0.0])
    U, S, V = svd(A)
    np.testing.assert_allclose(U.T @ U, np.eye(3), atol=1e-14)
    np.testing.assert_allclose(S, [3 * 2 ** 0.5, 0, 0], atol=1e-14)
    np.testing.assert_allclose(U[:, 0], np.array([1, 2, 2]) / 3, atol=1e-14)


def test_svd_zero_matrix():
    for shape in [(3, 2), (2, 3)]:
        U, S, V = svd(np.zeros(shape))
        np.testing.assert_array_equal(S, 0.0)
        np.testing.assert_allclose(U.T @ U, np.eye(2), atol=1e-15)
        np.testing.assert_allclose(V.T @ V, np.eye(2), atol=1e-15)


def test_svd_sign_rule():
    U, _, _ = svd(np.random.default_rng(3).standard_normal((4, 4)))
    for col in U.T:
        assert col[np.argmax(np.abs(col))] > 0


def test_svd_rejects_non_finite():
    with pytest.raises(ValueError):
        svd(np.array([[1.0, np.inf]]))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), l=st.integers(2, 3), K=st.integers(2, 4))
def test_hosvd_contract(seed, l, K):
    A = random_tensor(seed, l, K)
    h = hosvd(A)
    nrm = frobenius(A)
    assert frobenius(reconstruct(h) - A) <= 1e-10 * nrm
    assert frobenius(h.core) == pytest.approx(nrm, rel=1e-12)
    for k, U in enumerate(h.factors, start=1):
        np.testing.assert_allclose(U.T @ U, np.eye(l), atol=1e-12)
        # all-orthogonality: slices along each mode are mutually orthogonal
        G = unfold(h.core, k) @ unfold(h.core, k).T
        assert np.max(np.abs(G - np.diag(np.diag(G)))) <= 1e-10 * nrm ** 2
        assert np.all(np.diff(np.diag(G)) <= 1e-10 * nrm ** 2)


def test_core_is_multilinear_projection():
    A = random_tensor(1, 3, 3)
    h = hosvd(A)
    core = A
    for k, U in enumerate(h.factors, start=1):
        core = mode_product(core, U.T, k)
    np.testing.assert_allclose(h.core, core, atol=1e-14)


def test_rank_one_tensor_has_one_nonzero_core_entry():
    u, v, w = np.array([1.0, 1.0]), np.array([1.0, -2.0]), np.array([0.5, 0.5])
    A = outer_product([w, v, u])
    sp = spectrum(hosvd(A))
    assert sp.magnitudes[0] == pytest.approx(frobenius(A), rel=1e-14)
    assert np.all(sp.magnitudes[1:] == 0.0)


def test_spectrum_order_and_tails():
    A = random_tensor(6, 2, 3)
    sp = spectrum(hosvd(A))
    assert len(sp) == 8
    assert np.all(np.diff(sp.magnitudes) <= 0)
    t = sp.tails()
    assert t[0] == pytest.approx(frobenius(A) ** 2, rel=1e-12)
    assert t[-1] == 0.0
    assert sp.tail(3) == pytest.approx(np.sum(sp.magnitudes[2:] ** 2))
    assert sp.tail(100) == 0.0
    with pytest.raises(ValueError):
        sp.tail(0)


def test_spectrum_ties_are_lexicographic():
    sp = spectrum(hosvd(np.zeros((2, 2))))
    assert [tuple(i) for i in sp.indices] == [(0, 0), (0, 1), (1, 0), (1, 1)]
    rows = list(sp.rows())
    assert rows[1] == (2, 0.0, 0.0, "0;1")


def test_noise_snapping_threshold():
    A = np.diag([1.0, 1e-17])
    sp = spectrum(hosvd(A))
    assert sp.magnitudes[1] == 0.0
    sp2 = spectrum(hosvd(np.diag([1.0, 1e-10])))
    assert sp2.magnitudes[1] == pytest.approx(1e-10)
    assert NOISE_RTOL < 1e-13


def _brute_best(core, M):
    # best M-term subset of core entries in the fixed HOSVD basis
    sq = np.sort(core.ravel() ** 2)
    return float(np.sum(sq[:-M])) if M < sq.size else 0.0


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), l=st.integers(2, 3), K=st.integers(2, 4), M=st.integers(1, 9))
def test_truncation_error_equals_dropped_energy(seed, l, K, M):
    A = random_tensor(seed, l, K)
    h = hosvd(A)
    terms, approx = truncate(h, M)
    err = frobenius(A - approx) ** 2
    dropped = spectrum(h).tail(M + 1)
    assert err == pytest.approx(dropped, rel=1e-10, abs=1e-12 * frobenius(A) ** 2)
    assert dropped == pytest.approx(_brute_best(h.core, M), rel=1e-10, abs=1e-24)
    assert len(terms) == min(M, int(np.count_nonzero(spectrum(h).magnitudes)))


def test_truncation_exhaustive_subsets():
    A = random_tensor(2, 2, 2)
    h = hosvd(A)
    for M in range(1, 5):
        best = min(
            sum(h.core[i] ** 2 for i in itertools.product(range(2), repeat=2) if i not in keep)
            for keep in itertools.combinations(list(itertools.product(range(2), repeat=2)), M))
        assert spectrum(h).tail(M + 1) == pytest.approx(best, abs=1e-14)


def test_truncate_terms_sum_to_approx():
    h = hosvd(random_tensor(8, 3, 3))
    terms, approx = truncate(h, 5)
    np.testing.assert_allclose(sum(rank_one_tensor(t) for t in terms), approx, atol=1e-14)
    for t in terms:
        assert isinstance(t, RankOneTerm) and len(t.factors) == 3


def test_truncate_zero_tensor_keeps_nothing():
    terms, approx = truncate(hosvd(np.zeros((2, 2, 2))), 3)
    assert terms == [] and not np.any(approx)
    with pytest.raises(ValueError):
        truncate(hosvd(np.zeros((2, 2))), 0)


def test_geometric_sequence_is_rank_one():
    A = tensorize(0.5 ** np.arange(8), 2, 3)
    sp = spectrum(hosvd(A))
    assert sp.tail(2) <= 1e-18
    assert sp.tail(1) == pytest.approx((1 - 0.25 ** 8) / 0.75, rel=1e-14)


def test_svd_small_examples():
    U, S, V = svd(np.eye(2))
    np.testing.assert_array_equal(S, [1.0, 1.0])
    U, S, V = svd(np.diag([3.0, 1.0]))
    np.testing.assert_allclose(S, [3.0, 1.0], rtol=1e-15)
    np.testing.assert_allclose(np.abs(U), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(np.abs(V), np.eye(2), atol=1e-15)


def test_full_truncation_reconstructs():
    h = hosvd(random_tensor(12, 2, 4))
    _, approx = truncate(h, 16)
    np.testing.assert_allclose(approx, reconstruct(h), atol=1e-14)
