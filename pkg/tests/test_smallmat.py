import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import durand_kerner, match_roots
from rootfringe.errors import DegreeZero, NonFiniteInput
from rootfringe.smallmat import companion_roots, root_residuals, svd


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _check_svd(m, tol=1e-10):
    r = svd(m)
    n = m.shape[0]
    eye = np.eye(n)
    scale = max(np.linalg.norm(m), 1e-300)
    assert np.linalg.norm(r.U @ np.diag(r.S) @ r.Vh - m) / scale < tol
    assert np.abs(r.U.conj().T @ r.U - eye).max() < tol
    assert np.abs(r.Vh @ r.Vh.conj().T - eye).max() < tol
    assert np.all(np.diff(r.S) <= 0) and np.all(r.S >= 0)
    return r


def test_identity():
    r = _check_svd(np.eye(3, dtype=complex))
    np.testing.assert_allclose(r.S, [1, 1, 1], atol=1e-14)
    uv = r.U @ r.Vh
    np.testing.assert_allclose(uv @ uv.conj().T, np.eye(3), atol=1e-12)


def test_rank_one():
    rng = np.random.default_rng(0)
    a = crandn(rng, 3)
    b = crandn(rng, 3)
    a /= np.linalg.norm(a)
    b /= np.linalg.norm(b)
    r = _check_svd(np.outer(a, b.conj()))
    np.testing.assert_allclose(r.S, [1, 0, 0], atol=1e-12)


def test_random_5x5_eigen_relation():
    rng = np.random.default_rng(1)
    m = crandn(rng, 5, 5)
    r = _check_svd(m)
    gram = m @ m.conj().T
    v = r.Vh.conj().T
    for i in range(5):
        assert np.linalg.norm(gram @ r.U[:, i] - r.S[i] ** 2 * r.U[:, i]) < 1e-10 * r.S[0] ** 2
        assert np.linalg.norm(m.conj().T @ m @ v[:, i] - r.S[i] ** 2 * v[:, i]) < 1e-10 * r.S[0] ** 2


def test_singular_values_match_lapack():
    rng = np.random.default_rng(2)
    for n in (2, 7, 17, 33):
        m = crandn(rng, n, n)
        np.testing.assert_allclose(svd(m).S, np.linalg.svd(m, compute_uv=False), rtol=1e-12)


def test_hermitian_psd_eigenvectors():
    rng = np.random.default_rng(5)
    b = crandn(rng, 6, 6)
    h = b @ b.conj().T
    r = svd(h)
    for i in range(6):
        assert np.linalg.norm(h @ r.U[:, i] - r.S[i] * r.U[:, i]) < 1e-9 * r.S[0]


def test_gauge_largest_component_real_positive():
    rng = np.random.default_rng(6)
    u = svd(crandn(rng, 5, 5)).U
    for j in range(5):
        k = np.argmax(np.abs(u[:, j]))
        assert u[k, j].real > 0 and u[k, j].imag == 0.0


def test_svd_deterministic():
    rng = np.random.default_rng(7)
    m = crandn(rng, 9, 9)
    a, b = svd(m), svd(m.copy())
    assert a.U.tobytes() == b.U.tobytes() and a.S.tobytes() == b.S.tobytes()


def test_svd_rejects_bad_input():
    with pytest.raises(NonFiniteInput):
        svd(np.array([[1, np.nan], [0, 1]], complex))
    with pytest.raises(ValueError):
        svd(np.ones((2, 3)))
    with pytest.raises(ValueError):
        svd(np.ones((1, 1)))


@pytest.mark.parametrize("method", ["qr", "aberth"])
def test_z_squared_minus_one(method):
    r = np.sort_complex(companion_roots([-1, 0, 1], method=method))
    np.testing.assert_allclose(r, [-1, 1], atol=1e-14)


@pytest.mark.parametrize("method", ["qr", "aberth"])
def test_known_root_pair(method):
    z1, z2 = np.exp(0.5j), 0.8 * np.exp(0.5j)
    coeffs = np.polynomial.polynomial.polyfromroots([z1, z2])
    r = companion_roots(coeffs, method=method)
    assert match_roots(r, [z1, z2]) < 1e-8


@pytest.mark.parametrize("method", ["qr", "aberth"])
def test_random_degree_8_residuals(method):
    rng = np.random.default_rng(8)
    c = crandn(rng, 9)
    r = companion_roots(c, method=method)
    assert r.size == 8
    assert root_residuals(c, r).max() < 1e-8


def test_trailing_zeros_trimmed_and_zero_roots():
    r = companion_roots([0, 0, 2, 1, 0, 0])
    assert r.size == 3
    assert np.count_nonzero(np.abs(r) == 0) == 2
    assert match_roots(r, [0, 0, -2]) < 1e-12


def test_degree_zero():
    with pytest.raises(DegreeZero):
        companion_roots([3, 0, 0])
    with pytest.raises(DegreeZero):
        companion_roots([0])


def test_nonfinite_coefficients():
    with pytest.raises(NonFiniteInput):
        companion_roots([1, np.inf, 1])


def test_cross_check_with_durand_kerner():
    rng = np.random.default_rng(9)
    for d in range(1, 17):
        c = crandn(rng, d + 1)
        r = companion_roots(c)
        ref = durand_kerner(c)
        assert match_roots(r, ref) < 1e-7 * max(1.0, np.abs(ref).max())


@settings(max_examples=50, deadline=None)
@given(
    st.integers(1, 16),
    st.integers(0, 2 ** 32 - 1),
    st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False),
)
def test_roots_invariant_under_scaling(d, seed, k):
    rng = np.random.default_rng(seed)
    c = crandn(rng, d + 1)
    a = companion_roots(c)
    b = companion_roots(k * c)
    assert a.size == b.size == d
    assert match_roots(a, b) < 1e-8 * max(1.0, np.abs(a).max())


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 20), st.integers(0, 2 ** 32 - 1))
def test_svd_property(n, seed):
    _check_svd(crandn(np.random.default_rng(seed), n, n))
