import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtlib.errors import NoConvergence, ShapeMismatch, Singular, StructureViolation, ZeroPivot
from qtlib.qmat import (
    QMatrix, adjoint_extract, complex_adjoint, is_hermitian, is_psd, is_unitary, mat_ct, minv,
    mlu, mplu, mpolar_left, mpolar_right, msolve, msvd,
)
from qtlib.quat import Quaternion, qinv, qnorm

from conftest import naive_matmul, qlist_close, to_qlist

SHAPES = [(1, 1), (1, 3), (3, 1), (4, 3), (3, 4), (5, 5), (6, 2)]


def herm_sqrt(M):
    """Principal square root of a Hermitian PSD complex matrix via eigh."""
    w, V = np.linalg.eigh((M + M.conj().T) / 2)
    return (V * np.sqrt(np.clip(w, 0, None))) @ V.conj().T


@pytest.mark.parametrize("m,k,n", [(1, 1, 1), (2, 3, 4), (4, 2, 3), (3, 3, 3)])
def test_mat_mul_matches_scalar_oracle(rng, m, k, n):
    A, B = QMatrix.random(m, k, rng), QMatrix.random(k, n, rng)
    assert qlist_close(to_qlist(A @ B), naive_matmul(to_qlist(A), to_qlist(B)), 1e-12)


def test_ct_entrywise(rng):
    A = QMatrix.random(3, 4, rng)
    H = mat_ct(A)
    assert H.shape == (4, 3)
    for i in range(4):
        for j in range(3):
            assert H[i, j].isclose(A[j, i].conj(), 1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_adjoint_is_multiplicative(m, k, n, seed):
    rng = np.random.default_rng(seed)
    A, B = QMatrix.random(m, k, rng), QMatrix.random(k, n, rng)
    np.testing.assert_allclose(complex_adjoint(A @ B), complex_adjoint(A) @ complex_adjoint(B), atol=1e-12)
    np.testing.assert_allclose(complex_adjoint(A.H), complex_adjoint(A).conj().T, atol=0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_mul_associative(n, seed):
    rng = np.random.default_rng(seed)
    A, B, C = (QMatrix.random(n, n, rng) for _ in range(3))
    assert ((A @ B) @ C - A @ (B @ C)).norm() <= 1e-13 * A.norm() * B.norm() * C.norm()


def test_adjoint_extract(rng):
    A = QMatrix.random(3, 2, rng)
    M = complex_adjoint(A)
    B = adjoint_extract(M)
    assert np.array_equal(B.D, A.D) and np.array_equal(B.C, A.C)
    M[0, 3] += 1e-3
    with pytest.raises(StructureViolation):
        adjoint_extract(M)


def test_norm_is_quaternion_frobenius(rng):
    A = QMatrix.random(3, 3, rng)
    ref = np.sqrt(sum(qnorm(q) ** 2 for row in to_qlist(A) for q in row))
    assert np.isclose(A.norm(), ref, rtol=1e-14)


def test_indexing_and_components(rng):
    q = Quaternion(1, -2, 3, -4)
    A = QMatrix.from_quaternions([[q, Quaternion()], [Quaternion(1), q.conj()]])
    assert A[0, 0] == q and A[1, 1] == q.conj()
    w, x, y, z = A.components()
    assert (w[0, 0], x[0, 0], y[0, 0], z[0, 0]) == (1, -2, 3, -4)
    with pytest.raises(TypeError):
        A * 1j


# -- inverse and solve --------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 5, 12])
def test_minv(rng, n):
    A = QMatrix.random(n, n, rng)
    X = minv(A)
    I = QMatrix.identity(n)
    assert (A @ X - I).norm() <= 1e-12 * n and (X @ A - I).norm() <= 1e-12 * n
    ref = np.linalg.inv(complex_adjoint(A))
    np.testing.assert_allclose(complex_adjoint(X), ref, atol=1e-10)


def test_minv_scalar_oracle(rng):
    A = QMatrix.random(1, 1, rng)
    assert minv(A)[0, 0].isclose(qinv(A[0, 0]), 1e-14)


def test_minv_errors(rng):
    u = QMatrix.random(3, 1, rng)
    with pytest.raises(Singular):
        minv(u @ u.H)
    with pytest.raises(ShapeMismatch):
        minv(QMatrix.random(2, 3, rng))


def test_msolve(rng):
    A, B = QMatrix.random(4, 4, rng), QMatrix.random(4, 2, rng)
    X = msolve(A, B)
    assert (A @ X - B).norm() <= 1e-12 * B.norm()


# -- SVD ----------------------------------------------------------------------

@pytest.mark.parametrize("shape", SHAPES)
def test_msvd_against_adjoint_oracle(rng, shape):
    A = QMatrix.random(*shape, rng)
    sv = msvd(A)
    m, n = shape
    assert sv.U.shape == (m, m) and sv.V.shape == (n, n) and sv.S.shape == (min(m, n),)
    ref = np.linalg.svd(complex_adjoint(A), compute_uv=False)[::2][: min(m, n)]
    np.testing.assert_allclose(sv.S, ref, rtol=1e-12, atol=1e-13 * ref[0])
    assert np.all(np.diff(sv.S) <= 0)
    assert (sv.reconstruct() - A).norm() <= 1e-12 * A.norm()
    assert is_unitary(sv.U, 1e-12) and is_unitary(sv.V, 1e-12)


def test_msvd_phase_convention(rng):
    sv = msvd(QMatrix.random(4, 3, rng))
    for k in range(4):
        d, c = sv.U.D[:, k], sv.U.C[:, k]
        i = np.flatnonzero(np.abs(d) + np.abs(c) > 1e-8)[0]
        assert abs(c[i]) < 1e-14 and abs(d[i].imag) < 1e-14 and d[i].real > 0


def test_msvd_rank_deficient_and_zero(rng):
    u, v = QMatrix.random(4, 1, rng), QMatrix.random(3, 1, rng)
    sv = msvd(u @ v.H)
    assert sv.S[0] > 1 and np.all(sv.S[1:] <= 1e-13 * sv.S[0])
    assert is_unitary(sv.U, 1e-12) and is_unitary(sv.V, 1e-12)
    z = msvd(QMatrix.zeros(3, 2))
    assert np.all(z.S == 0) and is_unitary(z.U, 0) and is_unitary(z.V, 0)


def test_msvd_deterministic(rng):
    A = QMatrix.random(5, 4, rng)
    a, b = msvd(A), msvd(A)
    assert np.array_equal(a.U.D, b.U.D) and np.array_equal(a.V.C, b.V.C) and np.array_equal(a.S, b.S)


def test_msvd_no_convergence(rng):
    with pytest.raises(NoConvergence):
        msvd(QMatrix.random(6, 6, rng), max_sweeps=1)


# -- polar --------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 3, 5])
def test_polar_right_against_sqrtm_oracle(rng, n):
    A = QMatrix.random(n, n, rng)
    p = mpolar_right(A)
    assert (p.reconstruct() - A).norm() <= 1e-12 * A.norm()
    assert is_unitary(p.U, 1e-12) and is_psd(p.H, 1e-12)
    M = complex_adjoint(A)
    np.testing.assert_allclose(complex_adjoint(p.H), herm_sqrt(M.conj().T @ M), atol=1e-10 * A.norm())


def test_polar_left_against_sqrtm_oracle(rng):
    A = QMatrix.random(4, 4, rng)
    p = mpolar_left(A)
    assert (p.H @ p.U - A).norm() <= 1e-12 * A.norm()
    M = complex_adjoint(A)
    np.testing.assert_allclose(complex_adjoint(p.H), herm_sqrt(M @ M.conj().T), atol=1e-10 * A.norm())
    np.testing.assert_allclose(complex_adjoint(p.U), complex_adjoint(mpolar_right(A).U), atol=1e-10)


def test_polar_singular_keeps_unitary(rng):
    u = QMatrix.random(3, 1, rng)
    p = mpolar_right(u @ u.H)
    assert is_unitary(p.U, 1e-12) and is_psd(p.H, 1e-12)
    assert (p.reconstruct() - u @ u.H).norm() <= 1e-12 * (u @ u.H).norm()


# -- LU -----------------------------------------------------------------------

def naive_plu(A):
    """Textbook Gaussian elimination on Quaternion objects, max-modulus pivoting."""
    n = len(A)
    W = [row[:] for row in A]
    perm = list(range(n))
    L = [[Quaternion(1.0 if i == j else 0.0) for j in range(n)] for i in range(n)]
    for k in range(n):
        p = max(range(k, n), key=lambda i: (qnorm(W[i][k]), -i))
        W[k], W[p] = W[p], W[k]
        perm[k], perm[p] = perm[p], perm[k]
        for j in range(k):
            L[k][j], L[p][j] = L[p][j], L[k][j]
        piv_inv = qinv(W[k][k])
        for i in range(k + 1, n):
            l = W[i][k] * piv_inv
            L[i][k] = l
            for j in range(k, n):
                W[i][j] = W[i][j] - l * W[k][j]
    return perm, L, W


@pytest.mark.parametrize("n", [1, 2, 4, 6])
def test_mplu_matches_scalar_oracle(rng, n):
    A = QMatrix.random(n, n, rng)
    f = mplu(A)
    perm, L, U = naive_plu(to_qlist(A))
    assert list(f.perm) == perm
    assert qlist_close(to_qlist(f.L), L, 1e-11)
    assert qlist_close([[U[i][j] if j >= i else Quaternion() for j in range(n)] for i in range(n)],
                       to_qlist(f.U), 1e-11)
    PA = QMatrix.from_complex(f.P) @ A
    assert (PA - f.L @ f.U).norm() <= 1e-13 * A.norm()


def test_mlu_and_zero_pivot(rng):
    A = QMatrix.random(4, 4, rng)
    A = A + QMatrix.identity(4) * 10.0
    L, U = mlu(A)
    assert (L @ U - A).norm() <= 1e-13 * A.norm()
    assert np.allclose(np.tril(U.D, -1), 0) and np.allclose(np.triu(L.D, 1), 0)
    swap = QMatrix.from_complex([[0, 1], [1, 0]])
    with pytest.raises(ZeroPivot) as e:
        mlu(swap)
    assert e.value.step == 1
    f = mplu(swap)
    assert list(f.perm) == [1, 0]


def test_mplu_singular_step(rng):
    u = QMatrix.random(3, 1, rng)
    with pytest.raises(Singular) as e:
        mplu(u @ u.H)
    assert e.value.step == 2


# -- predicates ---------------------------------------------------------------

def test_predicates(rng):
    B = QMatrix.random(4, 4, rng)
    H = B + B.H
    assert is_hermitian(H) and not is_hermitian(B)
    G = B.H @ B
    assert is_psd(G) and not is_psd(-G)
    assert is_unitary(mpolar_right(B).U) and not is_unitary(B)
    assert not is_unitary(QMatrix.random(2, 3, rng))


def test_external_scale_marks_tiny_blocks_singular(rng):
    A = QMatrix.random(3, 3, rng) * 1e-17
    minv(A)  # alone, a uniformly tiny matrix is well conditioned
    for fn in (minv, lambda M, t, s: mplu(M, t, s)):
        with pytest.raises(Singular):
            fn(A, 1e-13, 1.0)
    with pytest.raises(ZeroPivot):
        mlu(A, 1e-13, 1.0)
