import math

import pytest
from hypothesis import given, strategies as st

from qtlib.errors import ZeroQuaternion
from qtlib.quat import I, J, K, ONE, Quaternion, from_pair, qconj, qinv, qmul, qnorm, to_pair

finite = st.floats(-1e3, 1e3, allow_nan=False)
quats = st.builds(Quaternion, finite, finite, finite, finite)


def test_basis_products():
    assert I * I == -ONE and J * J == -ONE and K * K == -ONE
    assert I * J == K and J * K == I and K * I == J
    assert J * I == -K and K * J == -I and I * K == -J
    assert I * J * K == -ONE


def test_pair_split_sign_convention():
    q = Quaternion(1.0, 2.0, 3.0, 4.0)
    c1, c2 = to_pair(q)
    assert c1 == 1 + 2j and c2 == 3 - 4j
    # q == c1 + j c2 with c1, c2 embedded on the (1, i) axis
    rebuilt = Quaternion(c1.real, c1.imag) + J * Quaternion(c2.real, c2.imag)
    assert rebuilt.isclose(q, 0.0)
    assert from_pair((c1, c2)) == q


def test_complex_through_j_conjugates():
    z = Quaternion(0.3, -1.7)
    assert (z * J).isclose(J * qconj(z), 1e-15)


@given(quats, quats, quats)
def test_associative(a, b, c):
    lhs, rhs = (a * b) * c, a * (b * c)
    scale = max(1.0, qnorm(a) * qnorm(b) * qnorm(c))
    assert lhs.isclose(rhs, 1e-12 * scale)


@given(quats, quats)
def test_norm_multiplicative(a, b):
    assert math.isclose(qnorm(a * b), qnorm(a) * qnorm(b), rel_tol=1e-12, abs_tol=1e-300)


@given(quats, quats)
def test_conj_reverses_products(a, b):
    scale = max(1.0, qnorm(a) * qnorm(b))
    assert qconj(a * b).isclose(qconj(b) * qconj(a), 1e-12 * scale)


@given(quats)
def test_pair_round_trip(q):
    assert from_pair(to_pair(q)) == q


@given(quats.filter(lambda q: qnorm(q) > 1e-6))
def test_inverse(q):
    assert (q * qinv(q)).isclose(ONE, 1e-12)
    assert (qinv(q) * q).isclose(ONE, 1e-12)
    assert (q / q).isclose(ONE, 1e-12)


def test_zero_inverse_raises():
    with pytest.raises(ZeroQuaternion):
        qinv(Quaternion())
    with pytest.raises(ZeroDivisionError):
        ONE / Quaternion()


def test_mixed_scalars():
    q = Quaternion(1, 2, 3, 4)
    assert 2 * q == Quaternion(2, 4, 6, 8)
    assert q + 1 == Quaternion(2, 2, 3, 4)
    assert 1j * q == I * q
    assert qmul(q, ONE) == q
    assert list(q) == [1, 2, 3, 4]
