from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegeltheta.exactnum import (
    I,
    IR6,
    ONE,
    R6,
    ZERO,
    ThetaScalar,
    det_permutation,
    det_small,
    format_scalar,
    from_int_tuple,
    parse_scalar,
    zadj,
    zdet,
    zmul,
    zpow,
)
from siegeltheta.modular import PRIMES, det_power_sum

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)
scalars = st.builds(ThetaScalar, small, small, small, small)
zints = st.tuples(*[st.integers(-30, 30)] * 4)


def test_units():
    assert I * I == ThetaScalar(-1)
    assert R6 * R6 == ThetaScalar(6)
    assert I * R6 == IR6
    assert IR6 * IR6 == ThetaScalar(-6)


@given(scalars, scalars, scalars)
def test_ring_axioms(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z


@given(scalars)
def test_inverse(x):
    if x.is_zero():
        with pytest.raises(ZeroDivisionError):
            x.inverse()
    else:
        assert x * x.inverse() == ONE


@given(scalars, scalars)
def test_conj_is_automorphism(x, y):
    assert (x * y).conj() == x.conj() * y.conj()
    assert (x * x.conj()).conj() == x * x.conj()


@given(scalars)
def test_norm_is_rational(x):
    assert isinstance(x.norm(), Fraction)
    assert (x.norm() == 0) == x.is_zero()


@given(scalars)
def test_text_roundtrip(x):
    assert parse_scalar(format_scalar(x)) == x


def test_parse_bare_rational_and_errors():
    assert parse_scalar("-3/4") == ThetaScalar(Fraction(-3, 4))
    with pytest.raises(ValueError):
        parse_scalar("1+i")


def test_real_sign():
    assert (R6 - 2).real_sign() == 1
    assert (R6 - 3).real_sign() == -1
    assert ZERO.real_sign() == 0


@given(zints, zints)
def test_zmul_matches_scalar(x, y):
    assert from_int_tuple(zmul(x, y)) == from_int_tuple(x) * from_int_tuple(y)


@given(zints)
def test_zadj_gives_integer(x):
    y, N = zadj(x)
    assert zmul(x, y) == (N, 0, 0, 0)
    assert (N == 0) == (x == (0, 0, 0, 0))


@given(st.integers(1, 4), st.data())
def test_determinants_agree(n, data):
    M = [[data.draw(zints) for _ in range(n)] for _ in range(n)]
    S = [[from_int_tuple(v) for v in r] for r in M]
    d = det_small(S)
    assert d == from_int_tuple(zdet(M))
    assert d == det_permutation(S)


@given(st.integers(1, 4), st.integers(1, 3), st.integers(1, 6), st.data())
def test_modular_power_sum(n, k, batch, data):
    M = np.array([[[data.draw(zints) for _ in range(n)] for _ in range(n)] for _ in range(batch)], dtype=np.int64)
    expected = (0, 0, 0, 0)
    for b in range(batch):
        e = zpow(zdet([[tuple(int(t) for t in M[b, i, j]) for j in range(n)] for i in range(n)]), k)
        expected = tuple(p + q for p, q in zip(expected, e))
    assert det_power_sum(M, k) == expected


def test_primes_have_roots():
    for p, ip, rp in PRIMES:
        assert p % 24 == 1
        assert ip * ip % p == p - 1
        assert rp * rp % p == 6


def test_scalar_is_immutable():
    with pytest.raises(AttributeError):
        ONE.a = 2
