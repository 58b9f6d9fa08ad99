from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegeltheta.catalog import TARGET_LABELS, table_value, target_gram
from siegeltheta.ikeda import (
    NonIntegralOffset,
    QExpansion,
    UnsupportedGenusFactor,
    build_g,
    discriminant_split,
    eta_power,
    ikeda_coefficient,
    is_fundamental_discriminant,
)


def test_delta_is_eta_24():
    delta = eta_power(1, 24, 12)
    assert delta.offset == 1
    # Ramanujan tau
    assert [delta.coefficient(m) for m in range(1, 8)] == [1, -24, 252, -1472, 4830, -6048, -16744]


def test_euler_product():
    eta = eta_power(1, 1, 30)
    assert eta.offset == Fraction(1, 24)
    nz = [j for j, c in enumerate(eta.coeffs) if c]
    assert nz == [0, 1, 2, 5, 7, 12, 15, 22, 26]


def test_g_coefficients():
    g = build_g(20)
    assert g.offset == 3
    expected = {3: 1, 4: 10, 7: -88, 8: -132, 11: 1275, 12: 736, 15: -8040, 16: -2880}
    for m in range(3, 17):
        assert g.coefficient(m) == expected.get(m, 0)


def test_g_plus_space():
    # weight 23/2 plus space: c(m) = 0 unless -m = 0, 1 mod 4
    g = build_g(120)
    for m, c in g.items():
        if m % 4 in (1, 2):
            assert c == 0


def test_offsets():
    with pytest.raises(NonIntegralOffset):
        eta_power(1, 1, 5).coefficient(0)
    with pytest.raises(NonIntegralOffset):
        eta_power(1, 1, 5) + eta_power(2, 1, 5)


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=15), st.sampled_from([1, -1]))
def test_inverse(tail, lead):
    f = QExpansion((lead,) + tuple(tail))
    one = f * f.inverse()
    assert one.coeffs == (1,) + (0,) * len(tail)


@given(st.integers(1, 4), st.integers(-6, 6))
def test_eta_power_multiplicative(m, e):
    a = eta_power(m, e, 25) * eta_power(m, 3, 25)
    b = eta_power(m, e + 3, 25)
    assert a == b


def test_text_roundtrip():
    g = build_g(40)
    assert QExpansion.from_text(g.to_text()) == g


def test_discriminants():
    assert is_fundamental_discriminant(-3)
    assert is_fundamental_discriminant(-4)
    assert is_fundamental_discriminant(-7)
    assert not is_fundamental_discriminant(-12)
    assert discriminant_split(target_gram("E6")) == discriminant_split([[2, 1], [1, 2]])
    s = discriminant_split(target_gram("A5A1"))
    assert (s.D, s.d) == (-3, 2)


@pytest.mark.parametrize("label,value", [("A6", -88), ("D6", 10), ("E6", 1)])
def test_published_entries(label, value):
    assert ikeda_coefficient(target_gram(label)) == value


def test_all_fundamental_rows_match_table():
    seen = 0
    for label in TARGET_LABELS:
        T = target_gram(label)
        if discriminant_split(T).d != 1:
            with pytest.raises(UnsupportedGenusFactor):
                ikeda_coefficient(T)
            continue
        assert ikeda_coefficient(T) == table_value(label, "F")
        seen += 1
    assert seen == 9
