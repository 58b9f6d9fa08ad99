import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegeltheta.autform import aut_of_form, aut_of_form_bruteforce, det_character_trivial
from siegeltheta.catalog import target_gram

# |W(R)| times the diagram automorphisms, for the table labels
ORDERS = {
    "A6": 10080,
    "D6": 46080,
    "E6": 103680,
    "A5A1": 2880,
    "A1^6": 46080,
    "E6(2)": 103680,
    "E6'(3)": 103680,
    "A3^2": 4608,
    "A1(2)A1^5": 7680,
}


@pytest.mark.parametrize("label,order", sorted(ORDERS.items()))
def test_orders(label, order):
    G = aut_of_form(target_gram(label))
    assert G.order == order


@pytest.mark.parametrize("T,bound", [
    ([[2]], 2),
    ([[2, 1], [1, 2]], 2),
    ([[2, 0], [0, 2]], 2),
    ([[2, 0], [0, 4]], 2),
    ([[4, 1], [1, 6]], 2),
    # A3: Weyl group entries in root coordinates lie in {-1, 0, 1}
    ([[2, 1, 0], [1, 2, 1], [0, 1, 2]], 1),
])
def test_against_bruteforce(T, bound):
    a = aut_of_form(T)
    b = aut_of_form_bruteforce(T, bound=bound)
    assert np.array_equal(a.elements, b.elements)


@st.composite
def forms(draw):
    n = draw(st.integers(1, 3))
    B = np.array(draw(st.lists(st.lists(st.integers(-1, 1), min_size=n, max_size=n), min_size=n, max_size=n)))
    B = B + 2 * np.eye(n, dtype=int)
    if round(abs(np.linalg.det(B))) == 0:
        B = np.eye(n, dtype=int)
    return (2 * B.T @ B).tolist()


@given(forms())
def test_group_properties(T):
    G = aut_of_form(T)
    Ti = np.array(T)
    for e in G.elements:
        assert np.array_equal(e.T @ Ti @ e, Ti)
    keys = {e.tobytes() for e in G.elements}
    assert len(keys) == G.order
    # closed under products, contains -I
    rng = np.random.default_rng(0)
    for _ in range(5):
        a, b = G.elements[rng.integers(G.order)], G.elements[rng.integers(G.order)]
        assert (a @ b).tobytes() in keys
    assert (-np.eye(len(T), dtype=np.int64)).tobytes() in keys


def test_det_character():
    G = aut_of_form([[2, 0], [0, 4]])
    assert G.has_det_minus_one
    assert not det_character_trivial(G, 1)
    assert det_character_trivial(G, 2)
    H = aut_of_form([[4, 1], [1, 6]])
    assert det_character_trivial(H, 1)


def test_rejects_indefinite():
    with pytest.raises(ValueError):
        aut_of_form([[2, 3], [3, 2]])
