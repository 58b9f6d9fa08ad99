import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from siegeltheta.lattice import (
    GramMatrix,
    Lattice,
    NonFullRank,
    NonIntegral,
    block_diagonal,
    constrained_vectors,
    frac_det,
    hermite_normal_form,
    lll_reduce,
    m_of_matrix,
    min_norm,
    short_vectors,
)


def identity_lattice(G, name=None):
    n = len(G)
    return Lattice(GramMatrix(G), [[int(i == j) for j in range(n)] for i in range(n)], name)


E8_GRAM = [
    [2, -1, 0, 0, 0, 0, 0, 0],
    [-1, 2, -1, 0, 0, 0, 0, 0],
    [0, -1, 2, -1, 0, 0, 0, -1],
    [0, 0, -1, 2, -1, 0, 0, 0],
    [0, 0, 0, -1, 2, -1, 0, 0],
    [0, 0, 0, 0, -1, 2, -1, 0],
    [0, 0, 0, 0, 0, -1, 2, 0],
    [0, 0, -1, 0, 0, 0, 0, 2],
]


def brute_count(G, norm, box):
    n = len(G)
    G = np.array(G)
    c = 0
    for x in itertools.product(range(-box, box + 1), repeat=n):
        x = np.array(x)
        if x @ G @ x == norm:
            c += 1
    return c


def test_gram_validation():
    with pytest.raises(ValueError):
        GramMatrix([[1, 2], [3, 4]])
    with pytest.raises(ValueError):
        GramMatrix([[1, 2]])
    assert GramMatrix([[2, 1], [1, 2]]).det() == 3


def test_lattice_errors():
    with pytest.raises(NonFullRank):
        Lattice(GramMatrix([[1, 0], [0, 1]]), [[1, 1], [2, 2]])
    with pytest.raises(NonIntegral):
        Lattice(GramMatrix([[1, 0], [0, 1]]), [[Fraction(1, 2), 0], [0, 1]])


def test_e8_certificates():
    L = identity_lattice(E8_GRAM, "E8")
    assert L.det == 1 and L.is_even
    assert len(short_vectors(L, 2)) == 240
    assert len(short_vectors(L, 4)) == 2160
    assert min_norm(L) == 2


def test_d4_in_coordinates():
    # D4 = even-sum vectors of Z^4
    gens = [[1, 1, 0, 0], [1, -1, 0, 0], [0, 1, -1, 0], [0, 0, 1, -1]]
    L = Lattice(GramMatrix.identity(4), gens, "D4")
    assert L.det == 4
    assert len(short_vectors(L, 2)) == 24
    assert len(short_vectors(L, 4)) == 24


def test_short_vectors_are_sorted_and_symmetric():
    L = identity_lattice([[2, 1], [1, 4]])
    X = short_vectors(L, 4)
    assert {tuple(x) for x in X} == {tuple(-x) for x in X}
    assert [tuple(x) for x in X] == sorted(tuple(x) for x in X)
    assert all(L.norm(x) == 4 for x in X)


@st.composite
def small_forms(draw):
    n = draw(st.integers(1, 3))
    B = np.array(draw(st.lists(st.lists(st.integers(-2, 2), min_size=n, max_size=n), min_size=n, max_size=n)))
    if round(abs(np.linalg.det(B))) == 0:
        B = B + 3 * np.eye(n, dtype=int)
    if round(abs(np.linalg.det(B))) == 0:
        B = np.eye(n, dtype=int)
    return (2 * B.T @ B).tolist()


@given(small_forms(), st.sampled_from([2, 4, 6, 8]))
def test_short_vectors_match_bruteforce(G, norm):
    L = identity_lattice(G)
    # x^T G x >= lambda_min |x|^2 bounds the box
    lam = float(np.linalg.eigvalsh(np.array(G, dtype=float)).min())
    box = int(np.floor(np.sqrt(norm / lam))) + 1
    assert len(short_vectors(L, norm)) == brute_count(G, norm, box)


@given(small_forms())
def test_lll_preserves_lattice(G):
    G = np.array(G, dtype=np.int64)
    U = lll_reduce(G)
    assert round(abs(np.linalg.det(U.astype(float)))) == 1
    Gr = U.T @ G @ U
    assert frac_det(Gr.tolist()) == frac_det(G.tolist())


def test_hnf():
    H = hermite_normal_form([[2, 4], [3, 5], [1, 1]], 2)
    assert H == [[1, 1], [0, 2]]


def test_constrained_vectors():
    L = identity_lattice(E8_GRAM)
    y = short_vectors(L, 2)[0]
    X = constrained_vectors(L, 2, [(y, -1)])
    assert len(X) == 56
    assert all(L.inner(x, y) == -1 for x in X)
    assert len(constrained_vectors(L, 2, [(y, 3)])) == 0


def test_m_of_matrix():
    assert m_of_matrix(GramMatrix([[2, 1], [1, 2]])) == 1
    assert m_of_matrix(block_diagonal([[4]], [[6]])) == 2


def test_disk_cache(tmp_path):
    L = identity_lattice([[2, 1], [1, 2]])
    X = short_vectors(L, 2, cache_dir=tmp_path)
    L2 = identity_lattice([[2, 1], [1, 2]])
    Y = short_vectors(L2, 2, cache_dir=tmp_path)
    assert np.array_equal(X, Y)
    assert list((tmp_path / "shorts").iterdir())
