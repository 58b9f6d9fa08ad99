"""The finite group O(T) of a small positive definite even form."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import GramMatrix, Lattice, short_vectors

__all__ = ["FormAutGroup", "aut_of_form", "aut_of_form_bruteforce", "det_character_trivial"]


@dataclass(frozen=True)
class FormAutGroup:
    """All integer ``eps`` with ``eps.T @ T @ eps == T``, shape ``(N, n, n)``."""

    T: GramMatrix
    elements: np.ndarray
    dets: np.ndarray

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def has_det_minus_one(self) -> bool:
        return bool(np.any(self.dets < 0))

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


def _dets(E: np.ndarray) -> np.ndarray:
    if len(E) == 0:
        return np.zeros(0, dtype=np.int64)
    return np.rint(np.linalg.det(E.astype(float))).astype(np.int64)


def _sorted(E: np.ndarray) -> np.ndarray:
    if len(E) == 0:
        return E
    flat = E.reshape(len(E), -1)
    return E[np.lexsort(flat.T[::-1])]


@lru_cache(maxsize=64)
def _aut_cached(key: tuple) -> FormAutGroup:
    T = GramMatrix(key)
    n = T.n
    Ti = T.to_int_array()
    if n == 0:
        E = np.zeros((1, 0, 0), dtype=np.int64)
        return FormAutGroup(T, E, np.ones(1, dtype=np.int64))
    L = Lattice(T, [[int(i == j) for j in range(n)] for i in range(n)])
    cands = {}
    for t in sorted(set(int(Ti[j, j]) for j in range(n))):
        cands[t] = short_vectors(L, t).reshape(-1, n)
    # level-wise extension: partial[k, :, j] = column j of partial solution k
    partial = np.zeros((1, n, 0), dtype=np.int64)
    for j in range(n):
        C = cands[int(Ti[j, j])]
        if len(C) == 0:
            partial = np.zeros((0, n, j + 1), dtype=np.int64)
            break
        if j == 0:
            partial = C[:, :, None].copy()
            continue
        TC = C @ Ti  # (c, n)
        target = Ti[:j, j]
        pieces = []
        step = max(1, 2_000_000 // (len(C) * j))
        for s in range(0, len(partial), step):
            P = partial[s:s + step]
            # inner products of chosen columns with every candidate: (k, j, c)
            ip = np.einsum("kai,ca->kic", P, TC)
            kk, cc = np.nonzero(np.all(ip == target[None, :, None], axis=1))
            pieces.append(np.concatenate([P[kk], C[cc][:, :, None]], axis=2))
        partial = np.concatenate(pieces)
    E = _sorted(partial)
    return FormAutGroup(T, E, _dets(E))


def aut_of_form(T) -> FormAutGroup:
    """Complete element list of O(T) by column-wise search over short vectors."""
    T = T if isinstance(T, GramMatrix) else GramMatrix(T)
    if not T.is_positive_definite():
        raise ValueError("T must be positive definite")
    return _aut_cached(T.entries)


def aut_of_form_bruteforce(T, bound: int = 2) -> FormAutGroup:
    """Oracle: all integer matrices with entries in [-bound, bound]."""
    T = T if isinstance(T, GramMatrix) else GramMatrix(T)
    n = T.n
    Ti = T.to_int_array()
    vals = range(-bound, bound + 1)
    cols = np.array(list(itertools.product(vals, repeat=n)), dtype=np.int64)
    found = []
    # choose columns one at a time but without norm-based candidate lists
    for combo in itertools.product(range(len(cols)), repeat=n):
        E = cols[list(combo)].T
        if np.array_equal(E.T @ Ti @ E, Ti):
            found.append(E)
    E = _sorted(np.array(found, dtype=np.int64).reshape(-1, n, n))
    return FormAutGroup(T, E, _dets(E))


def det_character_trivial(G: FormAutGroup, k: int) -> bool:
    """True iff ``det(eps)**k == 1`` for every element."""
    if k % 2 == 0:
        return True
    return not G.has_det_minus_one
