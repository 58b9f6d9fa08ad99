"""Small lattices with isotropic h and nonzero coefficients, used against the
brute-force oracle.

Shells of root lattices are spherical designs, so h-weighted sums over them
tend to vanish.  Pairing a lattice R with its rescaling R(6) and taking
``h_j = r6 e_j + i e_{r+j}`` gives Q(h, h) = 0 while breaking that symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from siegeltheta.catalog import HarmonicSpec
from siegeltheta.exactnum import I, R6, ZERO, ThetaScalar
from siegeltheta.groups import GeneratedGroup, Isometry, group_build
from siegeltheta.lattice import GramMatrix, Lattice, block_diagonal


def lattice_from_gram(G, name=None) -> Lattice:
    n = len(G)
    return Lattice(GramMatrix(G), [[int(i == j) for j in range(n)] for i in range(n)], name)


def spec(vectors, m) -> HarmonicSpec:
    out = []
    for v in vectors:
        w = [ZERO] * m
        for j, x in v.items():
            w[j] = ThetaScalar.coerce(x)
        out.append(tuple(w))
    return HarmonicSpec(tuple(out))


def diag(*d):
    return [[d[i] if i == j else 0 for j in range(len(d))] for i in range(len(d))]


@lru_cache(maxsize=None)
def paired_a1(r: int) -> Lattice:
    """A1^r + A1(6)^r."""
    return lattice_from_gram(diag(*([2] * r + [12] * r)), f"A1^{r}A1(6)^{r}")


def paired_a1_h(r: int, n: int) -> HarmonicSpec:
    return spec([{j: R6, r + j: I} for j in range(n)], 2 * r)


@lru_cache(maxsize=None)
def mixed() -> Lattice:
    """(A1(2) + A1(3))^2 = diag(4, 6, 4, 6)."""
    return lattice_from_gram(diag(4, 6, 4, 6), "(A1(2)A1(3))^2")


def mixed_h(n: int) -> HarmonicSpec:
    return spec([{0: I * R6, 1: 2}, {2: I * R6, 3: 2}][:n], 4)


@lru_cache(maxsize=None)
def paired_a2() -> Lattice:
    return lattice_from_gram(block_diagonal([[2, -1], [-1, 2]], [[12, -6], [-6, 12]]).entries, "A2A2(6)")


def paired_a2_h(n: int) -> HarmonicSpec:
    return spec([{0: R6, 2: I}, {1: R6, 3: I}][:n], 4)


# ---- groups H -------------------------------------------------------------------

def _perm(L, p, s=None):
    return Isometry.permutation(L, p, s)


@lru_cache(maxsize=None)
def group(kind: str, lattice_key: str) -> GeneratedGroup:
    L = LATTICES[lattice_key]()
    m = L.rank
    if kind == "trivial":
        return GeneratedGroup(L, [])
    if kind == "minus":
        return group_build(L, [Isometry(L, -np.eye(m, dtype=np.int64))], (2,))
    if kind == "pairs":
        # simultaneous permutations of both halves, and a paired sign change
        r = m // 2
        ident = list(range(m))
        swap = ident[:]
        swap[0], swap[1], swap[r], swap[r + 1] = 1, 0, r + 1, r
        cyc = [(j + 1) % r for j in range(r)] + [r + (j + 1) % r for j in range(r)]
        signs = [-1 if j in (0, r) else 1 for j in range(m)]
        return group_build(L, [_perm(L, swap), _perm(L, cyc), _perm(L, ident, signs)], (2,))
    if kind == "halves":
        # B_r acting on each half independently
        r = m // 2
        ident = list(range(m))
        gens = []
        for off in (0, r):
            swap = ident[:]
            swap[off], swap[off + 1] = off + 1, off
            cyc = ident[:]
            for j in range(r):
                cyc[off + j] = off + (j + 1) % r
            signs = [-1 if j == off else 1 for j in range(m)]
            gens += [_perm(L, swap), _perm(L, cyc), _perm(L, ident, signs)]
        return group_build(L, gens, (2,))
    if kind == "weyl_diag":
        # W(A2) acting diagonally on A2 + A2(6), together with -I
        s1 = [[-1, 1], [0, 1]]
        s2 = [[1, 0], [1, -1]]
        gens = []
        for s in (s1, s2):
            M = [[Fraction(0)] * 4 for _ in range(4)]
            for a in range(2):
                for b in range(2):
                    M[a][b] = Fraction(s[a][b])
                    M[2 + a][2 + b] = Fraction(s[a][b])
            gens.append(Isometry.from_ambient(L, M))
        gens.append(Isometry(L, -np.eye(4, dtype=np.int64)))
        return group_build(L, gens, (2,))
    raise KeyError(kind)


LATTICES = {
    "a1x2": lambda: paired_a1(2),
    "a1x3": lambda: paired_a1(3),
    "a1x4": lambda: paired_a1(4),
    "mixed": mixed,
    "a2": paired_a2,
}


def harmonic(lattice_key: str, n: int) -> HarmonicSpec:
    if lattice_key.startswith("a1x"):
        return paired_a1_h(int(lattice_key[3:]), n)
    if lattice_key == "mixed":
        return mixed_h(n)
    return paired_a2_h(n)


@dataclass(frozen=True)
class Instance:
    lattice: str
    group: str
    T: tuple
    k: int
    value: int           # frozen oracle value
    character_zero: bool = False

    @property
    def label(self) -> str:
        rows = ";".join(",".join(str(v) for v in r) for r in self.T)
        return f"{self.lattice}-{self.group}-T[{rows}]-k{self.k}"

    def build(self):
        L = LATTICES[self.lattice]()
        return L, group(self.group, self.lattice), harmonic(self.lattice, len(self.T)), GramMatrix(self.T)


def _t(*rows):
    return tuple(tuple(r) for r in rows)


# values produced by coefficient_bruteforce, then frozen
INSTANCES = [
    Instance("a1x3", "trivial", _t((2,)), 2, 48),
    Instance("a1x3", "minus", _t((14,)), 2, -1440),
    Instance("a1x3", "pairs", _t((2, 0), (0, 12)), 2, -27648),
    Instance("a1x3", "halves", _t((4, 2), (2, 4)), 2, 27648),
    Instance("a1x3", "trivial", _t((4, 1), (1, 6)), 1, 0),
    Instance("a1x3", "pairs", _t((2, 0, 0), (0, 2, 0), (0, 0, 12)), 2, -3981312),
    Instance("a1x3", "halves", _t((4, 2, 0), (2, 4, 0), (0, 0, 12)), 2, -23887872),
    Instance("a1x3", "minus", _t((2, 0, 0), (0, 2, 0), (0, 0, 2)), 1, 0, True),
    Instance("a1x2", "trivial", _t((2, 0), (0, 2)), 2, 4608),
    Instance("a1x2", "halves", _t((2, 0), (0, 2)), 1, 0, True),
    Instance("a1x2", "pairs", _t((8,)), 2, 192),
    Instance("mixed", "trivial", _t((4,)), 2, -192),
    Instance("mixed", "minus", _t((4, 0), (0, 4)), 2, 73728),
    Instance("mixed", "minus", _t((6,)), 1, 0, True),
    Instance("a2", "weyl_diag", _t((2,)), 2, 72),
    Instance("a2", "weyl_diag", _t((6,)), 2, 216),
    Instance("a2", "trivial", _t((8,)), 2, 288),
    Instance("a2", "weyl_diag", _t((2, 1), (1, 2)), 2, 3888),
    Instance("a2", "minus", _t((2, 0), (0, 6)), 2, 15552),
    Instance("a2", "weyl_diag", _t((2, 1), (1, 4)), 2, 0),
    Instance("a2", "trivial", _t((4, 2), (2, 4)), 1, 0, True),
    Instance("a1x4", "pairs", _t((2, 0, 0), (0, 2, 0), (0, 0, 2)), 2, 663552),
    Instance("a1x4", "halves", _t((2,)), 1, 0, True),
]
