"""Built-in lattices, harmonic vectors, groups and the published table.

Everything here is validated on construction; :class:`ConstructionMismatch`
is raised when a certificate fails.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exactnum import ONE, ZERO, I, IR6, ThetaScalar, det_small
from .lattice import GramMatrix, Lattice, block_diagonal, frac_inverse, short_vectors

__all__ = [
    "ConstructionMismatch",
    "GolayCode",
    "HarmonicSpec",
    "GOLAY_ROWS",
    "DODECAD",
    "TAU",
    "build_golay",
    "build_leech",
    "build_niemeier",
    "niemeier_lattice",
    "harmonic_spec",
    "gram_A",
    "gram_D",
    "gram_E6",
    "target_gram",
    "TARGET_LABELS",
    "TABLE_COLUMNS",
    "TABLE_COMBINATION",
    "table_data",
    "NIEMEIER_NAMES",
]


class ConstructionMismatch(RuntimeError):
    pass


# Generator matrix [I | A] of the Golay code, one codeword per row.
GOLAY_ROWS = [
    "100000000000001100111101",
    "010000000000100110011110",
    "001000000000110011000111",
    "000100000000011001101011",
    "000010000000011110010011",
    "000001000000101111001001",
    "000000100000110101101100",
    "000000010000111000110110",
    "000000001000100101110011",
    "000000000100110010111001",
    "000000000010011011011100",
    "000000000001001111100110",
]

DODECAD = "100110011100100100111001"

# 1-based transpositions of the involution tau
TAU_CYCLES = [(1, 9), (2, 12), (3, 7), (4, 24), (5, 21), (6, 18), (8, 19), (10, 16),
              (11, 17), (13, 20), (14, 23), (15, 22)]


def _tau_perm():
    p = list(range(24))
    for a, b in TAU_CYCLES:
        p[a - 1], p[b - 1] = b - 1, a - 1
    return tuple(p)


TAU = _tau_perm()


# ---- Golay code -------------------------------------------------------------

@dataclass(frozen=True)
class GolayCode:
    generator_matrix: tuple[int, ...]  # rows as 24-bit ints, bit j = coordinate j
    codewords: tuple[int, ...]

    @staticmethod
    def to_bits(word: int) -> list[int]:
        return [(word >> j) & 1 for j in range(24)]

    @staticmethod
    def from_bits(bits) -> int:
        return sum(int(b) << j for j, b in enumerate(bits))

    @property
    def dimension(self) -> int:
        return len(self.generator_matrix)

    def weight_distribution(self) -> dict[int, int]:
        dist: dict[int, int] = {}
        for w in self.codewords:
            k = bin(w).count("1")
            dist[k] = dist.get(k, 0) + 1
        return dict(sorted(dist.items()))

    def min_weight(self) -> int:
        return min(bin(w).count("1") for w in self.codewords if w)

    def __contains__(self, word: int) -> bool:
        return word in self._set

    @property
    def _set(self):
        return _golay_set()

    def octads(self) -> list[int]:
        return [w for w in self.codewords if bin(w).count("1") == 8]


@lru_cache(maxsize=None)
def _golay_set():
    return frozenset(build_golay().codewords)


def _row_to_int(s: str) -> int:
    return GolayCode.from_bits(int(ch) for ch in s)


@lru_cache(maxsize=None)
def build_golay() -> GolayCode:
    rows = tuple(_row_to_int(r) for r in GOLAY_ROWS)
    words = []
    for mask in range(1 << 12):
        w = 0
        for j in range(12):
            if mask >> j & 1:
                w ^= rows[j]
        words.append(w)
    code = GolayCode(rows, tuple(sorted(words)))
    if len(set(words)) != 4096:
        raise ConstructionMismatch("Golay generator rows are dependent")
    dist = code.weight_distribution()
    if dist != {0: 1, 8: 759, 12: 2576, 16: 759, 24: 1}:
        raise ConstructionMismatch(f"unexpected Golay weight distribution {dist}")
    # self-dual: every pair of rows has even overlap
    for a, b in itertools.combinations_with_replacement(rows, 2):
        if bin(a & b).count("1") % 2:
            raise ConstructionMismatch("Golay code is not self-orthogonal")
    if _row_to_int(DODECAD) not in set(words):
        raise ConstructionMismatch("the dodecad is not a codeword")
    return code


def golay_permutation_preserves(perm) -> bool:
    """True when the coordinate permutation ``j -> perm[j]`` maps the code to itself."""
    code = _golay_set()
    for r in build_golay().generator_matrix:
        img = 0
        for j in range(24):
            if r >> j & 1:
                img |= 1 << perm[j]
        if img not in code:
            return False
    return True


# ---- Gram matrices of root lattices -----------------------------------------

def gram_A(n: int) -> list[list[int]]:
    return [[2 if i == j else (-1 if abs(i - j) == 1 else 0) for j in range(n)] for i in range(n)]


def gram_D(n: int) -> list[list[int]]:
    """Cartan matrix of D_n: chain 1..n-1 with node n attached to node n-2."""
    if n < 2:
        raise ValueError("D_n needs n >= 2")
    G = [[0] * n for _ in range(n)]
    for i in range(n):
        G[i][i] = 2
    edges = [(i, i + 1) for i in range(n - 2)]
    if n >= 3:
        edges.append((n - 3, n - 1))
    for a, b in edges:
        G[a][b] = G[b][a] = -1
    return G


GRAM_E6 = [
    [2, -1, 0, 0, 0, 0],
    [-1, 2, -1, 0, 0, 0],
    [0, -1, 2, -1, 0, -1],
    [0, 0, -1, 2, -1, 0],
    [0, 0, 0, -1, 2, 0],
    [0, 0, -1, 0, 0, 2],
]


def gram_E6() -> list[list[int]]:
    return [list(r) for r in GRAM_E6]


# ---- lattices ---------------------------------------------------------------

NIEMEIER_NAMES = ["A1^24", "A2^12", "A3^8", "A4^6", "D4^6", "A6^4", "D6^4", "E6^4", "Leech"]

_ALIASES = {
    "N(A_1^24)": "A1^24", "N(A_1^{24})": "A1^24", "A_1^24": "A1^24",
    "N(A_2^12)": "A2^12", "N(A_2^{12})": "A2^12", "A_2^12": "A2^12",
    "N(A_3^8)": "A3^8", "A_3^8": "A3^8",
    "N(A_4^6)": "A4^6", "A_4^6": "A4^6",
    "N(D_4^6)": "D4^6", "D_4^6": "D4^6",
    "N(A_6^4)": "A6^4", "A_6^4": "A6^4",
    "N(D_6^4)": "D6^4", "D_6^4": "D6^4",
    "N(E_6^4)": "E6^4", "E_6^4": "E6^4",
    "Lambda": "Leech", "leech": "Leech", "Λ": "Leech",
}


def canonical_name(name: str) -> str:
    name = name.strip()
    if name in NIEMEIER_NAMES:
        return name
    if name in _ALIASES:
        return _ALIASES[name]
    raise KeyError(f"unknown catalog lattice {name!r}; choose from {NIEMEIER_NAMES}")


def _unit(i: int, m: int = 24) -> list[Fraction]:
    return [Fraction(int(j == i)) for j in range(m)]


def _glue(blocks, v, size) -> list[Fraction]:
    """Concatenate multiples ``k*v`` of a block vector (0 gives the zero block)."""
    out = []
    for k in blocks:
        out.extend(Fraction(k) * x for x in v) if k else out.extend([Fraction(0)] * size)
    return out


def _concat(parts) -> list[Fraction]:
    out = []
    for p in parts:
        out.extend(Fraction(x) for x in p)
    return out


def _dn_sublattice(nblocks: int, size: int) -> list[list[Fraction]]:
    gens = []
    for b in range(nblocks):
        o = b * size
        e = lambda i: _unit(o + i)
        gens.append([x + y for x, y in zip(e(0), e(1))])
        for i in range(size - 1):
            gens.append([x - y for x, y in zip(e(i), e(i + 1))])
    return gens


def _leech_generators():
    code = build_golay()
    gens = []
    # 4 * D_24
    for j in range(1, 24):
        gens.append([Fraction(4 * ((k == 0) + (k == j))) for k in range(24)])
    gens.append([Fraction(4 * (k in (1, 2))) for k in range(24)])
    for row in code.generator_matrix:
        gens.append([Fraction(2 * b) for b in GolayCode.to_bits(row)])
    # 1 + 2c + 4y with c = 0, y = -e_1 (odd coordinate sum)
    gens.append([Fraction(-3 if k == 0 else 1) for k in range(24)])
    return gens


def leech_membership(v) -> bool:
    """Membership in the Leech lattice straight from the coset description."""
    v = [Fraction(x) for x in v]
    if any(x.denominator != 1 for x in v):
        return False
    v = [int(x) for x in v]
    parity = v[0] % 2
    if any(x % 2 != parity for x in v):
        return False
    w = [x - parity for x in v]  # now 2c + 4*something
    c = GolayCode.from_bits((x // 2) % 2 for x in w)
    if c not in _golay_set():
        return False
    rest = [(x - 2 * ((x // 2) % 2)) // 4 for x in w]
    return sum(rest) % 2 == parity


@lru_cache(maxsize=None)
def build_leech() -> Lattice:
    L = Lattice(GramMatrix.identity(24, Fraction(1, 8)), _leech_generators(), name="Leech")
    _certify(L, roots=0)
    # a few definitional membership checks
    rng = random.Random(1)
    for _ in range(20):
        x = rng.choice(short_vectors(L, 4))
        if not leech_membership(L.to_ambient(x)):
            raise ConstructionMismatch("generated vector fails the Leech coset test")
    return L


def _certify(L: Lattice, roots: int | None = None):
    if not L.is_even:
        raise ConstructionMismatch(f"{L.name}: lattice is not even")
    if L.det != 1:
        raise ConstructionMismatch(f"{L.name}: determinant {L.det} != 1")
    if roots is not None and len(short_vectors(L, 2)) != roots:
        raise ConstructionMismatch(f"{L.name}: expected {roots} roots")


def _niemeier_data(name: str):
    """(ambient Gram, generators) for the eight glued Niemeier lattices."""
    Z24 = [_unit(i) for i in range(24)]
    if name == "A1^24":
        gram = GramMatrix.identity(24, 2)
        gens = Z24 + [[Fraction(b, 2) for b in GolayCode.to_bits(r)] for r in build_golay().generator_matrix]
    elif name == "A6^4":
        gram = block_diagonal(*[gram_A(6)] * 4)
        v = [Fraction(k, 7) for k in range(1, 7)]
        gens = Z24 + [_glue(g, v, 6) for g in ([1, 2, 1, 6], [1, 1, 6, 2])]
    elif name == "A4^6":
        gram = block_diagonal(*[gram_A(4)] * 6)
        v = [Fraction(k, 5) for k in (2, 4, -4, -2)]
        gens = Z24 + [_glue(g, v, 4) for g in ([1, 0, 1, 4, 4, 1], [1, 1, 4, 4, 1, 0], [1, 4, 4, 1, 0, 1])]
    elif name == "A3^8":
        gram = block_diagonal(*[gram_A(3)] * 8)
        v = [Fraction(k, 4) for k in (1, 2, -1)]
        glue = ([1, 3, 1, 2, 1, 0, 0, 0], [1, 1, 2, 1, 0, 0, 0, 3],
                [1, 2, 1, 0, 0, 0, 3, 1], [1, 1, 0, 0, 0, 3, 1, 2])
        gens = Z24 + [_glue(g, v, 3) for g in glue]
    elif name == "A2^12":
        gram = block_diagonal(*[gram_A(2)] * 12)
        v = [Fraction(1, 3), Fraction(2, 3)]
        glue = ([1, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1], [0, 1, 0, 0, 0, 0, 1, 0, 1, 2, 2, 1],
                [0, 0, 1, 0, 0, 0, 1, 1, 0, 1, 2, 2], [0, 0, 0, 1, 0, 0, 1, 2, 1, 0, 1, 2],
                [0, 0, 0, 0, 1, 0, 1, 2, 2, 1, 0, 1], [0, 0, 0, 0, 0, 1, 1, 1, 2, 2, 1, 0])
        gens = Z24 + [_glue(g, v, 2) for g in glue]
    elif name == "D6^4":
        gram = GramMatrix.identity(24)
        s = [Fraction(1, 2)] * 6
        v = [0, 0, 0, 0, 0, 1]
        c = [x - y for x, y in zip(s, v)]
        z = [0] * 6
        gens = _dn_sublattice(4, 6) + [_concat(p) for p in ([z, s, v, c], [z, v, c, s], [s, z, c, v], [v, z, s, c])]
    elif name == "D4^6":
        gram = GramMatrix.identity(24)
        s = [Fraction(1, 2)] * 4
        v = [0, 0, 0, 1]
        c = [x - y for x, y in zip(s, v)]
        z = [0] * 4
        glue = ([v, c, c, v, c, v], [c, v, v, c, c, v], [c, v, c, v, v, c],
                [s, z, c, v, z, s], [z, z, c, c, c, c], [v, z, c, s, v, z])
        gens = _dn_sublattice(6, 4) + [_concat(p) for p in glue]
    elif name == "E6^4":
        gram = block_diagonal(*[GRAM_E6] * 4)
        v = [Fraction(k, 3) for k in (1, -1, 0, 1, -1, 0)]
        gens = Z24 + [_glue(g, v, 6) for g in ([1, 0, 1, 2], [1, 2, 0, 1])]
    else:
        raise KeyError(name)
    return gram, gens


ROOT_COUNTS = {"A1^24": 48, "A2^12": 72, "A3^8": 96, "A4^6": 120, "D4^6": 144,
               "A6^4": 168, "D6^4": 240, "E6^4": 288, "Leech": 0}


@lru_cache(maxsize=None)
def niemeier_lattice(name: str) -> Lattice:
    name = canonical_name(name)
    if name == "Leech":
        return build_leech()
    gram, gens = _niemeier_data(name)
    L = Lattice(gram, gens, name=name)
    _certify(L)
    return L


# ---- harmonic vectors -------------------------------------------------------

@dataclass(frozen=True)
class HarmonicSpec:
    """Isotropic tuple ``h = (h_1..h_n)`` of ambient vectors over Q(i, r6)."""

    vectors: tuple[tuple[ThetaScalar, ...], ...]

    @property
    def degree(self) -> int:
        return len(self.vectors)

    @property
    def dim(self) -> int:
        return len(self.vectors[0])

    def conj(self) -> "HarmonicSpec":
        return HarmonicSpec(tuple(tuple(x.conj() for x in h) for h in self.vectors))

    def gram_with(self, gram: GramMatrix, other: "HarmonicSpec") -> list[list[ThetaScalar]]:
        """``Q(h, other)`` using the ambient Gram matrix."""
        G = gram.entries
        m = self.dim
        # precompute G * other_j
        Go = []
        for y in other.vectors:
            Go.append([sum((G[r][c] * y[c] for c in range(m) if G[r][c] and y[c]), ZERO) for r in range(m)])
        return [[sum((x[r] * gy[r] for r in range(m) if x[r] and gy[r]), ZERO) for gy in Go] for x in self.vectors]

    def is_isotropic(self, gram: GramMatrix) -> bool:
        return all(v.is_zero() for row in self.gram_with(gram, self) for v in row)

    def is_positive(self, gram: GramMatrix) -> bool:
        """``Q(h, conj h)`` is a positive definite Hermitian matrix."""
        H = self.gram_with(gram, self.conj())
        n = len(H)
        for k in range(1, n + 1):
            d = det_small([r[:k] for r in H[:k]])
            if not d.is_real() or d.real_sign() <= 0:
                return False
        return True

    def validate(self, gram: GramMatrix):
        if not self.is_isotropic(gram):
            raise ConstructionMismatch("Q(h, h) is not zero")
        if not self.is_positive(gram):
            raise ConstructionMismatch("Q(h, conj h) is not positive definite")


def _hspec_from_pairs(pairs, m=24) -> HarmonicSpec:
    """Each entry is a dict {1-based coordinate: scalar}."""
    vecs = []
    for p in pairs:
        v = [ZERO] * m
        for j, x in p.items():
            v[j - 1] = ThetaScalar.coerce(x)
        vecs.append(tuple(v))
    return HarmonicSpec(tuple(vecs))


_H_LEECH = [{1: I, 9: 1}, {4: 1, 24: I}, {5: 1, 21: I}, {8: 1, 19: I}, {10: 1, 16: I}, {13: 1, 20: I}]
_H_SIX = [{j: 1, 6 + j: I} for j in range(1, 7)]
_H_FOUR = [{j: 1, 8 + j: I} for j in range(1, 7)]
_H_A3 = [{1: 1, 7: I}, {2: 1, 8: I}, {1: 1, 2: 2, 3: 3, 24: IR6},
         {4: 1, 10: I}, {5: 1, 11: I}, {4: 1, 5: 2, 6: 3, 21: IR6}]
_H_A2 = [{1: 1, 17: I}, {2: 1, 18: I}, {3: 1, 13: I}, {4: 1, 14: I}, {5: 1, 19: I}, {6: 1, 20: I}]

_H_TABLE = {
    "Leech": _H_LEECH, "A1^24": _H_LEECH,
    "A6^4": _H_SIX, "D6^4": _H_SIX, "E6^4": _H_SIX,
    "A4^6": _H_FOUR, "D4^6": _H_FOUR,
    "A3^8": _H_A3, "A2^12": _H_A2,
}


@lru_cache(maxsize=None)
def harmonic_spec(name: str) -> HarmonicSpec:
    name = canonical_name(name)
    h = _hspec_from_pairs(_H_TABLE[name])
    h.validate(niemeier_lattice(name).ambient_gram)
    return h


def build_niemeier(name: str):
    """(lattice, harmonic spec, H generator fixture) for a catalog name."""
    from .fixtures import group_fixture

    name = canonical_name(name)
    return niemeier_lattice(name), harmonic_spec(name), group_fixture(name)


# ---- target matrices and the published table ---------------------------------

TARGET_LABELS = [
    "A6", "D6", "E6", "A5A1", "D5A1", "A4A2", "D4A2", "A4A1^2", "D4A1^2", "A3^2",
    "A3A2A1", "A3A1^3", "A2^3", "A2^2A1^2", "A2A1^4", "A1^6",
    "A1(2)A5", "A1(2)D5", "A1(2)A4A1", "A1(2)D4A1", "A1(2)A3A2", "A1(2)A3A1^2",
    "A1(2)A2^2A1", "A1(2)A2A1^3", "A1(2)A1^5", "E6(2)", "E6'(3)",
]

TABLE_COLUMNS = ["A6^4", "D6^4", "E6^4", "A4^6", "D4^6", "A3^8", "A2^12", "A1^24", "Leech", "F"]

TABLE_COMBINATION = [-88, 10, 1, -6840, 1872, 17136, 216288, -146810880, -4767869952000]

_TABLE = [
    # N(A6^4) N(D6^4) N(E6^4) N(A4^6) N(D4^6) N(A3^8) N(A2^12) N(A1^24) Leech F
    [1, 0, 0, 0, 0, 0, 0, 0, 0, -88],
    [0, 1, 0, 0, 0, 0, 0, 0, 0, 10],
    [0, 0, 1, 0, 0, 0, 0, 0, 0, 1],
    [-12, -30, -20, 0, 0, 0, 0, 0, 0, 736],
    [0, -10, -32, 0, 0, 0, 0, 0, 0, -132],
    [30, 120, 240, 1, 0, 0, 0, 0, 0, -8040],
    [0, 72, 192, 0, 1, 0, 0, 0, 0, 2784],
    [40, 260, 320, -2, 0, 0, 0, 0, 0, 13080],
    [0, 48, 384, 0, -2, 0, 0, 0, 0, -2880],
    [-32, -192, -432, 0, 0, 1, 0, 0, 0, 17600],
    [-96, -276, -480, -8, -6, -6, 0, 0, 0, -54120],
    [576, 672, 192, 48, 36, 20, 0, 0, 0, 38016],
    [648, 1296, 900, 54, 36, 0, 1, 0, 0, -128844],
    [-432, -1080, -1152, -36, 0, 72, -2, 0, 0, 1073520],
    [-1152, -3456, 768, 96, -152, -480, 12, 0, 0, -6503424],
    [-11520, 3840, -46080, -2880, 240, 4000, -120, 0, 0, 63744000],
    [-816, -11436, -11568, 0, 0, 0, 0, 0, 0, -54120],
    [0, -1376, -9600, 0, 0, 0, 0, 0, 0, -23360],
    [-2320, 61020, 121440, -4, 0, 0, 0, 0, 0, 963160],
    [0, -2784, 88320, 0, -12, 0, 0, 0, 0, 38016],
    [-27072, -94464, -156384, -288, -792, -150, 0, 0, 0, -801792],
    [127744, 436736, 627456, 320, 1216, -816, 0, 0, 0, -20142080],
    [-2592, -282528, -1221696, -4104, 1512, 1080, 12, 0, 0, 48185280],
    [-208512, -1416384, -743040, 24480, 1656, 11208, -72, 0, 0, 15586560],
    [-2772480, -5598720, -19937280, -191360, -84320, -98880, 560, 4, 0, -841420800],
    [18247680, -114048000, 436423680, -2142720, 11986560, -18809280, 5212800, -27081, 1, 47850946560],
    [149532480, -874800000, 2327826600, -15843600, 44621280, -90357120, 21107880, -108864, 4, 100283601960],
]


def table_data() -> dict:
    """The published coefficient table: rows, columns and combination coefficients."""
    return {
        "rows": list(TARGET_LABELS),
        "columns": list(TABLE_COLUMNS),
        "values": [list(r) for r in _TABLE],
        "combination": list(TABLE_COMBINATION),
    }


def table_value(label: str, column: str) -> int:
    column = canonical_name(column) if column != "F" else "F"
    return _TABLE[TARGET_LABELS.index(label)][TABLE_COLUMNS.index(column)]


def _root_block(token: str) -> list[list[Fraction]]:
    kind, n = token[0], int(token[1:])
    base = {"A": gram_A, "D": gram_D}.get(kind)
    if kind == "E":
        if n != 6:
            raise ValueError("only E6 is supported")
        return [[Fraction(v) for v in r] for r in GRAM_E6]
    return [[Fraction(v) for v in r] for r in base(n)]


def _parse_label(label: str) -> list[list[list[Fraction]]]:
    import re

    label = label.replace("_", "").replace("{", "").replace("}", "")
    if label == "E6'(3)":
        inv = frac_inverse(GRAM_E6)
        return [[[3 * v for v in r] for r in inv]]
    blocks = []
    for m in re.finditer(r"([ADE]\d)(?:\((\d+)\))?(?:\^(\d+))?", label):
        token, scale, power = m.group(1), int(m.group(2) or 1), int(m.group(3) or 1)
        B = [[scale * v for v in r] for r in _root_block(token)]
        blocks.extend([B] * power)
    if "".join(m.group(0) for m in re.finditer(r"([ADE]\d)(?:\((\d+)\))?(?:\^(\d+))?", label)) != label:
        raise ValueError(f"cannot parse target label {label!r}")
    return blocks


def target_gram(label: str) -> GramMatrix:
    """Block-diagonal Gram matrix for a table row label.

    ``X(s)`` scales the Gram of X by s; ``E6'(3)`` is ``3 G(E6)^{-1}``.
    """
    return block_diagonal(*_parse_label(label))


def f_column_residuals() -> dict[str, int]:
    """``F - sum_j c_j * column_j`` for every row; all zero when the table is consistent."""
    out = {}
    for label, row in zip(TARGET_LABELS, _TABLE):
        out[label] = row[-1] - sum(c * v for c, v in zip(TABLE_COMBINATION, row[:-1]))
    return out
