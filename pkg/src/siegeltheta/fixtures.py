"""Generator fixtures for the groups H used with the catalog lattices.

Leech: H is generated by the Golay sign changes and the stabilizer of the
dodecad in the Golay automorphism group (a copy of M12).  The group
containing O(Leech)_h is the product of the sign changes with the
centralizer of tau in that stabilizer.

Other lattices: the Weyl group of the root system together with -I, except
for N(A1^24) where the fixture is the Golay sign changes with M24.
"""

from __future__ import annotations

import itertools
import math
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .catalog import (
    DODECAD,
    TAU,
    GolayCode,
    build_golay,
    canonical_name,
    golay_permutation_preserves,
    niemeier_lattice,
)
from .groups import GeneratedGroup, Isometry, group_build

__all__ = [
    "GroupFixture",
    "group_fixture",
    "extend_golay_permutation",
    "random_golay_automorphism",
    "permutation_closure",
    "m12_permutations",
    "centralizer_permutations",
    "m24_permutations",
    "weyl_generators",
]

M12_ORDER = 95040
M24_ORDER = 244823040
CENTRALIZER_ORDER = 240

_DODECAD_MASK = GolayCode.from_bits(int(ch) for ch in DODECAD)


# ---- Golay automorphisms -----------------------------------------------------

@lru_cache(maxsize=None)
def _octad_of() -> dict[int, int]:
    """Every 5-subset of coordinates (as a bitmask) lies in exactly one octad."""
    table = {}
    for o in build_golay().octads():
        pts = [j for j in range(24) if o >> j & 1]
        for S in itertools.combinations(pts, 5):
            table[sum(1 << j for j in S)] = o
    if len(table) != math.comb(24, 5):
        raise RuntimeError("octads do not form a Steiner system")
    return table


def extend_golay_permutation(images: dict[int, int], preserve: int | None = None,
                             order: list[int] | None = None) -> list[int] | None:
    """Complete a partial map of coordinates to a Golay code automorphism.

    Backtracking with octad propagation: when the images of five points are
    known, the octad through them must go to the octad through their images.
    With ``preserve`` (a codeword mask) the result also maps that support to
    itself.  Returns ``None`` when no extension exists.
    """
    octad = _octad_of()
    pts = order or (list(images) + [j for j in range(24) if j not in images])
    pi = dict(images)
    if len(set(pi.values())) != len(pi):
        return None

    def allowed(x):
        if preserve is None:
            return range(24)
        inside = preserve >> x & 1
        return [y for y in range(24) if (preserve >> y & 1) == inside]

    def consistent(x, y) -> bool:
        anchors = [a for a in pts if a in pi][:7]
        for A in itertools.combinations(anchors, 4):
            O = octad[sum(1 << a for a in A) | 1 << x]
            Oi = octad[sum(1 << pi[a] for a in A) | 1 << y]
            for z, w in pi.items():
                if (O >> z & 1) != (Oi >> w & 1):
                    return False
            if (O >> x & 1) != (Oi >> y & 1):
                return False
        return True

    rest = [x for x in pts if x not in pi]
    for x, y in pi.items():
        if preserve is not None and (preserve >> x & 1) != (preserve >> y & 1):
            return None

    def rec(i):
        if i == len(rest):
            perm = [pi[j] for j in range(24)]
            return perm if golay_permutation_preserves(perm) else None
        x = rest[i]
        used = set(pi.values())
        for y in allowed(x):
            if y in used or not consistent(x, y):
                continue
            pi[x] = y
            out = rec(i + 1)
            if out is not None:
                return out
            del pi[x]
        return None

    return rec(0)


def random_golay_automorphism(rng: random.Random, preserve: int | None = None) -> list[int]:
    """A Golay automorphism with random images of five points (5-transitivity)."""
    if preserve is None:
        src = list(range(5))
        dst = rng.sample(range(24), 5)
    else:
        supp = [j for j in range(24) if preserve >> j & 1]
        src = supp[:5]
        dst = rng.sample(supp, 5)
    perm = extend_golay_permutation(dict(zip(src, dst)), preserve)
    if perm is None:
        raise RuntimeError("no Golay automorphism extends the chosen points")
    return perm


def _compose(p, q):
    """``(p*q)(j) = p(q(j))``."""
    return tuple(p[j] for j in q)


def permutation_closure(gens, limit: int = 2_000_000) -> list[tuple[int, ...]]:
    """All elements of the permutation group generated by ``gens``."""
    ident = tuple(range(len(gens[0]))) if gens else ()
    seen = {ident}
    queue = deque([ident])
    gens = [tuple(g) for g in gens]
    while queue:
        p = queue.popleft()
        for g in gens:
            q = _compose(g, p)
            if q not in seen:
                seen.add(q)
                queue.append(q)
                if len(seen) > limit:
                    raise OverflowError("permutation group exceeds the limit")
    return list(seen)


@lru_cache(maxsize=None)
def m12_permutations(seed: int = 12) -> tuple[tuple[int, ...], ...]:
    """Generators of the stabilizer of the dodecad (order checked by closure)."""
    rng = random.Random(seed)
    gens = [tuple(random_golay_automorphism(rng, _DODECAD_MASK)) for _ in range(2)]
    while len(permutation_closure(gens)) != M12_ORDER:
        gens.append(tuple(random_golay_automorphism(rng, _DODECAD_MASK)))
    return tuple(gens)


@lru_cache(maxsize=None)
def _m12_elements() -> tuple[tuple[int, ...], ...]:
    return tuple(sorted(permutation_closure(m12_permutations())))


@lru_cache(maxsize=None)
def centralizer_permutations(seed: int = 240) -> tuple[tuple[int, ...], ...]:
    """Generators of the centralizer of tau in the dodecad stabilizer."""
    tau = tuple(TAU)
    if tau not in set(_m12_elements()):
        raise RuntimeError("tau does not stabilize the dodecad")
    cent = [p for p in _m12_elements() if _compose(p, tau) == _compose(tau, p)]
    if len(cent) != CENTRALIZER_ORDER:
        raise RuntimeError(f"centralizer has order {len(cent)}")
    rng = random.Random(seed)
    gens = [rng.choice(cent) for _ in range(2)]
    while len(permutation_closure(gens)) != len(cent):
        gens.append(rng.choice(cent))
    return tuple(gens)


@lru_cache(maxsize=None)
def m24_permutations(seed: int = 24) -> tuple[tuple[int, ...], ...]:
    rng = random.Random(seed)
    return tuple(tuple(random_golay_automorphism(rng)) for _ in range(2))


# ---- Weyl groups ---------------------------------------------------------------

def _simple_roots(name: str) -> list[list[int]]:
    """Simple roots of the root system, in ambient coordinates."""
    if name.startswith("D"):
        n = int(name[1])
        k = 24 // n
        roots = []
        for b in range(k):
            o = b * n
            for i in range(n - 1):
                v = [0] * 24
                v[o + i], v[o + i + 1] = 1, -1
                roots.append(v)
            v = [0] * 24
            v[o + n - 2], v[o + n - 1] = 1, 1
            roots.append(v)
        return roots
    # A_n and E6 blocks are written in root coordinates
    return [[int(i == j) for i in range(24)] for j in range(24)]


def weyl_generators(L, roots) -> list[Isometry]:
    G = L.ambient_gram.entries
    out = []
    for a in roots:
        Ga = [sum(G[r][c] * a[c] for c in range(24)) for r in range(24)]
        norm = sum(a[r] * Ga[r] for r in range(24))
        M = [[Fraction(int(r == c)) - Fraction(2 * a[r] * Ga[c], norm) for c in range(24)] for r in range(24)]
        out.append(Isometry.from_ambient(L, M))
    return out


_WEYL_ORDER = {
    "A6^4": (math.factorial(7) ** 4, False),
    "D6^4": ((2 ** 5 * math.factorial(6)) ** 4, True),
    "E6^4": (51840 ** 4, False),
    "A4^6": (math.factorial(5) ** 6, False),
    "D4^6": ((2 ** 3 * math.factorial(4)) ** 6, True),
    "A3^8": (math.factorial(4) ** 8, False),
    "A2^12": (math.factorial(3) ** 12, False),
}


# ---- fixtures ---------------------------------------------------------------------

@dataclass
class GroupFixture:
    name: str
    generators: list[Isometry]
    order: int
    description: str
    seed_norms: tuple[int, ...] = (2,)
    ambient_generators: list[Isometry] | None = None
    ambient_order: int | None = None
    _group: GeneratedGroup | None = field(default=None, repr=False)
    _ambient: GeneratedGroup | None = field(default=None, repr=False)

    def group(self) -> GeneratedGroup:
        if self._group is None:
            L = self.generators[0].lattice
            self._group = group_build(L, self.generators, self.seed_norms, order=self.order)
        return self._group

    def ambient_group(self) -> GeneratedGroup:
        """A group known to contain O(L)_h (defaults to H)."""
        if self.ambient_generators is None:
            return self.group()
        if self._ambient is None:
            L = self.ambient_generators[0].lattice
            self._ambient = group_build(L, self.ambient_generators, self.seed_norms, order=self.ambient_order)
        return self._ambient


def golay_sign_changes(L, words=None) -> list[Isometry]:
    words = build_golay().generator_matrix if words is None else words
    ident = list(range(24))
    return [Isometry.permutation(L, ident, [-1 if w >> j & 1 else 1 for j in range(24)]) for w in words]


def _word_image(perm, w: int) -> int:
    out = 0
    for j in range(24):
        if w >> j & 1:
            out |= 1 << perm[j]
    return out


def _gf2_rank(words) -> int:
    basis: dict[int, int] = {}
    for w in words:
        while w:
            top = w.bit_length() - 1
            if top not in basis:
                basis[top] = w
                break
            w ^= basis[top]
    return len(basis)


def module_generators(perms) -> list[int]:
    """Few codewords whose images under ``perms`` span the Golay code."""
    chosen, images = [], set()
    for w in build_golay().generator_matrix:
        if _gf2_rank(images | {w}) == _gf2_rank(images):
            continue
        chosen.append(w)
        queue = deque([w])
        images.add(w)
        while queue:
            x = queue.popleft()
            for p in perms:
                y = _word_image(p, x)
                if y not in images:
                    images.add(y)
                    queue.append(y)
        if _gf2_rank(images) == 12:
            return chosen
    raise RuntimeError("codewords do not generate the code")


def _perm_isometries(L, perms) -> list[Isometry]:
    return [Isometry.permutation(L, list(p)) for p in perms]


@lru_cache(maxsize=None)
def group_fixture(name: str) -> GroupFixture:
    name = canonical_name(name)
    L = niemeier_lattice(name)
    if name == "Leech":
        # the permutation parts normalize the sign changes, so a few sign
        # generators suffice once their conjugates span the code
        m12, cent = m12_permutations(), centralizer_permutations()
        gens = golay_sign_changes(L, module_generators(m12)) + _perm_isometries(L, m12)
        amb = golay_sign_changes(L, module_generators(cent)) + _perm_isometries(L, cent)
        return GroupFixture(name, gens, 4096 * M12_ORDER,
                            "Golay sign changes with the dodecad stabilizer",
                            seed_norms=(4,), ambient_generators=amb,
                            ambient_order=4096 * CENTRALIZER_ORDER)
    if name == "A1^24":
        m24 = m24_permutations()
        gens = golay_sign_changes(L, module_generators(m24)) + _perm_isometries(L, m24)
        return GroupFixture(name, gens, 4096 * M24_ORDER, "Golay sign changes with M24")
    gens = weyl_generators(L, _simple_roots(name.split("^")[0]))
    order, has_minus = _WEYL_ORDER[name]
    if not has_minus:
        gens.append(Isometry(L, -np.eye(24, dtype=np.int64)))
        order *= 2
    return GroupFixture(name, gens, order, "Weyl group of the root system with -I")
