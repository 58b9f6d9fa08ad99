"""Finite groups of lattice isometries given by generators.

Elements are exact matrices acting on scaled ambient coordinates (see
:mod:`siegeltheta.lattice`).  Groups carry a stabilizer chain whose base
points are lattice vectors; it is built with randomized Schreier-Sims and
either certified by a known order or verified by sifting every Schreier
generator.
"""

from __future__ import annotations

import hashlib
import logging
import math
import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .lattice import Lattice, _lcm_den, short_vectors

log = logging.getLogger(__name__)

__all__ = [
    "NotIsometry",
    "UnfaithfulAction",
    "NotClosed",
    "PredicateInconsistent",
    "Isometry",
    "GeneratedGroup",
    "TupleOrbitIndex",
    "group_build",
    "orbit_index",
    "pointwise_stabilizer",
    "subgroup_by_predicate",
    "enumerate_closure",
    "compute_OLh",
    "OLhResult",
    "multiplier",
]


class NotIsometry(ValueError):
    pass


class UnfaithfulAction(RuntimeError):
    pass


class NotClosed(ValueError):
    pass


class PredicateInconsistent(RuntimeError):
    pass


def _vkey(v: np.ndarray) -> bytes:
    return np.ascontiguousarray(v, dtype=np.int64).tobytes()


class Isometry:
    """Exact linear isometry ``x -> (num @ x) / den`` of a lattice."""

    __slots__ = ("lattice", "num", "den", "_inv")

    def __init__(self, lattice: Lattice, num: np.ndarray, den: int = 1):
        if den != 1:
            g = math.gcd(int(den), int(np.gcd.reduce(num.ravel())) if num.size else 0)
            if g > 1:
                num = num // g
                den //= g
        self.lattice = lattice
        self.num = num
        self.num.setflags(write=False)
        self.den = int(den)
        self._inv = None

    # ---- constructors -------------------------------------------------
    @classmethod
    def identity(cls, lattice: Lattice) -> "Isometry":
        return cls(lattice, np.eye(lattice.rank, dtype=np.int64))

    @classmethod
    def from_ambient(cls, lattice: Lattice, M, check: bool = True) -> "Isometry":
        """Build from a rational ambient matrix (rows), validating it."""
        M = [[Fraction(v) for v in r] for r in M]
        m = lattice.rank
        if len(M) != m or any(len(r) != m for r in M):
            raise NotIsometry("matrix has the wrong shape")
        den = _lcm_den(v for r in M for v in r)
        if check:
            Mn = np.array([[int(v * den) for v in r] for r in M], dtype=object)
            Gn, _ = lattice.ambient_gram_int
            if not np.array_equal(Mn.T @ Gn @ Mn, Gn * (den * den)):
                raise NotIsometry("matrix does not preserve the Gram form")
            Bn, bd = lattice.basis_inverse_int
            Bs = lattice.basis_scaled.astype(object)
            img = Bn @ Mn @ Bs
            if np.any(img % (bd * den * lattice.den) != 0):
                raise NotIsometry("matrix does not map the lattice into itself")
        den = _lcm_den(v for r in M for v in r)
        num = np.array([[int(v * den) for v in r] for r in M], dtype=np.int64)
        return cls(lattice, num, den)

    @classmethod
    def permutation(cls, lattice: Lattice, perm: Sequence[int], signs: Sequence[int] | None = None,
                    check: bool = True) -> "Isometry":
        """Signed coordinate permutation: ``e_j -> signs[j] e_{perm[j]}``."""
        m = lattice.rank
        M = np.zeros((m, m), dtype=np.int64)
        for j, p in enumerate(perm):
            M[p, j] = 1 if signs is None else signs[j]
        if check:
            return cls.from_ambient(lattice, M.tolist())
        return cls(lattice, M)

    # ---- algebra ------------------------------------------------------
    def __matmul__(self, other: "Isometry") -> "Isometry":
        """Composition: ``(self @ other)(x) = self(other(x))``."""
        return Isometry(self.lattice, self.num @ other.num, self.den * other.den)

    __mul__ = __matmul__

    def inverse(self) -> "Isometry":
        if self._inv is None:
            if self.den == 1 and _is_signed_permutation(self.num):
                inv = Isometry(self.lattice, np.ascontiguousarray(self.num.T))
            else:
                # M^-1 = G^-1 M^T G, in exact integers
                Gn, gd = self.lattice.ambient_gram_int
                Gi, gid = self.lattice.ambient_gram_inverse_int
                N = Gi @ self.num.T.astype(object) @ Gn
                d = gid * gd * self.den
                g = math.gcd(d, *(int(v) for v in N.ravel()))
                inv = Isometry(self.lattice, (N // g).astype(np.int64), d // g)
            inv._inv = self
            self._inv = inv
        return self._inv

    def __pow__(self, k: int) -> "Isometry":
        if k < 0:
            return self.inverse() ** (-k)
        result = Isometry.identity(self.lattice)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Image of scaled vectors (a single row or a 2-D array of rows)."""
        X = np.asarray(X, dtype=np.int64)
        Y = X @ self.num.T
        if self.den != 1:
            if np.any(Y % self.den):
                raise NotIsometry("image is not a lattice vector")
            Y //= self.den
        return Y

    def is_identity(self) -> bool:
        return self.den == 1 and np.array_equal(self.num, np.eye(self.lattice.rank, dtype=np.int64))

    def ambient_matrix(self) -> list[list[Fraction]]:
        return [[Fraction(int(v), self.den) for v in r] for r in self.num]

    def det(self) -> int:
        d = round(np.linalg.det(self.num.astype(float)) / self.den ** self.lattice.rank)
        return int(d)

    @property
    def key(self) -> bytes:
        return self.num.tobytes() + self.den.to_bytes(8, "little")

    def __eq__(self, other):
        return isinstance(other, Isometry) and self.den == other.den and np.array_equal(self.num, other.num)

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"<Isometry den={self.den} identity={self.is_identity()}>"


def _is_signed_permutation(M: np.ndarray) -> bool:
    A = np.abs(M)
    return bool(np.all((A == 0) | (A == 1)) and np.all(A.sum(axis=0) == 1) and np.all(A.sum(axis=1) == 1))


# ---- orbits with Schreier trees ----------------------------------------------

class _Orbit:
    """Orbit of a single vector with a Schreier tree (BFS, so shallow)."""

    __slots__ = ("root", "gens", "ginv", "keys", "points", "parent", "via", "_cache")

    def __init__(self, root: np.ndarray, gens: list[Isometry]):
        self.root = np.asarray(root, dtype=np.int64)
        self.gens = list(gens)
        self.ginv = [g.inverse() for g in self.gens]
        self.keys: dict[bytes, int] = {}
        self.points: list[np.ndarray] = []
        self.parent: list[int] = []
        self.via: list[int] = []
        self._cache: dict[int, Isometry] = {}
        self._add_point(self.root, -1, -1)
        self._close(0)

    def _add_point(self, v, parent, via):
        self.keys[_vkey(v)] = len(self.points)
        self.points.append(v)
        self.parent.append(parent)
        self.via.append(via)

    def _close(self, start: int):
        i = start
        while i < len(self.points):
            batch = np.array(self.points[i:])
            first = i
            i = len(self.points)
            for j, g in enumerate(self.gens):
                imgs = g.apply(batch)
                for r, v in enumerate(imgs):
                    k = _vkey(v)
                    if k not in self.keys:
                        self._add_point(v, first + r, j)

    def add_generator(self, g: Isometry):
        self.gens.append(g)
        self.ginv.append(g.inverse())
        self._cache.clear()
        j = len(self.gens) - 1
        n0 = len(self.points)
        imgs = g.apply(np.array(self.points))
        for r, v in enumerate(imgs):
            k = _vkey(v)
            if k not in self.keys:
                self._add_point(v, r, j)
        if len(self.points) > n0:
            self._close(n0)

    def __len__(self):
        return len(self.points)

    def index(self, v) -> int | None:
        return self.keys.get(_vkey(v))

    def strip(self, g: Isometry, idx: int) -> Isometry:
        """``u_idx^{-1} @ g`` where ``u_idx`` maps the root to point ``idx``."""
        while idx:
            g = self.ginv[self.via[idx]] @ g
            idx = self.parent[idx]
        return g

    def transversal(self, idx: int, lattice: Lattice) -> Isometry:
        u = self._cache.get(idx)
        if u is None:
            u = Isometry.identity(lattice)
            path = []
            j = idx
            while j:
                path.append(self.via[j])
                j = self.parent[j]
            for v in reversed(path):
                u = self.gens[v] @ u
            if len(self._cache) < 4096:
                self._cache[idx] = u
        return u


class _ProductReplacement:
    def __init__(self, gens: list[Isometry], rng: random.Random, slots: int = 10, warmup: int = 60):
        self.rng = rng
        lat = gens[0].lattice
        self.state = [gens[i % len(gens)] for i in range(max(slots, len(gens)))]
        self.acc = Isometry.identity(lat)
        for _ in range(warmup):
            self()

    def __call__(self) -> Isometry:
        s = self.state
        i, j = self.rng.sample(range(len(s)), 2)
        if self.rng.random() < 0.5:
            s[i] = s[i] @ (s[j] if self.rng.random() < 0.5 else s[j].inverse())
        else:
            s[i] = (s[j] if self.rng.random() < 0.5 else s[j].inverse()) @ s[i]
        self.acc = self.acc @ s[i]
        return self.acc


class GeneratedGroup:
    """A group of isometries with a stabilizer chain.

    ``levels[i]`` is the orbit of ``base[i]`` under the i-th stabilizer in
    the chain; ``order`` is the product of the orbit lengths.
    """

    def __init__(self, lattice: Lattice, generators: Iterable[Isometry] = (), *,
                 candidates: np.ndarray | None = None, order: int | None = None,
                 seed: int = 0, verify: bool = True, _source=None):
        self.lattice = lattice
        self.generators = [g for g in generators if not g.is_identity()]
        for g in self.generators:
            if g.lattice is not lattice:
                raise ValueError("generator belongs to a different lattice")
        self.candidates = _default_candidates(lattice) if candidates is None else np.asarray(candidates, np.int64)
        self.base: list[np.ndarray] = []
        self.levels: list[_Orbit] = []
        self.strong: list[Isometry] = []
        self.rng = random.Random(seed)
        self.verified = False
        if _source is None and not self.generators:
            self.verified = True
            if order not in (None, 1):
                raise ValueError("trivial generating set with nontrivial order")
            return
        source = _source if _source is not None else _ProductReplacement(self.generators, self.rng)
        self._schreier_sims(source, order)
        if order is not None:
            self.verified = True
        elif verify:
            self._verify()
        if not self.generators:
            self.generators = list(self.strong)

    # ---- chain construction ---------------------------------------------
    @property
    def order(self) -> int:
        return math.prod(len(o) for o in self.levels)

    def _sift(self, g: Isometry, start: int = 0) -> tuple[int, Isometry]:
        for i in range(start, len(self.levels)):
            lvl = self.levels[i]
            idx = lvl.index(g.apply(lvl.root))
            if idx is None:
                return i, g
            g = lvl.strip(g, idx)
        return len(self.levels), g

    def _add_strong(self, h: Isometry, depth: int):
        if depth == len(self.levels):
            imgs = h.apply(self.candidates)
            moved = np.nonzero(np.any(imgs != self.candidates, axis=1))[0]
            if len(moved) == 0:
                raise UnfaithfulAction("a non-identity element fixes every candidate base point")
            b = self.candidates[moved[0]]
            self.base.append(b)
            self.levels.append(_Orbit(b, [h]))
            for i in range(depth):
                self.levels[i].add_generator(h)
        else:
            for i in range(depth + 1):
                self.levels[i].add_generator(h)
        self.strong.append(h)

    def _schreier_sims(self, source, target: int | None, patience: int = 40):
        trivial = 0
        while True:
            if target is not None:
                cur = self.order
                if cur == target:
                    return
                if cur > target:
                    raise ValueError(f"chain order {cur} exceeds the stated order {target}")
            elif trivial >= patience:
                return
            g = source()
            depth, h = self._sift(g)
            if depth == len(self.levels) and h.is_identity():
                trivial += 1
                continue
            trivial = 0
            self._add_strong(h, depth)

    def _verify(self):
        """Sift every Schreier generator; extend the chain until all are trivial."""
        while True:
            bad = self._find_nontrivial_schreier()
            if bad is None:
                self.verified = True
                return
            depth, h = bad
            self._add_strong(h, depth)

    def _find_nontrivial_schreier(self):
        lat = self.lattice
        for i in range(len(self.levels) - 1, -1, -1):
            lvl = self.levels[i]
            for p in range(len(lvl)):
                u = lvl.transversal(p, lat)
                for j, s in enumerate(lvl.gens):
                    q = lvl.index(s.apply(lvl.points[p]))
                    if lvl.parent[q] == p and lvl.via[q] == j:
                        continue
                    sg = lvl.strip(s @ u, q)
                    depth, h = self._sift(sg, i + 1)
                    if depth < len(self.levels) or not h.is_identity():
                        return depth, h
        return None

    # ---- queries ----------------------------------------------------------
    def contains(self, g: Isometry) -> bool:
        depth, h = self._sift(g)
        return depth == len(self.levels) and h.is_identity()

    def random_element(self, rng: random.Random | None = None) -> Isometry:
        """Uniformly random element from the chain."""
        rng = rng or self.rng
        g = Isometry.identity(self.lattice)
        for lvl in self.levels:
            g = g @ lvl.transversal(rng.randrange(len(lvl)), self.lattice)
        return g

    def elements(self):
        """Iterate over all elements (products of transversal elements)."""
        lat = self.lattice

        def rec(i, acc):
            if i == len(self.levels):
                yield acc
                return
            lvl = self.levels[i]
            for p in range(len(lvl)):
                yield from rec(i + 1, acc @ lvl.transversal(p, lat))

        yield from rec(0, Isometry.identity(lat))

    def orbit(self, v) -> _Orbit:
        return _Orbit(np.asarray(v, dtype=np.int64), self.generators)

    def is_trivial(self) -> bool:
        return self.order == 1

    @property
    def content_hash(self) -> str:
        h = hashlib.sha256(self.lattice.content_hash.encode())
        for g in self.generators:
            h.update(g.key)
        return h.hexdigest()[:16]

    def __repr__(self):
        return f"<GeneratedGroup order={self.order} gens={len(self.generators)} base={len(self.base)}>"

    @classmethod
    def from_source(cls, lattice, source: Callable[[], Isometry], order: int, candidates=None):
        """Chain for a group of known order from a source of random elements."""
        if order == 1:
            return cls(lattice, (), candidates=candidates)
        return cls(lattice, (), candidates=candidates, order=order, _source=source)


def _default_candidates(lattice: Lattice) -> np.ndarray:
    B = lattice.basis_scaled.T  # rows = basis vectors, scaled
    return np.ascontiguousarray(B, dtype=np.int64)


def group_build(lattice: Lattice, generators: Iterable[Isometry], seed_norms: Sequence[int] = (),
                order: int | None = None, seed: int = 0) -> GeneratedGroup:
    """Stabilizer chain over the short vectors of ``seed_norms`` (then basis vectors)."""
    parts = [short_vectors(lattice, t) for t in seed_norms]
    parts.append(_default_candidates(lattice))
    cand = np.concatenate([p for p in parts if len(p)])
    return GeneratedGroup(lattice, list(generators), candidates=cand, order=order, seed=seed)


def enumerate_closure(generators: Sequence[Isometry], limit: int = 10 ** 6) -> int:
    """Count group elements by breadth-first closure (independent of any chain)."""
    if not generators:
        return 1
    lat = generators[0].lattice
    start = Isometry.identity(lat)

    def digest(g):
        return hashlib.blake2b(g.key, digest_size=16).digest()

    seen = {digest(start)}
    frontier = [start]
    while frontier:
        nxt = []
        for g in frontier:
            for s in generators:
                h = s @ g
                d = digest(h)
                if d not in seen:
                    seen.add(d)
                    nxt.append(h)
                    if len(seen) > limit:
                        raise OverflowError("group larger than the enumeration limit")
        frontier = nxt
    return len(seen)


# ---- orbit indices -----------------------------------------------------------

@dataclass
class TupleOrbitIndex:
    """Partition of a finite H-invariant vector set into orbits.

    ``rep[i]`` is the index of the canonical (minimal) representative of the
    orbit of ``X[i]``; :meth:`witness` returns ``sigma`` with
    ``sigma(X[i]) = X[rep[i]]``.
    """

    group: GeneratedGroup
    X: np.ndarray
    keys: dict
    rep: np.ndarray
    parent: np.ndarray
    via: np.ndarray
    perms: list
    _wcache: dict = field(default_factory=dict)

    def index(self, v) -> int | None:
        return self.keys.get(_vkey(v))

    @property
    def representatives(self) -> list[int]:
        return sorted(set(int(r) for r in self.rep))

    def orbit_size(self, r: int) -> int:
        return int(np.count_nonzero(self.rep == self.rep[r]))

    def orbit_sizes(self) -> dict[int, int]:
        reps, counts = np.unique(self.rep, return_counts=True)
        return {int(r): int(c) for r, c in zip(reps, counts)}

    def witness(self, i: int) -> Isometry:
        w = self._wcache.get(i)
        if w is not None:
            return w
        lat = self.group.lattice
        gens = self.group.generators
        w = Isometry.identity(lat)
        j = i
        while self.parent[j] >= 0:
            w = gens[self.via[j]].inverse() @ w
            j = int(self.parent[j])
        if len(self._wcache) < 100000:
            self._wcache[i] = w
        return w

    def orbit_transversal(self, i: int) -> Isometry:
        """``u`` with ``u(X[rep[i]]) = X[i]``."""
        return self.witness(i).inverse()


def _lookup(keys: dict, Y: np.ndarray) -> np.ndarray:
    out = np.empty(len(Y), dtype=np.int64)
    for r, v in enumerate(Y):
        k = keys.get(v.tobytes())
        if k is None:
            raise NotClosed("a generator maps the vector set outside itself")
        out[r] = k
    return out


def orbit_index(H: GeneratedGroup, X: np.ndarray, canonical: bool = True) -> TupleOrbitIndex:
    """Orbits of ``H`` on ``X`` with canonical representatives and witnesses."""
    X = np.ascontiguousarray(X, dtype=np.int64)
    if canonical and len(X):
        X = np.ascontiguousarray(X[H.lattice.canonical_order(X)])
    n = len(X)
    keys = {row.tobytes(): i for i, row in enumerate(X)}
    perms = [_lookup(keys, g.apply(X)) for g in H.generators] if n else []
    rep = np.full(n, -1, dtype=np.int64)
    parent = np.full(n, -1, dtype=np.int64)
    via = np.full(n, -1, dtype=np.int64)
    # X is sorted, so scanning in order makes the first unseen index the orbit minimum
    for start in range(n):
        if rep[start] >= 0:
            continue
        rep[start] = start
        queue = deque([start])
        while queue:
            p = queue.popleft()
            for j, perm in enumerate(perms):
                q = int(perm[p])
                if rep[q] < 0:
                    rep[q] = start
                    parent[q] = p
                    via[q] = j
                    queue.append(q)
    return TupleOrbitIndex(H, X, keys, rep, parent, via, perms)


def pointwise_stabilizer(H: GeneratedGroup, fixed: Sequence[np.ndarray], seed: int = 0) -> GeneratedGroup:
    """Generators and chain of the pointwise stabilizer of ``fixed`` in ``H``."""
    G = H
    rng = random.Random(seed)
    for x in fixed:
        if G.is_trivial():
            break
        x = np.asarray(x, dtype=np.int64)
        orb = G.orbit(x)
        target, r = divmod(G.order, len(orb))
        if r:
            raise RuntimeError("orbit length does not divide the group order")
        G = _stabilizer_from_orbit(G, orb, target, rng)
    return G


def _stabilizer_from_orbit(G: GeneratedGroup, orb: _Orbit, target: int, rng) -> GeneratedGroup:
    lat = G.lattice

    def source():
        g = G.random_element(rng)
        idx = orb.index(g.apply(orb.root))
        return orb.strip(g, idx)

    return GeneratedGroup.from_source(lat, source, target, candidates=G.candidates)


@dataclass
class SubgroupResult:
    group: GeneratedGroup
    coset_reps: list[Isometry]  # right coset representatives of K in H
    index: int


def subgroup_by_predicate(H: GeneratedGroup, member: Callable[[Isometry], bool],
                          orbit_key: Callable[[Isometry], object] | None = None,
                          seed: int = 0, spot_checks: int = 8,
                          max_elements: int = 200000) -> SubgroupResult:
    """The subgroup ``K = {s in H : member(s)}`` and right coset representatives.

    With ``orbit_key`` (``key(g)`` = canonical form of ``g`` applied to some
    object whose stabilizer is ``K``) the cosets are found by a breadth-first
    sweep of that orbit.  Without it, the elements of ``H`` are listed, which
    is only feasible for small groups.
    """
    lat = H.lattice
    rng = random.Random(seed)
    if orbit_key is None:
        return _subgroup_by_listing(H, member, max_elements, rng)

    ident = Isometry.identity(lat)
    nodes: dict = {orbit_key(ident): ident}
    queue = deque([ident])
    while queue:
        t = queue.popleft()
        for s in H.generators:
            u = s @ t
            k = orbit_key(u)
            if k not in nodes:
                nodes[k] = u
                queue.append(u)
    index = len(nodes)
    target, r = divmod(H.order, index)
    if r:
        raise PredicateInconsistent("orbit length does not divide |H|")

    def source():
        g = H.random_element(rng)
        return nodes[orbit_key(g)].inverse() @ g

    K = GeneratedGroup.from_source(lat, source, target, candidates=H.candidates)
    _spot_check(K, member, spot_checks, rng)
    reps = [t.inverse() for t in nodes.values()]
    return SubgroupResult(K, reps, index)


def _spot_check(K: GeneratedGroup, member, n: int, rng):
    gens = K.generators
    for g in gens[:n]:
        if not member(g):
            raise PredicateInconsistent("a computed subgroup generator fails the predicate")
    for _ in range(n if len(gens) > 1 else 0):
        a, b = rng.choice(gens), rng.choice(gens)
        if not member(a @ b.inverse()):
            raise PredicateInconsistent("predicate is not closed under products")


def _subgroup_by_listing(H, member, max_elements, rng) -> SubgroupResult:
    if H.order > max_elements:
        raise OverflowError("group too large to list; supply an orbit_key")
    elements = list(H.elements())
    reps: list[Isometry] = []
    rep_inv: list[Isometry] = []
    kelems = []
    for g in elements:
        if member(g):
            kelems.append(g)
        for r in rep_inv:
            if member(g @ r):
                break
        else:
            reps.append(g)
            rep_inv.append(g.inverse())
    lat = H.lattice
    target = len(kelems)
    if target * len(reps) != H.order:
        raise PredicateInconsistent("coset count times |K| differs from |H|")
    K = GeneratedGroup.from_source(lat, lambda: rng.choice(kelems), target, candidates=H.candidates)
    _spot_check(K, member, 8, rng)
    return SubgroupResult(K, reps, len(reps))


# ---- stabilizer of the span of h -------------------------------------------------

def harmonic_int_array(h, return_dens: bool = False):
    """``(n, m, 4)`` integer array; each h_j scaled by a positive integer.

    Scaling individual vectors leaves their span unchanged, which is all the
    span computations below need.
    """
    from .exactnum import ThetaScalar

    n, m = h.degree, h.dim
    out = np.zeros((n, m, 4), dtype=np.int64)
    dens = []
    for j, v in enumerate(h.vectors):
        den = _lcm_den(p for x in v for p in ThetaScalar.coerce(x).parts)
        dens.append(den)
        for r, x in enumerate(v):
            out[j, r] = [int(p * den) for p in ThetaScalar.coerce(x).parts]
    return (out, dens) if return_dens else out


def _span_key(A: np.ndarray) -> tuple:
    """Canonical reduced echelon form of the rows of ``A`` (shape ``(n, m, 4)``).

    Fraction-free elimination over Z[i, r6]; each row is finally scaled so
    its pivot is a positive integer and the row content is 1.
    """
    from .exactnum import zadj, zmul, zsub

    rows = []
    for j in range(A.shape[0]):
        nz = np.nonzero(np.any(A[j] != 0, axis=1))[0]
        rows.append({int(c): tuple(int(t) for t in A[j, c]) for c in nz})
    pivots = []
    for i in range(len(rows)):
        # choose the row with the smallest leading column among rows[i:]
        best = None
        for r in range(i, len(rows)):
            if rows[r]:
                lead = min(rows[r])
                if best is None or lead < best[0]:
                    best = (lead, r)
        if best is None:
            break
        p, r = best
        rows[i], rows[r] = rows[r], rows[i]
        piv = rows[i][p]
        for r2 in range(len(rows)):
            if r2 == i or p not in rows[r2]:
                continue
            f = rows[r2][p]
            new = {}
            for c in set(rows[r2]) | set(rows[i]):
                a = zmul(piv, rows[r2].get(c, (0, 0, 0, 0)))
                b = zmul(f, rows[i].get(c, (0, 0, 0, 0)))
                v = zsub(a, b)
                if any(v):
                    new[c] = v
            rows[r2] = new
        pivots.append(p)
    key = []
    for i, p in enumerate(pivots):
        adj, N = zadj(rows[i][p])
        if N < 0:
            adj, N = tuple(-t for t in adj), -N
        items = sorted((c, zmul(adj, v)) for c, v in rows[i].items())
        g = 0
        for _, v in items:
            for t in v:
                g = math.gcd(g, t)
        key.append(tuple((c, tuple(t // g for t in v)) for c, v in items))
    return tuple(key)


def _apply_to_h(g: Isometry, H4: np.ndarray) -> np.ndarray:
    # g h_j up to the positive factor 1/den
    return np.einsum("ab,nbc->nac", g.num, H4)


@dataclass
class OLhResult:
    group: GeneratedGroup            # O(L)_h as a subgroup of the ambient group
    coset_reps: list[Isometry]       # right coset representatives of O(L)_h in the ambient group
    multipliers: list[list[list]]    # m_sigma for each generator of O(L)_h
    index: int


def span_stabilizer_key(h):
    """Return ``key(g)``: canonical form of ``span(g h)``."""
    H4 = harmonic_int_array(h)
    return lambda g: _span_key(_apply_to_h(g, H4))


def multiplier(g: Isometry, h) -> list[list]:
    """``m`` with ``(g^{-1} h_1..g^{-1} h_n) = (h_1..h_n) m``; raises if g does not preserve span(h)."""
    from .exactnum import ThetaScalar, ZERO

    n = h.degree
    ginv = g.inverse().ambient_matrix()
    Hv = [[ThetaScalar.coerce(x) for x in v] for v in h.vectors]
    m_dim = len(Hv[0])
    img = []
    for v in Hv:
        w = []
        for r in range(m_dim):
            acc = ZERO
            for c in range(m_dim):
                if ginv[r][c] and v[c]:
                    acc = acc + v[c] * ginv[r][c]
            w.append(acc)
        img.append(w)
    # solve sum_i h_i m[i][j] = img_j using n independent coordinates
    coords = _independent_coords(Hv)
    A = [[Hv[i][r] for i in range(n)] for r in coords]   # n x n
    Ainv = _scalar_inverse(A)
    M = [[sum((Ainv[i][t] * img[j][coords[t]] for t in range(n)), ZERO) for j in range(n)] for i in range(n)]
    for j in range(n):
        for r in range(m_dim):
            lhs = sum((Hv[i][r] * M[i][j] for i in range(n)), ZERO)
            if lhs != img[j][r]:
                raise ValueError("element does not preserve span(h)")
    return M


def _independent_coords(Hv) -> list[int]:
    from .exactnum import det_small

    n, m = len(Hv), len(Hv[0])
    chosen: list[int] = []
    for r in range(m):
        trial = chosen + [r]
        k = len(trial)
        sub = [[Hv[i][c] for c in trial] for i in range(n)]
        if _rank(sub) == k:
            chosen = trial
            if k == n:
                return chosen
    raise ValueError("h vectors are linearly dependent")


def _rank(rows) -> int:
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = rows[rank][c].inverse()
        for r in range(len(rows)):
            if r != rank and rows[r][c]:
                f = rows[r][c] * inv
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def _scalar_inverse(A):
    from .exactnum import ONE, ZERO

    n = len(A)
    M = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(A)]
    for c in range(n):
        piv = next(r for r in range(c, n) if M[r][c])
        M[c], M[piv] = M[piv], M[c]
        inv = M[c][c].inverse()
        M[c] = [x * inv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[c])]
    return [r[n:] for r in M]


def compute_OLh(L: Lattice, h, ambient_group: GeneratedGroup, seed: int = 0) -> OLhResult:
    """Subgroup of ``ambient_group`` preserving the complex span of ``h``."""
    key = span_stabilizer_key(h)
    k0 = key(Isometry.identity(L))
    res = subgroup_by_predicate(ambient_group, lambda g: key(g) == k0, orbit_key=key, seed=seed)
    mults = [multiplier(g, h) for g in res.group.generators]
    return OLhResult(res.group, res.coset_reps, mults, res.index)
