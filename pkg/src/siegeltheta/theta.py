"""Fourier coefficients of theta series with harmonic coefficients.

For an even lattice ``L``, an isotropic tuple ``h`` and a target ``T`` the
coefficient is ``a(T) = sum over x in L^n with Q(x) = T of det(Q(x, h))^k``.
The engine groups the x into orbits of a finite group H of isometries:

* ``build_representatives`` builds orbit representatives of the tuples one
  component at a time, factoring the candidates for the next component by the
  pointwise stabilizer of the prefix;
* ``double_cosets`` merges those orbits along the right action of O(T);
* the harmonic part is averaged over the cosets of K = (span(h) stabilizer)
  in H, reusing one list of coset representatives for every x.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .autform import FormAutGroup, aut_of_form, det_character_trivial
from .exactnum import ZERO, ThetaScalar, det_small, from_int_tuple, zdet, zpow
from .groups import (
    GeneratedGroup,
    Isometry,
    OLhResult,
    TupleOrbitIndex,
    compute_OLh,
    harmonic_int_array,
    orbit_index,
    pointwise_stabilizer,
)
from .lattice import GramMatrix, Lattice, constrained_vectors, min_norm, short_vectors
from .modular import det_power_sum

log = logging.getLogger(__name__)

__all__ = [
    "NotInGamma",
    "NonRationalResult",
    "BudgetExceeded",
    "AllZero",
    "CoefficientTask",
    "TupleRep",
    "DoubleCosetRep",
    "CoefficientResult",
    "build_representatives",
    "canonicalize",
    "double_cosets",
    "harmonic_value",
    "coefficient",
    "coefficient_result",
    "coefficient_bruteforce",
    "gamma_count",
    "normalize_column",
    "vanishing_order",
    "VanishingOrder",
]


class NotInGamma(ValueError):
    pass


class NonRationalResult(ArithmeticError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class AllZero(ValueError):
    pass


# ---- task ----------------------------------------------------------------------

@dataclass
class CoefficientTask:
    L: Lattice
    H: GeneratedGroup
    h: object  # HarmonicSpec
    k: int
    T: GramMatrix
    OT: FormAutGroup | None = None
    OLh: OLhResult | None = None

    def __post_init__(self):
        if not isinstance(self.T, GramMatrix):
            self.T = GramMatrix(self.T)
        if self.T.n != self.h.degree:
            raise ValueError("T and h have different degrees")
        if not (self.T.is_even() and self.T.is_positive_definite()):
            raise ValueError("T must be even and positive definite")
        if self.H.lattice is not self.L:
            raise ValueError("H acts on a different lattice")
        if self.OT is None:
            self.OT = aut_of_form(self.T)
        if self.OLh is None:
            self.OLh = compute_OLh(self.L, self.h, self.H)
        self.T_int = self.T.to_int_array()

    @property
    def n(self) -> int:
        return self.T.n

    def character_obstruction(self) -> str | None:
        """Reason the coefficient vanishes identically, if any."""
        if not det_character_trivial(self.OT, self.k):
            return "det(eps)^k = -1 for some eps in O(T)"
        for m in self.OLh.multipliers:
            if det_small(m) ** self.k != ThetaScalar(1):
                return "det(m_sigma)^k != 1 for some sigma stabilizing span(h)"
        return None

    @property
    def content_hash(self) -> str:
        d = hashlib.sha256()
        d.update(self.L.content_hash.encode())
        d.update(self.H.content_hash.encode())
        d.update(repr([[str(x) for x in v] for v in self.h.vectors]).encode())
        d.update(f"{self.k}|{self.T}".encode())
        return d.hexdigest()[:16]


@dataclass
class TupleRep:
    """A canonical tuple (rows) with its pointwise stabilizer in H."""

    vectors: np.ndarray
    stab: GeneratedGroup
    parent: "TupleRep | None" = None
    index: TupleOrbitIndex | None = None
    children: dict = field(default_factory=dict)
    leaf_id: int = -1

    @property
    def stab_order(self) -> int:
        return self.stab.order


@dataclass
class DoubleCosetRep:
    x: TupleRep
    coset_size: int
    harmonic_sum: ThetaScalar
    members: list = field(default_factory=list)  # leaf ids of the H-orbits in H x O(T)


@dataclass
class CoefficientResult:
    value: Fraction
    level_sizes: list
    num_double_cosets: int
    index: int
    seconds: float
    reason: str | None = None


# ---- representatives ------------------------------------------------------------

def _candidates(task: CoefficientTask, prefix: np.ndarray) -> np.ndarray:
    j = len(prefix)
    T = task.T
    t = int(T[j, j])
    if j == 0:
        return short_vectors(task.L, t)
    anchors = [(prefix[i], int(T[i, j])) for i in range(j)]
    return constrained_vectors(task.L, t, anchors)


def _root(task: CoefficientTask) -> TupleRep:
    return TupleRep(np.zeros((0, task.L.rank), dtype=np.int64), task.H)


def build_representatives(task: CoefficientTask, root: TupleRep | None = None,
                          level_sizes: list | None = None, seed: int = 0,
                          max_representatives: int | None = None) -> list[TupleRep]:
    """Orbit representatives ``S_n`` of H on the tuples with ``Q(x) = T``.

    Returns the leaves; the tree hanging off ``root`` is what
    :func:`canonicalize` walks.
    """
    root = root or _root(task)
    level = [root]
    for j in range(task.n):
        nxt = []
        for node in level:
            X = _candidates(task, node.vectors)
            idx = orbit_index(node.stab, X)
            node.index = idx
            for r in idx.representatives:
                y = idx.X[r]
                stab = pointwise_stabilizer(node.stab, [y], seed=seed)
                if stab.order * idx.orbit_size(r) != node.stab.order:
                    raise RuntimeError("orbit-stabilizer identity fails")
                child = TupleRep(np.vstack([node.vectors, y[None, :]]), stab, node)
                node.children[r] = child
                nxt.append(child)
                if max_representatives is not None and len(nxt) > max_representatives:
                    raise BudgetExceeded(f"more than {max_representatives} representatives at level {j + 1}")
        level = nxt
        if level_sizes is not None:
            level_sizes.append(len(level))
        log.debug("level %d: %d representatives", j + 1, len(level))
    for i, leaf in enumerate(level):
        leaf.leaf_id = i
    return level


def canonicalize(task: CoefficientTask, root: TupleRep, x, check: bool = True) -> tuple[TupleRep, Isometry]:
    """``(rep, sigma)`` with ``sigma`` in H and ``sigma x = rep.vectors``."""
    x = np.asarray(x, dtype=np.int64)
    if check and (x.shape != (task.n, task.L.rank) or not np.array_equal(task.L.gram_of(x), task.T_int)):
        raise NotInGamma("Q(x) differs from T")
    node = root
    sigma = Isometry.identity(task.L)
    for j in range(task.n):
        y = sigma.apply(x[j])
        i = node.index.index(y)
        if i is None:
            raise NotInGamma("tuple component outside the candidate set")
        r = int(node.index.rep[i])
        sigma = node.index.witness(i) @ sigma
        node = node.children[r]
    return node, sigma


# ---- double cosets ----------------------------------------------------------------

def _right_action(x: np.ndarray, eps: np.ndarray) -> np.ndarray:
    # (x eps)_j = sum_i x_i eps_ij
    return eps.T @ x


def form_generators(G: FormAutGroup, seed: int = 0) -> list[np.ndarray]:
    """A small generating set of O(T), checked by closure."""
    import random

    E = G.elements
    if len(E) <= 1:
        return []
    rng = random.Random(seed)
    keys = {e.tobytes() for e in E}
    gens: list[np.ndarray] = []
    while True:
        gens.append(E[rng.randrange(len(E))])
        seen = {np.eye(G.T.n, dtype=np.int64).tobytes()}
        frontier = [np.eye(G.T.n, dtype=np.int64)]
        while frontier:
            nxt = []
            for a in frontier:
                for g in gens:
                    b = g @ a
                    kb = b.tobytes()
                    if kb not in seen:
                        seen.add(kb)
                        nxt.append(b)
            frontier = nxt
        if len(seen) == len(E):
            if not seen <= keys:
                raise RuntimeError("O(T) element list is not closed")
            return gens


def double_cosets(task: CoefficientTask, root: TupleRep, leaves: list[TupleRep],
                  exhaustive: bool = False) -> list[DoubleCosetRep]:
    """Merge H-orbits into classes H x O(T).

    With ``exhaustive`` every element of O(T) is applied to each class
    representative; otherwise the classes are closed under a generating set
    of O(T), which gives the same partition.
    """
    Hord = task.H.order
    assigned = [False] * len(leaves)
    out = []
    gens = list(task.OT.elements) if exhaustive else form_generators(task.OT)
    for leaf in leaves:
        if assigned[leaf.leaf_id]:
            continue
        if exhaustive:
            reached = {leaf.leaf_id}
            for eps in gens:
                reached.add(canonicalize(task, root, _right_action(leaf.vectors, eps), check=False)[0].leaf_id)
        else:
            reached = {leaf.leaf_id}
            frontier = [leaf]
            while frontier:
                nxt = []
                for node in frontier:
                    for eps in gens:
                        other, _ = canonicalize(task, root, _right_action(node.vectors, eps), check=False)
                        if other.leaf_id not in reached:
                            reached.add(other.leaf_id)
                            nxt.append(other)
                frontier = nxt
        size = 0
        for i in reached:
            assigned[i] = True
            q, r = divmod(Hord, leaves[i].stab_order)
            size += q
        out.append(DoubleCosetRep(leaf, size, ZERO, sorted(reached)))
    return out


# ---- harmonic values ------------------------------------------------------------------

def harmonic_value(L: Lattice, x, h, k: int) -> ThetaScalar:
    """``det(Q(x, h))^k`` computed directly with exact scalars."""
    x = np.asarray(x, dtype=np.int64).reshape(-1, L.rank)
    G = L.ambient_gram.entries
    vecs = [[ThetaScalar.coerce(c) for c in v] for v in h.vectors]
    m = L.rank
    Q = []
    for xi in x:
        xa = L.to_ambient(xi)
        Gx = [sum((xa[r] * G[r][c] for r in range(m) if xa[r] and G[r][c]), Fraction(0)) for c in range(m)]
        Q.append([sum((v[c] * Gx[c] for c in range(m) if Gx[c] and v[c]), ZERO) for v in vecs])
    return det_small(Q) ** k


class HarmonicSums:
    """``sum over cosets of det(Q(x, t_u h))^k`` for many x, exactly.

    ``P[u]`` holds ``ip_matrix @ t_u @ h`` as integers so that
    ``x_scaled @ P[u]`` is ``Q(x, t_u h)`` times a fixed positive scale.
    """

    def __init__(self, L: Lattice, h, k: int, transforms: list[Isometry]):
        self.L, self.k = L, k
        H4, hdens = harmonic_int_array(h, return_dens=True)
        D = math.lcm(*[t.den for t in transforms]) if transforms else 1
        mats = np.stack([t.num * (D // t.den) for t in transforms]) if transforms else np.zeros((0, L.rank, L.rank), np.int64)
        bound = (int(np.abs(L.ip_matrix).max()) * int(np.abs(mats).max(initial=0))
                 * int(np.abs(H4).max()) * 6 * L.rank * L.rank)
        if bound >= 1 << 62:
            raise OverflowError("harmonic transforms do not fit in 64 bits")
        # (U, m, n, 4)
        self.P = np.einsum("ab,ubc,ncz->uanz", L.ip_matrix, mats, H4, optimize=True)
        aden = L.ip_den // (L.den * L.den)
        n = h.degree
        self.scale = Fraction(1, (L.den * aden * D) ** (n * k) * math.prod(hdens) ** k)

    def _entries(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        bound = int(np.abs(x).max(initial=0)) * int(np.abs(self.P).max(initial=0)) * self.L.rank
        if bound >= 1 << 62:
            raise OverflowError("harmonic entries do not fit in 64 bits")
        return np.einsum("ia,uanz->uinz", x, self.P, optimize=True)

    def raw(self, x: np.ndarray) -> tuple[int, int, int, int]:
        return det_power_sum(self._entries(x), self.k)

    def __call__(self, x: np.ndarray) -> ThetaScalar:
        a, b, c, d = self.raw(x)
        s = self.scale
        return ThetaScalar(a * s, b * s, c * s, d * s)

    def exact(self, x: np.ndarray) -> ThetaScalar:
        """Same sum with the pure-Python determinant (slow reference)."""
        N = self._entries(x)
        n = N.shape[1]
        tot = (0, 0, 0, 0)
        for M in N:
            d = zpow(zdet([[tuple(int(t) for t in M[i, j]) for j in range(n)] for i in range(n)]), self.k)
            tot = tuple(a + b for a, b in zip(tot, d))
        return from_int_tuple(tot) * ThetaScalar(self.scale)


def coset_transforms(task: CoefficientTask) -> list[Isometry]:
    """``t_u = sigma_u^{-1}`` for the coset representatives sigma_u of K in H."""
    return [s.inverse() for s in task.OLh.coset_reps]


# ---- coefficient ----------------------------------------------------------------------

def _checkpoint_path(task: CoefficientTask, checkpoint_dir) -> Path | None:
    if not checkpoint_dir:
        return None
    p = Path(checkpoint_dir) / f"{task.content_hash}.json"
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def coefficient_result(task: CoefficientTask, exhaustive_cosets: bool = False,
                       checkpoint_dir=None, max_representatives: int | None = None) -> CoefficientResult:
    """``a(T)`` with bookkeeping (sizes of S_m, number of double cosets, time)."""
    t0 = time.time()
    ck = _checkpoint_path(task, checkpoint_dir)
    if ck is not None and ck.exists():
        data = json.loads(ck.read_text())
        return CoefficientResult(Fraction(data["value"]), data["level_sizes"], data["num_double_cosets"],
                                 data["index"], data["seconds"], data.get("reason"))
    reason = task.character_obstruction()
    if reason is not None:
        res = CoefficientResult(Fraction(0), [], 0, task.OLh.index, time.time() - t0, reason)
    else:
        sizes: list[int] = []
        root = _root(task)
        leaves = build_representatives(task, root, sizes, max_representatives=max_representatives)
        if not leaves:
            res = CoefficientResult(Fraction(0), sizes, 0, task.OLh.index, time.time() - t0, "T is not represented")
        else:
            dcs = double_cosets(task, root, leaves, exhaustive=exhaustive_cosets)
            sums = HarmonicSums(task.L, task.h, task.k, coset_transforms(task))
            total = ZERO
            for dc in dcs:
                dc.harmonic_sum = sums(dc.x.vectors)
                total = total + dc.harmonic_sum * dc.coset_size
            value = total * Fraction(task.OLh.group.order, task.H.order)
            if not value.is_rational():
                raise NonRationalResult(f"assembled sum {value} is not rational")
            res = CoefficientResult(value.to_rational(), sizes, len(dcs), task.OLh.index, time.time() - t0)
    if ck is not None:
        ck.write_text(json.dumps({"value": str(res.value), "level_sizes": res.level_sizes,
                                  "num_double_cosets": res.num_double_cosets, "index": res.index,
                                  "seconds": res.seconds, "reason": res.reason}))
    return res


def coefficient(task: CoefficientTask, **kw) -> Fraction:
    """The (unnormalized) Fourier coefficient ``a(T)``."""
    return coefficient_result(task, **kw).value


# ---- brute force ------------------------------------------------------------------------

def _gamma_tuples(L: Lattice, T: GramMatrix, budget: int):
    n = T.n
    tuples = [np.zeros((0, L.rank), dtype=np.int64)]
    for j in range(n):
        nxt = []
        t = int(T[j, j])
        for pre in tuples:
            anchors = [(pre[i], int(T[i, j])) for i in range(j)]
            for y in constrained_vectors(L, t, anchors):
                nxt.append(np.vstack([pre, y[None, :]]))
                if len(nxt) > budget:
                    raise BudgetExceeded(f"more than {budget} partial tuples at level {j + 1}")
        tuples = nxt
    return tuples


def gamma_count(L: Lattice, T, budget: int = 10 ** 6) -> int:
    """``|Gamma_T|`` by direct enumeration."""
    T = T if isinstance(T, GramMatrix) else GramMatrix(T)
    return len(_gamma_tuples(L, T, budget))


def coefficient_bruteforce(L: Lattice, h, k: int, T, budget: int = 200_000) -> Fraction:
    """``sum over x in L^n with Q(x) = T of det(Q(x, h))^k`` by enumeration."""
    T = T if isinstance(T, GramMatrix) else GramMatrix(T)
    if T.n == 0:
        return Fraction(1)
    H4, hdens = harmonic_int_array(h, return_dens=True)
    W = np.einsum("ab,nbz->anz", L.ip_matrix, H4)
    aden = L.ip_den // (L.den * L.den)
    n = T.n
    total = (0, 0, 0, 0)
    for x in _gamma_tuples(L, T, budget):
        N = np.einsum("ia,anz->inz", x, W)
        d = zpow(zdet([[tuple(int(t) for t in N[i, j]) for j in range(n)] for i in range(n)]), k)
        total = tuple(a + b for a, b in zip(total, d))
    value = from_int_tuple(total) * ThetaScalar(Fraction(1, (L.den * aden) ** (n * k) * math.prod(hdens) ** k))
    if not value.is_rational():
        raise NonRationalResult(f"brute-force sum {value} is not rational")
    return value.to_rational()


# ---- normalization and vanishing order ------------------------------------------------------

def normalize_column(values: dict, order: list | None = None) -> dict:
    """Scale to coprime integers; the first nonzero entry (in ``order``) is positive."""
    keys = list(order) if order is not None else list(values)
    vals = {key: Fraction(values[key]) for key in keys if key in values}
    nz = [v for v in vals.values() if v != 0]
    if not nz:
        raise AllZero("every value is zero")
    den = math.lcm(*[v.denominator for v in nz])
    ints = {key: int(v * den) for key, v in vals.items()}
    g = math.gcd(*[abs(v) for v in ints.values() if v])
    first = next(ints[key] for key in keys if key in ints and ints[key])
    sign = 1 if first > 0 else -1
    return {key: sign * v // g for key, v in ints.items()}


@dataclass
class VanishingOrder:
    lower: Fraction
    exact: bool
    witness: object = None

    @property
    def value(self) -> Fraction:
        return self.lower


def vanishing_order(L: Lattice, h=None, k: int = 2, probes=(), max_probe: int = 64,
                    coefficient_fn=None) -> VanishingOrder:
    """Lower bound ``min_norm(L) / 2`` for the vanishing order, upgraded to an
    exact value when one of the ``probes`` (targets T with ``m(T)`` equal to
    the bound) has a nonzero coefficient under ``coefficient_fn``.
    """
    from .lattice import m_of_matrix

    lower = Fraction(min_norm(L, max_probe), 2)
    for T in probes:
        T = T if isinstance(T, GramMatrix) else GramMatrix(T)
        if m_of_matrix(T) != lower or coefficient_fn is None:
            continue
        if coefficient_fn(T) != 0:
            return VanishingOrder(lower, True, T)
    return VanishingOrder(lower, False, None)
