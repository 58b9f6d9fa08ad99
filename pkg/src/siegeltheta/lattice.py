"""Integral lattices given by an ambient Gram matrix and generating vectors.

A lattice vector ``v`` is stored as the integer row ``den * v`` of its scaled
ambient coordinates, where ``den`` is the common denominator of the lattice.
The canonical Z-basis (Hermite normal form of the generators) is kept for
membership tests and enumeration, which runs on an LLL-reduced copy of the
basis Gram matrix.

Canonical vector order is lexicographic on ambient coordinates.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

from .exactnum import format_rational

log = logging.getLogger(__name__)

__all__ = [
    "LatticeError",
    "NonFullRank",
    "NonIntegral",
    "GramMatrix",
    "Lattice",
    "lattice_from_generators",
    "short_vectors",
    "constrained_vectors",
    "min_norm",
    "m_of_matrix",
    "hermite_normal_form",
]


class LatticeError(ValueError):
    pass


class NonFullRank(LatticeError):
    pass


class NonIntegral(LatticeError):
    pass


def _frac_matrix(rows) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(Fraction(v) for v in row) for row in rows)


def _lcm_den(values) -> int:
    d = 1
    for v in values:
        d = math.lcm(d, Fraction(v).denominator)
    return d


def frac_det(rows) -> Fraction:
    """Exact determinant over Q by Gaussian elimination."""
    a = [list(map(Fraction, r)) for r in rows]
    n = len(a)
    det = Fraction(1)
    for k in range(n):
        p = next((r for r in range(k, n) if a[r][k] != 0), None)
        if p is None:
            return Fraction(0)
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = -det
        det *= a[k][k]
        inv = 1 / a[k][k]
        for r in range(k + 1, n):
            f = a[r][k] * inv
            if f:
                for c in range(k, n):
                    a[r][c] -= f * a[k][c]
    return det


def frac_inverse(rows) -> list[list[Fraction]]:
    n = len(rows)
    a = [list(map(Fraction, r)) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for k in range(n):
        p = next((r for r in range(k, n) if a[r][k] != 0), None)
        if p is None:
            raise ZeroDivisionError("singular matrix")
        a[k], a[p] = a[p], a[k]
        inv = 1 / a[k][k]
        a[k] = [v * inv for v in a[k]]
        for r in range(n):
            if r != k and a[r][k] != 0:
                f = a[r][k]
                a[r] = [x - f * y for x, y in zip(a[r], a[k])]
    return [row[n:] for row in a]


def frac_matmul(A, B) -> list[list[Fraction]]:
    Bt = list(zip(*B))
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in Bt] for row in A]


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric rational matrix."""

    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", _frac_matrix(self.entries))
        n = len(self.entries)
        if any(len(r) != n for r in self.entries):
            raise ValueError("Gram matrix must be square")
        for i in range(n):
            for j in range(i):
                if self.entries[i][j] != self.entries[j][i]:
                    raise ValueError("Gram matrix must be symmetric")

    @property
    def n(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for r in self.entries for v in r)

    def is_even(self) -> bool:
        return self.is_integral() and all(self.entries[i][i] % 2 == 0 for i in range(self.n))

    def det(self) -> Fraction:
        return frac_det(self.entries)

    def is_positive_definite(self) -> bool:
        return all(frac_det([r[:k] for r in self.entries[:k]]) > 0 for k in range(1, self.n + 1))

    def to_int_array(self) -> np.ndarray:
        if not self.is_integral():
            raise NonIntegral("Gram matrix is not integral")
        return np.array([[int(v) for v in r] for r in self.entries], dtype=np.int64)

    def scaled(self, s) -> "GramMatrix":
        s = Fraction(s)
        return GramMatrix(tuple(tuple(v * s for v in r) for r in self.entries))

    def conjugate(self, U) -> "GramMatrix":
        """``U^T T U`` for an integer matrix ``U``."""
        U = [[Fraction(int(v)) for v in r] for r in U]
        Ut = [list(c) for c in zip(*U)]
        return GramMatrix(frac_matmul(frac_matmul(Ut, self.entries), U))

    @classmethod
    def from_array(cls, arr) -> "GramMatrix":
        return cls(tuple(tuple(Fraction(int(v)) if not isinstance(v, Fraction) else v for v in r) for r in arr))

    @classmethod
    def identity(cls, n, scale=1) -> "GramMatrix":
        return cls(tuple(tuple(Fraction(scale) if i == j else Fraction(0) for j in range(n)) for i in range(n)))

    def __str__(self):
        return "\n".join(" ".join(format_rational(v) for v in r) for r in self.entries)


def block_diagonal(*blocks) -> GramMatrix:
    rows = []
    n = sum(len(b) for b in blocks)
    off = 0
    for b in blocks:
        b = b.entries if isinstance(b, GramMatrix) else b
        for r in b:
            rows.append([Fraction(0)] * off + [Fraction(v) for v in r] + [Fraction(0)] * (n - off - len(b)))
        off += len(b)
    return GramMatrix(rows)


def hermite_normal_form(rows: list[list[int]], ncols: int) -> list[list[int]]:
    """Row-style HNF of the integer row lattice spanned by ``rows``.

    Returns the nonzero rows: upper triangular with positive pivots and the
    entries above each pivot reduced into ``[0, pivot)``.
    """
    A = [list(map(int, r)) for r in rows if any(r)]
    out_rows = []
    col = 0
    while A and col < ncols:
        nz = [r for r in A if r[col] != 0]
        if not nz:
            col += 1
            continue
        rest = [r for r in A if r[col] == 0]
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            p = piv[col]
            new_nz = [piv]
            for r in nz[1:]:
                q = r[col] // p
                r2 = [x - q * y for x, y in zip(r, piv)]
                if r2[col] != 0:
                    new_nz.append(r2)
                elif any(r2):
                    rest.append(r2)
            nz = new_nz
        piv = nz[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        out_rows.append(piv)
        A = rest
        col += 1
    # reduce above pivots
    pivcols = [next(j for j, v in enumerate(r) if v) for r in out_rows]
    for k in range(len(out_rows)):
        pc, pv = pivcols[k], out_rows[k][pivcols[k]]
        for i in range(k):
            q = out_rows[i][pc] // pv
            if q:
                out_rows[i] = [x - q * y for x, y in zip(out_rows[i], out_rows[k])]
    return out_rows


def lll_reduce(G: np.ndarray, delta: float = 0.99) -> np.ndarray:
    """LLL on a positive definite integer Gram matrix.

    Returns an integer unimodular ``U`` (columns = new basis in old
    coordinates).  The Gram-Schmidt data is floating point but all updates to
    ``U`` are integral, so the output is always a valid basis change; floating
    point only affects reduction quality.
    """
    n = G.shape[0]
    U = np.eye(n, dtype=object)
    Gi = [[int(v) for v in r] for r in G]  # exact Gram of current basis

    def gso():
        C = np.linalg.cholesky(np.array(Gi, dtype=float))
        d = np.diag(C)
        return C / d[None, :], d * d

    def add(i, j, q):  # b_i -= q b_j
        for r in range(n):
            U[r, i] -= q * U[r, j]
        # Gram update: row/col i
        gij = Gi[i][j]
        gjj = Gi[j][j]
        for k in range(n):
            if k != i:
                Gi[i][k] -= q * Gi[j][k]
                Gi[k][i] = Gi[i][k]
        Gi[i][i] += -2 * q * gij + q * q * gjj

    def swap(i, j):
        U[:, [i, j]] = U[:, [j, i]]
        Gi[i], Gi[j] = Gi[j], Gi[i]
        for r in Gi:
            r[i], r[j] = r[j], r[i]

    k = 1
    mu, bstar = gso()
    guard = 0
    while k < n:
        guard += 1
        if guard > 100000:
            break
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                add(k, j, q)
                mu, bstar = gso()
        if bstar[k] >= (delta - mu[k, k - 1] ** 2) * bstar[k - 1]:
            k += 1
        else:
            swap(k, k - 1)
            mu, bstar = gso()
            k = max(k - 1, 1)
    return np.array(U.tolist(), dtype=np.int64)


class Lattice:
    """An integral lattice ``L`` in a rational quadratic space.

    Lattice vectors are handled as integer rows ``den * v`` where ``v`` is the
    ambient coordinate vector; ``inner(x, y) = x @ ip_matrix @ y / ip_den``.
    ``basis`` holds the canonical (HNF) Z-basis as its *columns*, ``gram`` the
    integral Gram matrix of that basis.
    """

    def __init__(self, ambient_gram: GramMatrix, generators, name: str | None = None):
        self.ambient_gram = ambient_gram if isinstance(ambient_gram, GramMatrix) else GramMatrix(ambient_gram)
        m = self.ambient_gram.n
        self.generators = [tuple(Fraction(v) for v in g) for g in generators]
        if any(len(g) != m for g in self.generators):
            raise ValueError("generator length does not match ambient dimension")
        self.name = name
        self.rank = m
        gden = _lcm_den(v for g in self.generators for v in g)
        rows = [[int(v * gden) for v in g] for g in self.generators]
        hnf = hermite_normal_form(rows, m)
        if len(hnf) != m:
            raise NonFullRank(f"generators span rank {len(hnf)} < {m}")
        brows = [[Fraction(v, gden) for v in r] for r in hnf]
        self.den = _lcm_den(v for r in brows for v in r)
        # columns of basis are basis vectors
        self.basis = tuple(tuple(brows[j][i] for j in range(m)) for i in range(m))
        self.basis_scaled = np.array([[int(v * self.den) for v in r] for r in self.basis], dtype=np.int64)
        G = frac_matmul(frac_matmul(brows, self.ambient_gram.entries), [list(c) for c in zip(*brows)])
        gram = GramMatrix(G)
        if not gram.is_integral():
            raise NonIntegral("the Gram matrix of the generated lattice is not integral")
        self.gram = gram
        self.G = gram.to_int_array()
        self.det = gram.det()
        self.is_even = gram.is_even()
        aden = _lcm_den(v for r in self.ambient_gram.entries for v in r)
        self.ip_matrix = np.array([[int(v * aden) for v in r] for r in self.ambient_gram.entries], dtype=np.int64)
        self.ip_den = aden * self.den * self.den
        self._short_cache: dict[int, np.ndarray] = {}

    # ---- frames ---------------------------------------------------------
    @cached_property
    def basis_inverse(self) -> list[list[Fraction]]:
        return frac_inverse(self.basis)

    @cached_property
    def basis_inverse_int(self) -> tuple[np.ndarray, int]:
        """``(N, d)`` with ``basis_inverse = N / d``, N an object array of ints."""
        d = _lcm_den(v for r in self.basis_inverse for v in r)
        N = np.array([[int(v * d) for v in r] for r in self.basis_inverse], dtype=object)
        return N, d

    @cached_property
    def ambient_gram_int(self) -> tuple[np.ndarray, int]:
        d = _lcm_den(v for r in self.ambient_gram.entries for v in r)
        N = np.array([[int(v * d) for v in r] for r in self.ambient_gram.entries], dtype=object)
        return N, d

    @cached_property
    def ambient_gram_inverse(self) -> list[list[Fraction]]:
        return frac_inverse(self.ambient_gram.entries)

    @cached_property
    def ambient_gram_inverse_int(self) -> tuple[np.ndarray, int]:
        d = _lcm_den(v for r in self.ambient_gram_inverse for v in r)
        N = np.array([[int(v * d) for v in r] for r in self.ambient_gram_inverse], dtype=object)
        return N, d

    def to_ambient(self, x) -> tuple[Fraction, ...]:
        """Rational ambient coordinates of a scaled vector."""
        return tuple(Fraction(int(v), self.den) for v in x)

    def from_ambient(self, v) -> np.ndarray:
        """Scaled integer row of an ambient vector; raises if not in L."""
        v = [Fraction(c) for c in v]
        if not self.contains_ambient(v):
            raise ValueError("vector is not in the lattice")
        return np.array([int(c * self.den) for c in v], dtype=np.int64)

    def basis_coordinates(self, v) -> list[Fraction]:
        v = [Fraction(c) for c in v]
        return [sum((a * b for a, b in zip(row, v)), Fraction(0)) for row in self.basis_inverse]

    def contains_ambient(self, v) -> bool:
        return all(c.denominator == 1 for c in self.basis_coordinates(v))

    def contains(self, x) -> bool:
        return self.contains_ambient(self.to_ambient(x))

    def inner(self, x, y) -> int:
        num = int(np.asarray(x, dtype=np.int64) @ self.ip_matrix @ np.asarray(y, dtype=np.int64))
        q, r = divmod(num, self.ip_den)
        if r:
            raise ValueError("inner product is not integral; vectors outside the lattice?")
        return q

    def norm(self, x) -> int:
        return self.inner(x, x)

    def gram_of(self, X) -> np.ndarray:
        """Integer Gram matrix ``Q(x)`` of a tuple given as rows."""
        X = np.asarray(X, dtype=np.int64)
        num = X @ self.ip_matrix @ X.T
        if np.any(num % self.ip_den):
            raise ValueError("non-integral inner products")
        return num // self.ip_den

    def canonical_order(self, X: np.ndarray) -> np.ndarray:
        """Permutation sorting rows of ``X`` lexicographically (ambient order)."""
        if len(X) == 0:
            return np.zeros(0, dtype=np.int64)
        return np.lexsort(np.asarray(X).T[::-1])

    # ---- identity -------------------------------------------------------
    @cached_property
    def content_hash(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.ambient_gram).encode())
        h.update(b"|")
        for r in self.basis:
            h.update(" ".join(format_rational(v) for v in r).encode() + b";")
        return h.hexdigest()[:16]

    @cached_property
    def lll(self) -> tuple[np.ndarray, np.ndarray]:
        """(U, G_red): LLL basis change and its exact Gram matrix."""
        U = lll_reduce(self.G)
        Gr = U.T @ self.G @ U
        return U, Gr

    def is_positive_definite(self) -> bool:
        return self.gram.is_positive_definite()

    def __repr__(self):
        nm = f" {self.name}" if self.name else ""
        return f"<Lattice{nm} rank={self.rank} det={self.det} even={self.is_even}>"


def lattice_from_generators(ambient_gram, generators, name=None) -> Lattice:
    return Lattice(ambient_gram, generators, name=name)


# ---- enumeration ----------------------------------------------------------

_FRONTIER_CAP = 1 << 21


def _fincke_pohst(G: np.ndarray, bound: int, exact: bool = True) -> np.ndarray:
    """All nonzero x (up to sign) with x^T G x <= bound (or == bound when exact).

    Breadth-first Fincke-Pohst over the coordinates n-1..0, vectorised with
    numpy.  The float Cholesky data only prunes (with slack); every returned
    vector passes an exact integer norm test.  Returns one representative of
    each +/- pair (the last nonzero coordinate is positive).
    """
    n = G.shape[0]
    R = np.linalg.cholesky(G.astype(float)).T  # G = R^T R, R upper
    q = np.diag(R) ** 2
    mu = R / np.diag(R)[:, None]  # mu[i, j] for j > i
    slack = 1e-6 * max(1.0, float(bound))
    results = []

    def expand(X, r, zero, i):
        # X: (N, n-1-i) coords for indices i+1..n-1 (column k is index i+1+k)
        if i < 0:
            results.append(X)
            return
        if X.shape[1]:
            c = -(X.astype(float) @ mu[i, i + 1:])
        else:
            c = np.zeros(len(X))
        rad = np.sqrt(np.maximum(r + slack, 0.0) / q[i])
        lo = np.ceil(c - rad).astype(np.int64)
        hi = np.floor(c + rad).astype(np.int64)
        lo = np.where(zero, np.maximum(lo, 0), lo)
        cnt = np.maximum(hi - lo + 1, 0)
        total = int(cnt.sum())
        if total == 0:
            return
        parent = np.repeat(np.arange(len(X)), cnt)
        starts = np.repeat(np.cumsum(cnt) - cnt, cnt)
        xi = lo[parent] + (np.arange(total) - starts)
        newX = np.empty((total, X.shape[1] + 1), dtype=np.int64)
        newX[:, 0] = xi
        newX[:, 1:] = X[parent]
        newr = r[parent] - q[i] * (xi - c[parent]) ** 2
        newzero = zero[parent] & (xi == 0)
        if total > _FRONTIER_CAP:
            step = _FRONTIER_CAP
            for s in range(0, total, step):
                expand(newX[s:s + step], newr[s:s + step], newzero[s:s + step], i - 1)
        else:
            expand(newX, newr, newzero, i - 1)

    expand(np.zeros((1, 0), dtype=np.int64), np.array([float(bound)]), np.array([True]), n - 1)
    X = np.concatenate(results) if results else np.zeros((0, n), dtype=np.int64)
    X = X[np.any(X != 0, axis=1)]
    norms = np.einsum("ij,jk,ik->i", X, G, X)
    keep = norms == bound if exact else norms <= bound
    return X[keep]


def short_vectors(L: Lattice, norm: int, cache_dir: str | os.PathLike | None = None) -> np.ndarray:
    """All ``x in L`` with ``(x, x) == norm`` as scaled ambient rows.

    Each vector appears once; rows are sorted canonically (lexicographic on
    ambient coordinates).
    """
    norm = int(norm)
    if norm <= 0:
        raise ValueError("norm must be positive")
    if norm in L._short_cache:
        return L._short_cache[norm]
    cache_file = None
    if cache_dir is None:
        cache_dir = os.environ.get("SIEGELTHETA_CACHE")
    if cache_dir:
        cache_file = Path(cache_dir) / "shorts" / f"{L.content_hash}_{norm}.npy"
        if cache_file.exists():
            X = np.load(cache_file)
            L._short_cache[norm] = X
            return X
    U, Gr = L.lll
    Y = _fincke_pohst(Gr, norm)
    Y = np.concatenate([Y, -Y]) if len(Y) else Y.reshape(0, L.rank)
    X = Y @ (L.basis_scaled @ U).T
    X = X[L.canonical_order(X)] if len(X) else X.reshape(0, L.rank).astype(np.int64)
    X = np.ascontiguousarray(X, dtype=np.int64)
    X.setflags(write=False)
    L._short_cache[norm] = X
    if cache_file is not None:
        cache_file.parent.mkdir(parents=True, exist_ok=True)
        np.save(cache_file, X)
    log.debug("short_vectors(%s, %d): %d vectors", L.name, norm, len(X))
    return X


def constrained_vectors(L: Lattice, norm: int, anchors) -> np.ndarray:
    """Vectors of the given norm with prescribed inner products.

    ``anchors`` is a sequence of ``(y, value)`` pairs with ``y`` a scaled
    lattice vector.  Filters the cached shell.
    """
    X = short_vectors(L, norm)
    if not anchors:
        return X
    for y, value in anchors:
        y = np.asarray(y, dtype=np.int64)
        # Cauchy-Schwarz: no solutions at all
        if value * value > norm * L.norm(y):
            return X[:0]
        X = X[X @ (L.ip_matrix @ y) == int(value) * L.ip_den]
    return X


def min_norm(L: Lattice, limit: int = 64) -> int:
    for t in range(1, limit + 1):
        if L.is_even and t % 2:
            continue
        if len(short_vectors(L, t)):
            return t
    raise LatticeError("no vectors below the search limit")


def m_of_matrix(T: GramMatrix) -> Fraction:
    """``m(T) = min over nonzero integer x of x^T T x / 2``."""
    L = Lattice(T, [[int(i == j) for j in range(T.n)] for i in range(T.n)])
    return Fraction(min_norm(L), 2)
