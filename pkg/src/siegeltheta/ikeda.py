"""Eta quotients, the weight 23/2 form g and Ikeda lift coefficients.

A :class:`QExpansion` is ``q^offset * sum_j coeffs[j] q^j`` known exactly
for ``j < len(coeffs)``.  Offsets are kept as rationals so that factors like
``eta(2 tau)^19`` (offset 38/24) can be combined before asking for integer
exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .lattice import GramMatrix

__all__ = [
    "NonIntegralOffset",
    "UnsupportedGenusFactor",
    "QExpansion",
    "DiscriminantSplit",
    "eta_power",
    "build_g",
    "discriminant_split",
    "is_fundamental_discriminant",
    "ikeda_coefficient",
]

DEFAULT_ORDER = 200


class NonIntegralOffset(ValueError):
    pass


class UnsupportedGenusFactor(NotImplementedError):
    pass


def _conv(a: list[int], b: list[int], n: int) -> list[int]:
    out = np.convolve(np.array(a[:n], dtype=object), np.array(b[:n], dtype=object))[:n]
    return [int(x) for x in out]


@dataclass(frozen=True)
class QExpansion:
    coeffs: tuple[int, ...]
    offset: Fraction = Fraction(0)

    @property
    def truncation_order(self) -> int:
        """Exponents ``offset + j`` are exact for ``j`` below this."""
        return len(self.coeffs)

    def __mul__(self, other):
        if isinstance(other, int):
            return QExpansion(tuple(other * c for c in self.coeffs), self.offset)
        n = min(len(self.coeffs), len(other.coeffs))
        return QExpansion(tuple(_conv(list(self.coeffs), list(other.coeffs), n)), self.offset + other.offset)

    __rmul__ = __mul__

    def __add__(self, other: "QExpansion") -> "QExpansion":
        shift = other.offset - self.offset
        if shift.denominator != 1:
            raise NonIntegralOffset("summands differ by a non-integral power of q")
        if shift < 0:
            return other + self
        s = int(shift)
        n = min(len(self.coeffs), len(other.coeffs) + s)
        out = list(self.coeffs[:n])
        for j in range(s, n):
            out[j] += other.coeffs[j - s]
        return QExpansion(tuple(out), self.offset)

    def inverse(self) -> "QExpansion":
        """Power series inverse (the constant term must be +-1)."""
        a = self.coeffs
        if not a or a[0] not in (1, -1):
            raise ValueError("leading coefficient must be a unit")
        n = len(a)
        inv = [0] * n
        inv[0] = a[0]
        for j in range(1, n):
            s = sum(a[i] * inv[j - i] for i in range(1, j + 1))
            inv[j] = -a[0] * s
        return QExpansion(tuple(inv), -self.offset)

    def __truediv__(self, other: "QExpansion") -> "QExpansion":
        return self * other.inverse()

    def __pow__(self, e: int) -> "QExpansion":
        if e < 0:
            return self.inverse() ** (-e)
        result = QExpansion((1,) + (0,) * (len(self.coeffs) - 1))
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return QExpansion(result.coeffs, self.offset * 0 + result.offset)

    def coefficient(self, m: int) -> int:
        """Coefficient of ``q^m`` (integer exponent)."""
        if self.offset.denominator != 1:
            raise NonIntegralOffset(f"offset {self.offset} is not an integer")
        j = m - int(self.offset)
        if j < 0:
            return 0
        if j >= len(self.coeffs):
            raise IndexError(f"q^{m} is beyond the truncation order")
        return self.coeffs[j]

    def items(self):
        """(exponent, coefficient) pairs with integer exponents."""
        if self.offset.denominator != 1:
            raise NonIntegralOffset(f"offset {self.offset} is not an integer")
        o = int(self.offset)
        return [(o + j, c) for j, c in enumerate(self.coeffs)]

    def to_text(self) -> str:
        return "".join(f"{e} {c}\n" for e, c in self.items())

    @classmethod
    def from_text(cls, text: str) -> "QExpansion":
        pairs = [tuple(int(t) for t in line.split()) for line in text.splitlines() if line.strip()]
        start = pairs[0][0]
        coeffs = [0] * (pairs[-1][0] - start + 1)
        for e, c in pairs:
            coeffs[e - start] = c
        return cls(tuple(coeffs), Fraction(start))


def _euler_product(m: int, order: int) -> list[int]:
    """``prod_j (1 - q^{m j})`` up to ``q^{order-1}`` (pentagonal numbers)."""
    out = [0] * order
    k = 0
    while True:
        done = True
        for s in ((k,) if k == 0 else (k, -k)):
            p = s * (3 * s - 1) // 2
            if m * p < order:
                out[m * p] += -1 if k % 2 else 1
                done = False
        if done and k > 0:
            break
        k += 1
    return out


def eta_power(m: int, e: int, order: int = DEFAULT_ORDER) -> QExpansion:
    """``eta(m tau)^e`` with the prefactor ``q^{m e / 24}`` kept as the offset."""
    if m <= 0:
        raise ValueError("argument multiplier must be positive")
    base = QExpansion(tuple(_euler_product(m, order)))
    series = base ** e
    return QExpansion(series.coeffs, Fraction(m * e, 24))


def build_g(order: int = DEFAULT_ORDER) -> QExpansion:
    """The weight 23/2 eta quotient combination g."""
    if order < 3:
        raise ValueError("order must be at least 3")
    n = order + 8
    first = eta_power(2, 19, n) * eta_power(4, 10, n) / eta_power(1, 6, n)
    second = eta_power(1, 2, n) * eta_power(4, 26, n) / eta_power(2, 5, n)
    g = first + 4 * second
    if g.offset.denominator != 1:
        raise NonIntegralOffset("g has a fractional leading exponent")
    # report coefficients for exponents below ``order``
    keep = max(0, order - int(g.offset))
    return QExpansion(g.coeffs[:keep], g.offset)


# ---- discriminants ---------------------------------------------------------------

def is_fundamental_discriminant(D: int) -> bool:
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return _squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(m)
    return False


def _squarefree(n: int) -> bool:
    n = abs(n)
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


@dataclass(frozen=True)
class DiscriminantSplit:
    D: int
    d: int


def discriminant_split(T) -> DiscriminantSplit:
    """``(-1)^n det(T) = D d^2`` with D a fundamental discriminant (T of size 2n)."""
    T = T if isinstance(T, GramMatrix) else GramMatrix(T)
    if T.n % 2:
        raise ValueError("T must have even size")
    det = T.det()
    if det.denominator != 1:
        raise ValueError("T must be integral")
    N = (-1) ** (T.n // 2) * int(det)
    if N % 4 not in (0, 1):
        raise ValueError(f"{N} is not a discriminant")
    # largest d with N / d^2 a discriminant
    best = None
    for d in range(1, math.isqrt(abs(N)) + 1):
        if N % (d * d) == 0 and is_fundamental_discriminant(N // (d * d)):
            best = DiscriminantSplit(N // (d * d), d)
    if best is None:
        raise ValueError(f"no fundamental discriminant divides {N}")
    return best


def ikeda_coefficient(T, g: QExpansion | None = None, k: int = 11, n: int = 3) -> int:
    """Fourier coefficient of the Ikeda lift at T when ``d_T = 1``: ``c(|D_T|)``."""
    T = T if isinstance(T, GramMatrix) else GramMatrix(T)
    if T.n != 2 * n:
        raise ValueError(f"T must be {2 * n}x{2 * n}")
    split = discriminant_split(T)
    if split.d != 1:
        raise UnsupportedGenusFactor(f"d_T = {split.d} needs the genus factor phi(a, T)")
    g = g if g is not None else build_g(max(DEFAULT_ORDER, abs(split.D) + 1))
    return g.coefficient(abs(split.D))
