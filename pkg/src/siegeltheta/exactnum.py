"""Exact arithmetic in the field Q(i, sqrt6).

Elements are stored as four rationals ``(a, b, c, d)`` meaning
``a + b*i + c*r6 + d*i*r6`` where ``r6`` is a square root of 6.  Rationals are
plain :class:`fractions.Fraction` objects.

For inner loops (harmonic evaluations over many lattice tuples) the module
also offers an integral fast path: elements of ``Z[i, r6]`` as 4-tuples of
Python ints, with division-free determinants.
"""

from __future__ import annotations

import re
from fractions import Fraction
from itertools import combinations

Rational = Fraction

__all__ = [
    "Rational",
    "ThetaScalar",
    "ZERO",
    "ONE",
    "I",
    "R6",
    "IR6",
    "scalar_add",
    "scalar_mul",
    "scalar_neg",
    "scalar_conj",
    "scalar_is_real",
    "scalar_is_rational",
    "det_small",
    "det_permutation",
    "parse_rational",
    "format_rational",
]


def _q(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return parse_rational(x)
    return Fraction(x)


class ThetaScalar:
    """Immutable element ``a + b i + c r6 + d i r6`` of Q(i, r6)."""

    __slots__ = ("a", "b", "c", "d", "_hash")

    def __init__(self, a=0, b=0, c=0, d=0):
        object.__setattr__(self, "a", _q(a))
        object.__setattr__(self, "b", _q(b))
        object.__setattr__(self, "c", _q(c))
        object.__setattr__(self, "d", _q(d))
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("ThetaScalar is immutable")

    @classmethod
    def coerce(cls, x) -> "ThetaScalar":
        if isinstance(x, ThetaScalar):
            return x
        if isinstance(x, complex):
            raise TypeError("floating point complex values are not exact")
        if isinstance(x, float):
            raise TypeError("floating point values are not exact")
        return cls(x)

    @property
    def parts(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c, self.d)

    def __add__(self, other):
        try:
            o = ThetaScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return ThetaScalar(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    __radd__ = __add__

    def __neg__(self):
        return ThetaScalar(-self.a, -self.b, -self.c, -self.d)

    def __sub__(self, other):
        try:
            o = ThetaScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return ThetaScalar(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)

    def __rsub__(self, other):
        return ThetaScalar.coerce(other) - self

    def __mul__(self, other):
        try:
            o = ThetaScalar.coerce(other)
        except TypeError:
            return NotImplemented
        a1, b1, c1, d1 = self.a, self.b, self.c, self.d
        a2, b2, c2, d2 = o.a, o.b, o.c, o.d
        # basis products: i*i = -1, r6*r6 = 6, (i r6)^2 = -6
        return ThetaScalar(
            a1 * a2 - b1 * b2 + 6 * c1 * c2 - 6 * d1 * d2,
            a1 * b2 + b1 * a2 + 6 * c1 * d2 + 6 * d1 * c2,
            a1 * c2 + c1 * a2 - b1 * d2 - d1 * b2,
            a1 * d2 + d1 * a2 + b1 * c2 + c1 * b2,
        )

    __rmul__ = __mul__

    def conj(self) -> "ThetaScalar":
        return ThetaScalar(self.a, -self.b, self.c, -self.d)

    def sqrt6_conj(self) -> "ThetaScalar":
        """The Galois conjugate r6 -> -r6 (fixes i)."""
        return ThetaScalar(self.a, self.b, -self.c, -self.d)

    def norm(self) -> Fraction:
        """Absolute norm down to Q (product of the four Galois conjugates)."""
        x = self * self.conj()  # lies in Q(r6)
        y = x * x.sqrt6_conj()
        return y.a

    def inverse(self) -> "ThetaScalar":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(i, r6)")
        x = self.conj()
        t = self * x  # in Q(r6)
        u = t.sqrt6_conj()
        n = (t * u).a
        y = x * u
        return ThetaScalar(y.a / n, y.b / n, y.c / n, y.d / n)

    def __truediv__(self, other):
        try:
            o = ThetaScalar.coerce(other)
        except TypeError:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return ThetaScalar.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = ONE
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def is_zero(self) -> bool:
        return not (self.a or self.b or self.c or self.d)

    def __bool__(self):
        return not self.is_zero()

    def is_real(self) -> bool:
        return self.b == 0 and self.d == 0

    def is_rational(self) -> bool:
        return self.b == 0 and self.c == 0 and self.d == 0

    def is_integral_fast(self) -> bool:
        """True when all four components are integers (the fast-path case)."""
        return all(p.denominator == 1 for p in self.parts)

    def real_sign(self) -> int:
        """Sign of a real element ``a + c r6``, decided exactly."""
        if not self.is_real():
            raise ValueError("sign of a non-real element")
        a, c = self.a, self.c
        if c == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return (c > 0) - (c < 0)
        if (a > 0) == (c > 0):
            return 1 if a > 0 else -1
        # opposite signs: compare a^2 with 6 c^2
        if a * a > 6 * c * c:
            return 1 if a > 0 else -1
        return 1 if c > 0 else -1

    def __eq__(self, other):
        if isinstance(other, ThetaScalar):
            return self.parts == other.parts
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.a == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self.parts))
        return self._hash

    def to_rational(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.a

    def to_int_tuple(self) -> tuple[int, int, int, int]:
        if not self.is_integral_fast():
            raise ValueError(f"{self} has non-integral components")
        return (int(self.a), int(self.b), int(self.c), int(self.d))

    def __complex__(self):
        r6 = 6 ** 0.5
        return complex(float(self.a) + float(self.c) * r6, float(self.b) + float(self.d) * r6)

    def __str__(self):
        return format_scalar(self)

    def __repr__(self):
        return f"ThetaScalar({format_scalar(self)!r})"


ZERO = ThetaScalar(0)
ONE = ThetaScalar(1)
I = ThetaScalar(0, 1)
R6 = ThetaScalar(0, 0, 1)
IR6 = ThetaScalar(0, 0, 0, 1)


def scalar_add(x, y) -> ThetaScalar:
    return ThetaScalar.coerce(x) + y


def scalar_mul(x, y) -> ThetaScalar:
    return ThetaScalar.coerce(x) * y


def scalar_neg(x) -> ThetaScalar:
    return -ThetaScalar.coerce(x)


def scalar_conj(x) -> ThetaScalar:
    return ThetaScalar.coerce(x).conj()


def scalar_is_real(x) -> bool:
    return ThetaScalar.coerce(x).is_real()


def scalar_is_rational(x) -> bool:
    return ThetaScalar.coerce(x).is_rational()


def det_small(M) -> ThetaScalar:
    """Exact determinant of a square matrix over Q(i, r6).

    Uses cofactor expansion below 4x4 and fraction-free Bareiss elimination
    otherwise.
    """
    rows = [[ThetaScalar.coerce(v) for v in row] for row in M]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("det_small needs a square matrix")
    if n == 0:
        return ONE
    if n < 4:
        return _det_cofactor(rows)
    return _det_bareiss(rows)


def _det_cofactor(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = ZERO
    for j in range(n):
        if rows[0][j].is_zero():
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = rows[0][j] * _det_cofactor(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def _det_bareiss(rows):
    a = [list(r) for r in rows]
    n = len(a)
    sign = 1
    prev = ONE
    for k in range(n - 1):
        if a[k][k].is_zero():
            for r in range(k + 1, n):
                if not a[r][k].is_zero():
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return ZERO
        akk = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * akk - a[i][k] * a[k][j]) / prev
        prev = akk
    d = a[n - 1][n - 1]
    return d if sign == 1 else -d


def det_permutation(M) -> ThetaScalar:
    """Leibniz expansion; slow, used as an independent check."""
    from itertools import permutations

    rows = [[ThetaScalar.coerce(v) for v in row] for row in M]
    n = len(rows)
    total = ZERO
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = ONE
        for i, p in enumerate(perm):
            term = term * rows[i][p]
            if term.is_zero():
                break
        total = total - term if inv % 2 else total + term
    return total


# --- integral fast path -----------------------------------------------------
# Elements of Z[i, r6] as 4-tuples of ints, same basis order as ThetaScalar.

ZI = tuple[int, int, int, int]
Z_ZERO: ZI = (0, 0, 0, 0)
Z_ONE: ZI = (1, 0, 0, 0)


def zmul(x: ZI, y: ZI) -> ZI:
    a1, b1, c1, d1 = x
    a2, b2, c2, d2 = y
    return (
        a1 * a2 - b1 * b2 + 6 * (c1 * c2 - d1 * d2),
        a1 * b2 + b1 * a2 + 6 * (c1 * d2 + d1 * c2),
        a1 * c2 + c1 * a2 - b1 * d2 - d1 * b2,
        a1 * d2 + d1 * a2 + b1 * c2 + c1 * b2,
    )


def zadd(x: ZI, y: ZI) -> ZI:
    return (x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3])


def zsub(x: ZI, y: ZI) -> ZI:
    return (x[0] - y[0], x[1] - y[1], x[2] - y[2], x[3] - y[3])


def zpow(x: ZI, k: int) -> ZI:
    result = Z_ONE
    while k:
        if k & 1:
            result = zmul(result, x)
        x = zmul(x, x)
        k >>= 1
    return result


def zdet(M: list[list[ZI]]) -> ZI:
    """Division-free determinant via Laplace expansion with memoised minors.

    Expands along rows; the minor on the last ``r`` rows is indexed by its
    column set.  Costs about ``n * 2**(n-1)`` ring products.
    """
    n = len(M)
    if n == 0:
        return Z_ONE
    # minors of the bottom rows, keyed by the tuple of columns
    last = M[n - 1]
    minors = {(j,): last[j] for j in range(n)}
    for r in range(n - 2, -1, -1):
        row = M[r]
        size = n - r
        new = {}
        for cols in combinations(range(n), size):
            acc = Z_ZERO
            for pos, j in enumerate(cols):
                v = row[j]
                if v == Z_ZERO:
                    continue
                sub = minors[cols[:pos] + cols[pos + 1:]]
                if sub == Z_ZERO:
                    continue
                p = zmul(v, sub)
                acc = zsub(acc, p) if pos & 1 else zadd(acc, p)
            new[cols] = acc
        minors = new
    return minors[tuple(range(n))]


def zadj(x: ZI) -> tuple[ZI, int]:
    """``(y, N)`` with ``x * y = N`` a nonzero integer (for ``x != 0``)."""
    a, b, c, d = x
    # x * conj_i(x) = P + Q r6, then multiply by P - Q r6
    P = a * a + b * b + 6 * (c * c + d * d)
    Q = 2 * (a * c + b * d)
    y = zmul((a, -b, c, -d), (P, 0, -Q, 0))
    return y, P * P - 6 * Q * Q


def from_int_tuple(x: ZI, den: int = 1) -> ThetaScalar:
    return ThetaScalar(Fraction(x[0], den), Fraction(x[1], den), Fraction(x[2], den), Fraction(x[3], den))


# --- text format --------------------------------------------------------------

def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not re.fullmatch(r"[+-]?\d+(/\d+)?", text):
        raise ValueError(f"not a rational: {text!r}")
    return Fraction(text)


def format_rational(q) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


_SCALAR_RE = re.compile(
    r"^\s*([+-]?\d+(?:/\d+)?)\s*\+\s*([+-]?\d+(?:/\d+)?)\*i\s*\+\s*([+-]?\d+(?:/\d+)?)\*r6"
    r"\s*\+\s*([+-]?\d+(?:/\d+)?)\*i\*r6\s*$"
)


def format_scalar(x: ThetaScalar) -> str:
    """Serialise as ``a+b*i+c*r6+d*i*r6`` (always all four terms)."""
    a, b, c, d = (format_rational(p) for p in x.parts)
    return f"{a}+{b}*i+{c}*r6+{d}*i*r6"


def parse_scalar(text: str) -> ThetaScalar:
    m = _SCALAR_RE.match(text)
    if m is None:
        # a bare rational is accepted as shorthand
        try:
            return ThetaScalar(parse_rational(text))
        except ValueError:
            raise ValueError(f"cannot parse Q(i,r6) element: {text!r}") from None
    return ThetaScalar(*(parse_rational(g) for g in m.groups()))
