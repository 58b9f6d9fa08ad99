"""Exact batched determinants over Z[i, r6] by reduction modulo primes.

For a prime p = 1 (mod 24) both -1 and 6 are squares mod p, so Z[i, r6]
maps to F_p in four ways (choice of signs of the square roots).  Sums of
determinant powers are evaluated in every embedding, the four coordinates
recovered by averaging, and the primes combined by CRT with a bound large
enough to determine the signed result.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

__all__ = ["det_power_sum", "det_power_sum_bound", "PRIMES"]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _sqrt_mod(a: int, p: int) -> int:
    """Tonelli-Shanks."""
    a %= p
    if pow(a, (p - 1) // 2, p) != 1:
        raise ValueError("not a square")
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r


@lru_cache(maxsize=None)
def _primes(count: int) -> tuple[tuple[int, int, int], ...]:
    """Primes p = 1 mod 24 below 2^31 with square roots of -1 and 6."""
    out = []
    p = (1 << 31) - 1
    p -= (p - 1) % 24
    while len(out) < count:
        if _is_prime(p):
            out.append((p, _sqrt_mod(-1, p), _sqrt_mod(6, p)))
        p -= 24
    return tuple(out)


PRIMES = _primes(4)


def _inv_mod(a: np.ndarray, p: int) -> np.ndarray:
    result = np.ones_like(a)
    base = a % p
    e = p - 2
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


def _det_mod(A: np.ndarray, p: int) -> np.ndarray:
    """Determinants of a batch ``(B, n, n)`` of matrices modulo p."""
    A = A % p
    B, n, _ = A.shape
    det = np.ones(B, dtype=np.int64)
    idx = np.arange(B)
    for c in range(n):
        nz = A[:, c:, c] != 0
        has = nz.any(axis=1)
        piv = np.argmax(nz, axis=1) + c
        swap = piv != c
        if swap.any():
            rc = A[idx, c].copy()
            A[idx, c] = A[idx, piv]
            A[idx, piv] = rc
            det = np.where(swap, (p - det) % p, det)
        pv = A[:, c, c]
        det = np.where(has, det * pv % p, 0)
        inv = _inv_mod(np.where(has, pv, 1), p)
        if c + 1 < n:
            f = A[:, c + 1:, c] * inv[:, None] % p
            A[:, c + 1:, :] = (A[:, c + 1:, :] - f[:, :, None] * A[:, None, c, :] % p) % p
    return det


def _embed(N: np.ndarray, p: int, ip: int, rp: int, s: int, t: int) -> np.ndarray:
    a, b, c, d = (N[..., j] % p for j in range(4))
    si, tr = (s * ip) % p, (t * rp) % p
    return (a + b * si % p + c * tr % p + d * (si * tr % p) % p) % p


def det_power_sum_bound(N: np.ndarray, k: int) -> float:
    """log2 of a bound on |coordinate| of ``sum_b det(N_b)^k``."""
    if len(N) == 0:
        return 0.0
    A = np.abs(N[..., 0]) + np.abs(N[..., 1]) + 2.45 * (np.abs(N[..., 2]) + np.abs(N[..., 3]))
    rows = np.sqrt((A.astype(float) ** 2).sum(axis=2))  # (B, n)
    with np.errstate(divide="ignore"):
        lg = np.log2(rows).sum(axis=1)
    top = float(np.max(lg)) if np.isfinite(lg).any() else -1.0
    return k * max(top, 0.0) + math.log2(len(N)) + 1


def det_power_sum(N: np.ndarray, k: int, weights: np.ndarray | None = None) -> tuple[int, int, int, int]:
    """Exact ``sum_b w_b det(N_b)^k`` for ``N`` of shape ``(B, n, n, 4)``.

    Entries are elements of Z[i, r6] given by their four integer coordinates;
    the result is returned the same way.  Weights must be small nonnegative
    integers.
    """
    B = len(N)
    if B == 0:
        return (0, 0, 0, 0)
    n = N.shape[1]
    if n == 0:
        total = int(weights.sum()) if weights is not None else B
        return (total, 0, 0, 0)
    bits = det_power_sum_bound(N, k)
    if weights is not None:
        bits += math.log2(max(1, int(weights.max())))
    count = max(1, math.ceil((bits + 2) / 30))
    primes = _primes(count)
    residues = []
    for p, ip, rp in primes:
        S = {}
        for s in (1, -1):
            for t in (1, -1):
                D = _det_mod(_embed(N, p, ip, rp, s, t), p)
                Dk = np.ones_like(D)
                for _ in range(k):
                    Dk = Dk * D % p
                if weights is not None:
                    Dk = Dk * (weights % p) % p
                S[s, t] = int(Dk.sum()) % p
        inv4 = pow(4, p - 2, p)
        a = (S[1, 1] + S[1, -1] + S[-1, 1] + S[-1, -1]) * inv4 % p
        bi = (S[1, 1] + S[1, -1] - S[-1, 1] - S[-1, -1]) * inv4 % p
        cr = (S[1, 1] - S[1, -1] + S[-1, 1] - S[-1, -1]) * inv4 % p
        dir_ = (S[1, 1] - S[1, -1] - S[-1, 1] + S[-1, -1]) * inv4 % p
        b = bi * pow(ip, p - 2, p) % p
        c = cr * pow(rp, p - 2, p) % p
        d = dir_ * pow(ip * rp % p, p - 2, p) % p
        residues.append((p, (a, b, c, d)))
    return tuple(_crt_signed([(p, r[j]) for p, r in residues]) for j in range(4))


def _crt_signed(pairs) -> int:
    x, M = 0, 1
    for p, r in pairs:
        # x = r mod p, x = x mod M
        t = (r - x) * pow(M, -1, p) % p
        x += M * t
        M *= p
    if x > M // 2:
        x -= M
    return x
