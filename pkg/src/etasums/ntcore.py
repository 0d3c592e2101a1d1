"""Elementary number theory: Kronecker symbols, modular square roots,
factorization, CRT, and Pell equations.

Everything here is exact integer arithmetic; these are the primitives the
exponential-sum and quadratic-form layers are built on.
"""

from __future__ import annotations

import math
from functools import lru_cache


class SquareDiscriminantError(ValueError):
    """Raised when an operation requires a nonsquare discriminant."""


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a|n), defined for all integers a, n."""
    if n == 0:
        return 1 if a in (1, -1) else 0
    if a % 2 == 0 and n % 2 == 0:
        return 0
    # peel off the even part of n; (a|2) depends on a mod 8
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v % 2 == 0:
        k = 1
    else:
        k = 1 if a % 8 in (1, 7) else -1
    if n < 0:
        n = -n
        if a < 0:
            k = -k
    # n odd and positive; flip signs by reciprocity while reducing
    while a != 0:
        v = 0
        while a % 2 == 0:
            a //= 2
            v += 1
        if v % 2 == 1 and n % 8 in (3, 5):
            k = -k
        if a % 4 == 3 and n % 4 == 3:
            k = -k
        a, n = n % abs(a), abs(a)
    return k if n == 1 else 0


_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for n < 3.3e24."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@lru_cache(maxsize=65536)
def factorize(n: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of n >= 1 as a sorted tuple of (p, exponent)."""
    if n < 1:
        raise ValueError("factorize expects n >= 1")
    out = []
    for p in (2, 3, 5):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    # wheel mod 30
    p = 7
    gaps = (4, 2, 4, 2, 4, 6, 2, 6)
    i = 0
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += gaps[i]
        i = (i + 1) % 8
    if n > 1:
        assert is_prime(n)
        out.append((n, 1))
    return tuple(out)


def divisors(n: int) -> list[int]:
    """Sorted positive divisors of n >= 1."""
    ds = [1]
    for p, e in factorize(n):
        ds = [d * p**j for d in ds for j in range(e + 1)]
    return sorted(ds)


def moebius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Write n = v^2 * m with v >= 1 and m squarefree (m carries the sign)."""
    if n == 0:
        raise ValueError("n must be nonzero")
    v = 1
    m = -1 if n < 0 else 1
    for p, e in factorize(abs(n)):
        v *= p ** (e // 2)
        if e % 2:
            m *= p
    return v, m


def crt(residues: list[int], moduli: list[int]) -> tuple[int, int]:
    """Solve x = r_i (mod m_i) for pairwise coprime moduli.

    Returns (x, M) with 0 <= x < M = prod(m_i).
    """
    x, M = 0, 1
    for r, m in zip(residues, moduli):
        t = (r - x) * pow(M, -1, m) % m
        x += M * t
        M *= m
    return x % M, M


def tonelli_shanks(a: int, p: int) -> int:
    """A square root of a modulo an odd prime p; raises if a is not a QR."""
    a %= p
    if a == 0:
        return 0
    if kronecker(a, p) != 1:
        raise ValueError(f"{a} is not a quadratic residue mod {p}")
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # write p - 1 = q * 2^s with q odd
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while kronecker(z, p) != -1:
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


def _sqrts_mod_2power(a: int, k: int) -> list[int]:
    """All x mod 2^k with x^2 = a (mod 2^k), for odd a."""
    mod = 1 << k
    a %= mod
    if k == 1:
        return [1]
    if k == 2:
        return [1, 3] if a % 4 == 1 else []
    if a % 8 != 1:
        return []
    # lift a root from mod 8 upward; at each step the defect is even
    r = 1
    for j in range(3, k):
        if (r * r - a) % (1 << (j + 1)):
            r += 1 << (j - 1)
    return sorted({r % mod, (-r) % mod, (r + mod // 2) % mod, (-r + mod // 2) % mod})


def _sqrts_mod_prime_power(a: int, p: int, k: int) -> list[int]:
    """All x mod p^k with x^2 = a (mod p^k)."""
    mod = p**k
    a %= mod
    if a == 0:
        step = p ** ((k + 1) // 2)
        return list(range(0, mod, step))
    if a % p == 0:
        e = 0
        b = a
        while b % p == 0:
            b //= p
            e += 1
        if e % 2:
            return []
        h = e // 2
        inner = _sqrts_mod_prime_power(b, p, k - e)
        step = p ** (k - h)
        roots = {(p**h * y + t * step) % mod for y in inner for t in range(p**h)}
        return sorted(roots)
    if p == 2:
        return _sqrts_mod_2power(a, k)
    r = tonelli_shanks(a, p) if kronecker(a, p) == 1 else None
    if r is None:
        return []
    # Hensel: refine x^2 = a from mod p^j to mod p^(j+1)
    pj = p
    for _ in range(k - 1):
        pj *= p
        r = (r - (r * r - a) * pow(2 * r, -1, pj)) % pj
    return sorted({r, mod - r})


def sqrts_mod(a: int, n: int) -> list[int]:
    """All solutions x in [0, n) of x^2 = a (mod n), sorted."""
    if n < 1:
        raise ValueError("modulus must be positive")
    if n == 1:
        return [0]
    locals_ = []
    moduli = []
    for p, k in factorize(n):
        rs = _sqrts_mod_prime_power(a, p, k)
        if not rs:
            return []
        locals_.append(rs)
        moduli.append(p**k)
    out = [0]
    # combine local roots by CRT, one prime power at a time
    M = 1
    for rs, m in zip(locals_, moduli):
        inv = pow(M, -1, m) if M > 1 else 1
        new = []
        for x in out:
            for r in rs:
                t = (r - x) * inv % m
                new.append(x + M * t)
        out = new
        M *= m
    return sorted(x % n for x in out)


def _sqrt_continued_fraction(d: int):
    """Yield (a_k, p_k, q_k): CF digits and convergents of sqrt(d)."""
    a0 = math.isqrt(d)
    m, q, a = 0, 1, a0
    p_prev, p = 1, a0
    q_prev, qq = 0, 1
    yield a, p, qq
    while True:
        m = a * q - m
        q = (d - m * m) // q
        a = (a0 + m) // q
        p_prev, p = p, a * p + p_prev
        q_prev, qq = qq, a * qq + q_prev
        yield a, p, qq


def pell(d: int) -> tuple[int, int]:
    """Smallest (t, u) with t, u > 0 and t^2 - d*u^2 = 4, for nonsquare d > 0."""
    if d <= 0 or is_square(d):
        raise SquareDiscriminantError(f"pell requires a positive nonsquare d, got {d}")
    if d < 17:
        # sqrt(d) < 4: the convergent criterion below does not cover norm 4,
        # but fundamental solutions here are tiny
        u = 1
        while True:
            t2 = d * u * u + 4
            if is_square(t2):
                return math.isqrt(t2), u
            u += 1
    candidates = []
    for a, p, q in _sqrt_continued_fraction(d):
        norm = p * p - d * q * q
        if norm == 4:
            candidates.append((p, q))
        elif norm == -4:
            # square the half-unit (p + q*sqrt(d))/2
            candidates.append(((p * p + d * q * q) // 2, p * q))
        elif norm == 1:
            candidates.append((2 * p, 2 * q))
            break
        elif norm == -1:
            x, y = p * p + d * q * q, 2 * p * q
            candidates.append((2 * x, 2 * y))
            break
    t, u = min(candidates)
    assert t * t - d * u * u == 4 and t > 0 and u > 0
    return t, u
