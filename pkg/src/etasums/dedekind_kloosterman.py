"""Dedekind sums and eta-multiplier Kloosterman sums.

The Kloosterman sum here is

    K(a, b; c) = sum over units d mod c of exp(pi*i*s(d,c)) e((d~*a + d*b)/c)

with s(d,c) the Dedekind sum and d~ the inverse of d mod c.  Every term is a
root of unity of order dividing 12c, so the whole sum is stored exactly as a
multiset of exponents k mod 12c (the term e^{2 pi i k / (12c)} with
multiplicity), and floating point enters only at evaluation time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

import numpy as np


class DedekindIntegralityError(AssertionError):
    """6c*s(d,c) failed to be an integer; the exact encoding would be invalid."""


def dedekind_sum(d: int, c: int) -> Fraction:
    """Exact Dedekind sum s(d, c) for c >= 1, gcd(d, c) = 1, via reciprocity."""
    if c < 1:
        raise ValueError("c must be >= 1")
    d %= c
    if gcd(d, c) != 1:
        raise ValueError("d must be a unit mod c")
    s = Fraction(0)
    sign = 1
    while d > 0:
        s += sign * (Fraction(d * d + c * c + 1, 12 * d * c) - Fraction(1, 4))
        sign = -sign
        c, d = d, c % d
    return s


def dedekind_scaled(d: int, c: int) -> int:
    """6c * s(d, c) as an exact integer (always integral; checked)."""
    v = 6 * c * dedekind_sum(d, c)
    if v.denominator != 1:
        raise DedekindIntegralityError(f"6c*s({d},{c}) = {v} is not an integer")
    return v.numerator


def _dedekind_scaled_int(d: int, c: int) -> int:
    """6c*s(d,c) by the reciprocity walk in plain integer arithmetic.

    Maintains the running sum as a reduced num/den pair; operands stay near
    c^2 so every step is machine-word work and the walk is O(log c).
    """
    num, den = 0, 1
    sign, a, b = 1, c, d % c
    while b:
        # reciprocity step: sign * ((a^2 + b^2 + 1)/(12ab) - 1/4)
        tn = a * a + b * b + 1 - 3 * a * b
        td = 12 * a * b
        num = num * td + sign * tn * den
        den *= td
        g = gcd(num, den)
        num //= g
        den //= g
        sign = -sign
        a, b = b, a % b
    v = 6 * c * num
    if v % den:
        raise DedekindIntegralityError(f"6c*s({d},{c}) is not an integer")
    return v // den


@lru_cache(maxsize=512)
def unit_data(c: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(units d mod c, inverses d~, scaled sums 6c*s(d,c)) as int64 arrays.

    One reciprocity walk per unit keeps the whole table O(c log c); the
    direct Kloosterman sum built on it then scales essentially linearly
    in the modulus.
    """
    if c == 1:
        return np.array([0]), np.array([0]), np.array([0])
    if c > 500_000:
        raise ValueError("unit_data table limited to c <= 5e5; use dedekind_scaled")
    d = np.arange(c, dtype=np.int64)
    units = d[np.gcd(d, c) == 1]
    inv = np.array([pow(int(u), -1, c) for u in units], dtype=np.int64)
    scaled = np.fromiter(
        (_dedekind_scaled_int(int(u), c) for u in units), dtype=np.int64, count=len(units)
    )
    return units, inv, scaled


@dataclass(frozen=True)
class ExponentMultiset:
    """Exact value sum_k counts[k] * e^(2 pi i k / modulus)."""

    modulus: int
    counts: tuple[tuple[int, int], ...]  # sorted (exponent, multiplicity)

    @classmethod
    def from_exponents(cls, modulus: int, exps) -> "ExponentMultiset":
        acc: dict[int, int] = {}
        for e in exps:
            e %= modulus
            acc[e] = acc.get(e, 0) + 1
        return cls(modulus, tuple(sorted(acc.items())))

    def is_real_symmetric(self) -> bool:
        d = dict(self.counts)
        return all(d.get((-e) % self.modulus, 0) == m for e, m in self.counts)

    def evaluate(self) -> complex:
        e = np.array([k for k, _ in self.counts], dtype=np.float64)
        m = np.array([mult for _, mult in self.counts], dtype=np.float64)
        ang = 2 * np.pi * e / self.modulus
        return complex(m @ np.cos(ang), m @ np.sin(ang))

    def evaluate_mp(self, prec: int = 128):
        """High-precision evaluation; real by symmetry (asserted)."""
        import mpmath

        if not self.is_real_symmetric():
            raise AssertionError("exponent multiset is not conjugation-symmetric")
        with mpmath.workprec(prec + 10):
            two_pi = 2 * mpmath.pi
            total = mpmath.mpf(0)
            for k, mult in self.counts:
                total += mult * mpmath.cos(two_pi * k / self.modulus)
            return +total


def kloosterman_exact(a: int, b: int, c: int) -> ExponentMultiset:
    """K(a, b; c) as an exact multiset of 12c-th roots of unity."""
    if c < 1:
        raise ValueError("c must be >= 1")
    units, inv, scaled = unit_data(c)
    mod = 12 * c
    exps = (scaled + 12 * (a * inv + b * units)) % mod
    return ExponentMultiset.from_exponents(mod, exps.tolist())


def kloosterman(a: int, b: int, c: int, prec: int | None = None) -> float:
    """K(a, b; c) evaluated numerically (real; fast float64 path by default).

    With `prec`, evaluates the exact multiset with mpmath at that many bits
    and returns an mpf.
    """
    if prec is not None:
        return kloosterman_exact(a, b, c).evaluate_mp(prec)
    units, inv, scaled = unit_data(c)
    mod = 12 * c
    exps = (scaled + 12 * (a * inv + b * units)) % mod
    ang = (2 * np.pi / mod) * exps
    im = float(np.sin(ang).sum())
    re = float(np.cos(ang).sum())
    if abs(im) > 1e-8 * max(1.0, abs(re)) + 1e-6 * math.sqrt(len(exps)):
        raise AssertionError(f"K({a},{b};{c}) has non-negligible imaginary part {im}")
    return re


def pentagonal_cos_sum(b: int, c: int, v: int = 1, prec: int | None = None):
    """sum over l mod 2c with l(3l+1)/2 = b (mod c) of (-1)^l cos((6l+1) v pi / (6c)).

    This is the generalized-pentagonal cosine sum; c times 1/sqrt(3c) rescales
    it to K(0, b; c), and 4 times it gives the Weyl-sum specialization at m=1.
    """
    ls = [l for l in range(2 * c) if (l * (3 * l + 1) // 2 - b) % c == 0]
    if prec is None:
        total = 0.0
        for l in ls:
            t = math.cos((6 * l + 1) * v * math.pi / (6 * c))
            total += t if l % 2 == 0 else -t
        return total
    import mpmath

    with mpmath.workprec(prec + 10):
        total = mpmath.mpf(0)
        for l in ls:
            t = mpmath.cos(mpmath.pi * (6 * l + 1) * v / (6 * c))
            total += t if l % 2 == 0 else -t
        return +total


def selberg_identity_gap(b: int, c: int, prec: int = 128):
    """|K(0,b;c) - sqrt(c/3) * pentagonal cosine sum| at `prec` bits."""
    import mpmath

    with mpmath.workprec(prec + 10):
        lhs = kloosterman(0, b, c, prec=prec)
        rhs = mpmath.sqrt(mpmath.mpf(c) / 3) * pentagonal_cos_sum(b, c, 1, prec=prec)
        return abs(lhs - rhs)
