"""Quadratic Gauss sums (exact closed forms), Fischer sums, and the twisted
quadratic Weyl sums attached to the genus character.

The central object is

    S_v(m, n; 24c) = sum over b mod 24c with b^2 = mn (mod 24c) of
                     (12|b) chi_m([6c, b, (b^2-mn)/(24c)]) e(b v / (12c)),

a real number, together with the two identities that convert between it and
the eta-multiplier Kloosterman sums (in both directions), and the
Gauss/Fischer closed forms used in their proofs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

import mpmath

from . import ntcore
from .dedekind_kloosterman import dedekind_sum, kloosterman
from .quadratic_forms import genus_chi_explicit

# ----------------------------------------------------------- exact Gauss sums


@dataclass(frozen=True)
class RootOfUnityMultiple:
    """Exact value rat * sqrt(radicand) * e(phase), phase in turns.

    rat is a nonnegative rational, radicand a positive squarefree integer,
    phase a rational in [0, 1).  The zero value is (0, 1, 0).
    """

    rat: Fraction
    radicand: int
    phase: Fraction

    @classmethod
    def make(cls, rat, radicand: int = 1, phase=Fraction(0)) -> "RootOfUnityMultiple":
        rat = Fraction(rat)
        phase = Fraction(phase)
        if rat == 0:
            return cls(Fraction(0), 1, Fraction(0))
        if rat < 0:
            rat = -rat
            phase += Fraction(1, 2)
        v, sf = ntcore.squarefree_decompose(radicand)
        return cls(rat * v, sf, phase % 1)

    def __mul__(self, other: "RootOfUnityMultiple") -> "RootOfUnityMultiple":
        return RootOfUnityMultiple.make(
            self.rat * other.rat, self.radicand * other.radicand, self.phase + other.phase
        )

    def scaled(self, k) -> "RootOfUnityMultiple":
        return RootOfUnityMultiple.make(self.rat * Fraction(k), self.radicand, self.phase)

    def rotated(self, phase) -> "RootOfUnityMultiple":
        if self.rat == 0:
            return self
        return RootOfUnityMultiple.make(self.rat, self.radicand, self.phase + phase)

    def is_zero(self) -> bool:
        return self.rat == 0

    def evaluate(self) -> complex:
        r = float(self.rat) * math.sqrt(self.radicand)
        ang = 2 * math.pi * float(self.phase)
        return complex(r * math.cos(ang), r * math.sin(ang))

    def evaluate_mp(self, prec: int = 128) -> mpmath.mpc:
        with mpmath.workprec(prec + 10):
            r = mpmath.mpf(self.rat.numerator) / self.rat.denominator
            r *= mpmath.sqrt(self.radicand)
            ang = 2 * mpmath.pi * self.phase.numerator / self.phase.denominator
            return mpmath.mpc(r * mpmath.cos(ang), r * mpmath.sin(ang))


_ZERO = RootOfUnityMultiple.make(0)


def gauss_sum_direct(a: int, b: int, c: int, prec: int = 80) -> mpmath.mpc:
    """Brute-force G(a, b; c) = sum_{x mod c} e((a x^2 + b x)/c)."""
    with mpmath.workprec(prec):
        total = mpmath.mpc(0)
        for x in range(c):
            total += mpmath.expjpi(2 * mpmath.mpf((a * x * x + b * x) % c) / c)
        return total


def _eps_phase(x: int) -> Fraction:
    """Phase of eps_x = 1 (x = 1 mod 4) or i (x = 3 mod 4), in turns."""
    return Fraction(0) if x % 4 == 1 else Fraction(1, 4)


def _kron_phase(a: int, n: int) -> Fraction | None:
    k = ntcore.kronecker(a, n)
    if k == 0:
        return None
    return Fraction(0) if k == 1 else Fraction(1, 2)


def gauss_sum_exact(a: int, b: int, c: int) -> RootOfUnityMultiple:
    """Closed-form evaluation of G(a, b; c), exact as rat*sqrt(s)*e(phase)."""
    if c < 1:
        raise ValueError("modulus must be positive")
    a %= c
    b %= c
    if c == 1:
        return RootOfUnityMultiple.make(1)
    if a == 0:
        return RootOfUnityMultiple.make(c) if b == 0 else _ZERO
    d = gcd(a, c)
    if d > 1:
        if b % d:
            return _ZERO
        return gauss_sum_exact(a // d, b // d, c // d).scaled(d)
    # now gcd(a, c) = 1
    if c % 2 == 1:
        # complete the square: G = e(-(4a)^{-1} b^2 / c) eps_c sqrt(c) (a|c)
        inv4a = pow(4 * a, -1, c)
        kp = _kron_phase(a, c)
        assert kp is not None
        phase = Fraction(-inv4a * b * b, c) + _eps_phase(c) + kp
        return RootOfUnityMultiple.make(1, c, phase)
    if c % 4 == 0:
        if b % 2:
            return _ZERO
        # b even: shift x by a^{-1} b/2; then G(a,0,c) = (1+i) eps_a^{-1} sqrt(c) (c|a)
        inva = pow(a, -1, c)
        kp = _kron_phase(c, a)
        assert kp is not None
        phase = (
            Fraction(-inva * (b // 2) ** 2, c)
            + Fraction(1, 8)
            - _eps_phase(a)
            + kp
        )
        return RootOfUnityMultiple.make(1, 2 * c, phase)
    # c = 2 mod 4: split off the factor 2; G(w, b; 2) = 1 + (-1)^(w+b)
    u = c // 2
    if b % 2 == 0:
        return _ZERO
    return gauss_sum_exact(2 * a, b, u).scaled(2)


def fischer_sum(d: int, c: int, delta: int) -> RootOfUnityMultiple:
    """H_{d,c}(delta) = (1/2) sum_{j mod 2c} e(d (6j + delta)^2 / (24c)).

    Expanding the square gives (1/2) e(d delta^2/(24c)) G(3d, d*delta; 2c).
    Depends on delta only through delta mod 6.
    """
    if c < 1:
        raise ValueError("modulus must be positive")
    g = gauss_sum_exact(3 * d, d * delta, 2 * c)
    return g.scaled(Fraction(1, 2)).rotated(Fraction(d * delta * delta, 24 * c))


def fischer_sum_direct(d: int, c: int, delta: int, prec: int = 80) -> mpmath.mpc:
    with mpmath.workprec(prec):
        total = mpmath.mpc(0)
        for j in range(2 * c):
            total += mpmath.expjpi(mpmath.mpf((d * (6 * j + delta) ** 2) % (24 * c)) / (12 * c))
        return total / 2


# ------------------------------------------------------- twisted Weyl sums


def _weyl_terms(v: int, m: int, n: int, c: int) -> list[tuple[int, int]]:
    """(numerator of phase in 24c-ths, signed weight) for each b with b^2 = mn."""
    if m % 24 != 1 or n % 24 != 1:
        raise ValueError("m and n must be 1 mod 24")
    if gcd(v, 6) != 1:
        raise ValueError("v must be coprime to 6")
    _, sf = ntcore.squarefree_decompose(m)
    if sf != m:
        raise ValueError("m must be squarefree")
    out = []
    for b in ntcore.sqrts_mod(m * n, 24 * c):
        w = ntcore.kronecker(12, b) * genus_chi_explicit(m, b, c, n)
        if w:
            out.append(((2 * b * v) % (24 * c), w))
    return out


def weyl_sum(v: int, m: int, n: int, c: int, prec: int | None = None):
    """S_v(m, n; 24c): real; float64 by default, mpf at `prec` bits."""
    terms = _weyl_terms(v, m, n, c)
    if prec is None:
        tot = sum(w * math.cos(math.pi * k / (12 * c)) for k, w in terms)
        return tot
    with mpmath.workprec(prec + 10):
        tot = mpmath.mpf(0)
        for k, w in terms:
            tot += w * mpmath.cos(mpmath.pi * mpmath.mpf(k) / (12 * c))
        return +tot


def weyl_sum_m1_cosine_form(v: int, n: int, c: int, prec: int | None = None):
    """S_v(1, n; 24c) via the generalized-pentagonal cosine identity:
    4 * sum over l mod 2c, l(3l+1)/2 = (n-1)/24 (mod c)."""
    from .dedekind_kloosterman import pentagonal_cos_sum

    if n % 24 != 1:
        raise ValueError("n must be 1 mod 24")
    val = pentagonal_cos_sum((n - 1) // 24, c, v, prec=prec)
    if prec is None:
        return 4 * val
    with mpmath.workprec(prec + 10):
        return +(4 * val)


# ------------------------------------- the identity grid (both directions)


def x_prime(x: int) -> int:
    """x' = (x - 1)/24 for x = 1 (mod 24)."""
    if x % 24 != 1:
        raise ValueError("x must be 1 mod 24")
    return (x - 1) // 24


def kloosterman_from_weyl(Mp: int, np_: int, c: int, prec: int = 128):
    """K(M', n'; c) = (sqrt(c/3)/4) (12|v) sum_{u | (v,c)} mu(u) (m|u) S_{v/u}(m, n; 24c/u)

    with M = 24M' + 1 = v^2 m (m squarefree), n = 24n' + 1.
    """
    M = 24 * Mp + 1
    n = 24 * np_ + 1
    v, m = ntcore.squarefree_decompose(M)
    with mpmath.workprec(prec + 10):
        total = mpmath.mpf(0)
        for u in ntcore.divisors(gcd(v, c)):
            s = weyl_sum(v // u, m, n, c // u, prec=prec)
            total += ntcore.moebius(u) * ntcore.kronecker(m, u) * s
        pref = mpmath.sqrt(mpmath.mpf(c) / 3) / 4 * ntcore.kronecker(12, v)
        return pref * total


def weyl_from_kloosterman(v: int, m: int, n: int, c: int, prec: int = 128):
    """S_v(m, n; 24c) = 4 sqrt(3) sum_{u | (v,c)} (12|v/u) (m|u) sqrt(u/c) K(((v/u)^2 m)', n'; c/u)."""
    if gcd(v, 6) != 1 or m % 24 != 1 or n % 24 != 1:
        raise ValueError("need (v,6)=1 and m = n = 1 mod 24")
    with mpmath.workprec(prec + 10):
        total = mpmath.mpf(0)
        for u in ntcore.divisors(gcd(v, c)):
            vu = v // u
            kl = kloosterman(x_prime(vu * vu * m), x_prime(n), c // u, prec=prec)
            total += (
                ntcore.kronecker(12, vu)
                * ntcore.kronecker(m, u)
                * mpmath.sqrt(mpmath.mpf(u) / c)
                * kl
            )
        return 4 * mpmath.sqrt(mpmath.mpf(3)) * total


# --------------------------------------------------- the splitting identity


def eta_multiplier_split_gap(v: int, d: int, c: int, prec: int = 128):
    """Gap in the two-term Fischer-sum splitting of a single eta-multiplier term.

    LHS: sqrt(3c) (12|v) e(d~ (v^2-1)/(24c)) exp(pi i s(d,c)), with d~ the
    inverse of d mod c for odd c, mod 2c for even c.
    RHS: e((2v + d alpha^2)/(24c)) H_{-d,c}(alpha) + e((-2v + d beta^2)/(24c)) H_{-d,c}(beta),
    alpha = 1 - d~ c - d~ v, beta = 1 - d~ c + d~ v.
    """
    if gcd(d, c) != 1:
        raise ValueError("d must be a unit mod c")
    if gcd(v, 6) != 1:
        raise ValueError("v must be coprime to 6")
    dbar = pow(d, -1, c if c % 2 else 2 * c)
    alpha = 1 - dbar * c - dbar * v
    beta = 1 - dbar * c + dbar * v
    with mpmath.workprec(prec + 10):
        s = dedekind_sum(d, c)
        lhs = (
            mpmath.sqrt(3 * mpmath.mpf(c))
            * ntcore.kronecker(12, v)
            * mpmath.expjpi(2 * mpmath.mpf((dbar * (v * v - 1) // 24) % c) / c)
            * mpmath.expjpi(mpmath.mpf(s.numerator) / s.denominator)
        )
        rhs = mpmath.mpc(0)
        for sign, gam in ((1, alpha), (-1, beta)):
            h = fischer_sum(-d, c, gam).evaluate_mp(prec)
            rhs += mpmath.expjpi(mpmath.mpf((sign * 2 * v + d * gam * gam) % (24 * c)) / (12 * c)) * h
        return abs(lhs - rhs)
