"""Exact q-expansion engine on the grading q^(1/24).

Laurent series with integer coefficients carry the eta function, Eisenstein
series, the j and J_6 Hauptmoduls, the weight -2 basis F_v, and the
half-integral-weight bases g_m (weight -1/2) and h_m (weight 5/2, m<0).
Internally everything is a Laurent series in integer powers of q plus a
global q^(r/24) prefactor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache


class TruncationError(ValueError):
    """Requested coefficients beyond the constructed truncation."""


class Lser:
    """Laurent series over Z in integer powers of q, truncated at `prec`.

    Coefficients cover exponents offset <= e < prec.
    """

    __slots__ = ("offset", "coeffs", "prec")

    def __init__(self, offset: int, coeffs: list[int], prec: int | None = None):
        if prec is None:
            prec = offset + len(coeffs)
        # normalize: strip leading zeros, pad to prec
        need = prec - offset
        coeffs = list(coeffs[:need]) + [0] * max(0, need - len(coeffs))
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
            offset += 1
        self.offset = offset
        self.coeffs = coeffs
        self.prec = prec

    @classmethod
    def one(cls, prec: int) -> "Lser":
        return cls(0, [1], prec)

    def __getitem__(self, e: int) -> int:
        if e >= self.prec:
            raise TruncationError(f"coefficient of q^{e} beyond truncation {self.prec}")
        i = e - self.offset
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else 0

    def __add__(self, other: "Lser") -> "Lser":
        prec = min(self.prec, other.prec)
        off = min(self.offset, other.offset)
        out = [0] * (prec - off)
        for s in (self, other):
            for i, c in enumerate(s.coeffs):
                e = s.offset + i
                if e < prec:
                    out[e - off] += c
        return Lser(off, out, prec)

    def __neg__(self) -> "Lser":
        return Lser(self.offset, [-c for c in self.coeffs], self.prec)

    def __sub__(self, other: "Lser") -> "Lser":
        return self + (-other)

    def scale(self, k: int) -> "Lser":
        return Lser(self.offset, [c * k for c in self.coeffs], self.prec)

    def shift(self, e: int) -> "Lser":
        """Multiply by q^e."""
        return Lser(self.offset + e, self.coeffs, self.prec + e)

    def rescale(self, d: int) -> "Lser":
        """Substitute q -> q^d (d >= 1)."""
        out = [0] * ((len(self.coeffs) - 1) * d + 1) if self.coeffs else []
        for i, c in enumerate(self.coeffs):
            out[i * d] = c
        return Lser(self.offset * d, out, self.prec * d)

    def __mul__(self, other: "Lser") -> "Lser":
        # truncation: unknown terms of one factor meet the leading term of the other
        prec = min(self.prec + other.offset, other.prec + self.offset)
        off = self.offset + other.offset
        n = prec - off
        if n <= 0:
            return Lser(off, [], prec)
        a, b = self.coeffs, other.coeffs
        na = sum(1 for c in a if c)
        nb = sum(1 for c in b if c)
        out = [0] * n
        if min(na, nb) * max(len(a), len(b)) < len(a) * len(b):
            # sparse path
            if na > nb:
                a, b = b, a
            sparse = [(i, c) for i, c in enumerate(a) if c]
            for i, c in enumerate(b):
                if c:
                    for j, cc in sparse:
                        k = i + j
                        if k < n:
                            out[k] += c * cc
        else:
            for i, c in enumerate(a):
                if c:
                    top = min(len(b), n - i)
                    for j in range(top):
                        if b[j]:
                            out[i + j] += c * b[j]
        return Lser(off, out, prec)

    def inverse(self) -> "Lser":
        """Multiplicative inverse; leading coefficient must be a unit (+-1)."""
        if not self.coeffs or self.coeffs[0] not in (1, -1):
            raise ValueError("inverse requires leading coefficient +-1")
        lead = self.coeffs[0]
        n = self.prec - self.offset
        a = self.coeffs + [0] * (n - len(self.coeffs))
        inv = [0] * n
        inv[0] = lead
        for k in range(1, n):
            s = 0
            for j in range(1, min(k, len(self.coeffs) - 1) + 1):
                if a[j]:
                    s += a[j] * inv[k - j]
            inv[k] = -lead * s
        return Lser(-self.offset, inv, n - self.offset)

    def power(self, k: int) -> "Lser":
        if k < 0:
            return self.inverse().power(-k)
        result = Lser(0, [1], self.prec - self.offset * max(k - 1, 0))
        base = self
        e = k
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result


@dataclass(frozen=True)
class QSeries:
    """A series q^(r/24) * (Laurent series in q): exponents (r + 24k)/24."""

    r24: int
    ser: Lser

    @property
    def offset24(self) -> int:
        return self.r24 + 24 * self.ser.offset

    @property
    def prec24(self) -> int:
        return self.r24 + 24 * self.ser.prec

    def coeff24(self, e24: int) -> int:
        """Coefficient of q^(e24/24); zero off the residue grid."""
        if e24 >= self.prec24:
            raise TruncationError(f"exponent {e24}/24 beyond truncation")
        if (e24 - self.r24) % 24:
            return 0
        return self.ser[(e24 - self.r24) // 24]

    def __mul__(self, other: "QSeries") -> "QSeries":
        return QSeries(self.r24 + other.r24, self.ser * other.ser)

    def inverse(self) -> "QSeries":
        if self.r24 != 0:
            return QSeries(-self.r24, self.ser.inverse())
        return QSeries(0, self.ser.inverse())


def _pentagonal(prec: int, scale: int) -> Lser:
    """prod_{k>=1} (1 - q^(scale*k)) up to q^prec."""
    coeffs = [0] * prec
    coeffs[0] = 1
    k = 1
    while True:
        done = True
        for e in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
            es = e * scale
            if es < prec:
                coeffs[es] = 1 if k % 2 == 0 else -1
                done = False
        if done:
            break
        k += 1
    return Lser(0, coeffs, prec)


def eta(scale: int = 1, terms: int = 64) -> QSeries:
    """q-expansion of eta(scale*tau) with `terms` integer-grid coefficients."""
    return QSeries(scale, _pentagonal(terms, scale))


def _sigma1(n: int) -> int:
    s = 0
    for d in range(1, int(math.isqrt(n)) + 1):
        if n % d == 0:
            s += d
            if d != n // d:
                s += n // d
    return s


def eisenstein_E2(scale: int = 1, terms: int = 64) -> QSeries:
    """E_2(scale*tau) = 1 - 24 sum sigma_1(n) q^(scale*n)."""
    coeffs = [0] * terms
    coeffs[0] = 1
    n = 1
    while n * scale < terms:
        coeffs[n * scale] = -24 * _sigma1(n)
        n += 1
    return QSeries(0, Lser(0, coeffs, terms))


def _eisenstein_E4(terms: int) -> Lser:
    def sigma3(n):
        return sum(d**3 for d in range(1, n + 1) if n % d == 0)

    coeffs = [1] + [240 * sigma3(n) for n in range(1, terms)]
    return Lser(0, coeffs, terms)


@lru_cache(maxsize=8)
def build_F(terms: int = 64) -> QSeries:
    """The weight -2 form F = q^{-1} - 10 - 29q - ... on level 6."""
    n = terms + 2
    e2 = (
        eisenstein_E2(1, n).ser
        + eisenstein_E2(2, n).ser.scale(-2)
        + eisenstein_E2(3, n).ser.scale(-3)
        + eisenstein_E2(6, n).ser.scale(6)
    )
    assert all(c % 2 == 0 for c in e2.coeffs)
    half = Lser(e2.offset, [c // 2 for c in e2.coeffs], e2.prec)
    quot = _pentagonal(n, 1) * _pentagonal(n, 2) * _pentagonal(n, 3) * _pentagonal(n, 6)
    # (eta1 eta2 eta3 eta6)^2 = q * quot^2 on the integer grid
    den = (quot * quot).shift(1)
    f = half * den.inverse()
    assert f[-1] == 1 and f[0] == -10, "level-6 weight -2 form has wrong expansion"
    return QSeries(0, Lser(f.offset, f.coeffs, terms))


@lru_cache(maxsize=8)
def build_J6(terms: int = 64) -> QSeries:
    """The level-6 Hauptmodul J_6 = q^{-1} - 4 + 79q + 352q^2 + ..."""
    n = terms + 2
    a = _pentagonal(n, 1) * _pentagonal(n, 2)
    b = _pentagonal(n, 3) * _pentagonal(n, 6)
    # (eta1 eta2 / eta3 eta6)^4 = q^{-1} (a/b)^4, (3 eta3 eta6 / eta1 eta2)^4 = 81 q (b/a)^4
    r = a * b.inverse()
    r4 = (r * r) * (r * r)
    r4inv = r4.inverse()
    j6 = r4.shift(-1) + r4inv.shift(1).scale(81)
    assert j6[-1] == 1 and j6[0] == -4 and j6[1] == 79 and j6[2] == 352
    return QSeries(0, Lser(j6.offset, j6.coeffs, terms))


class CoefficientBoundError(AssertionError):
    """The empirical majorant for basis coefficients failed."""


def _fv_majorant(v: int, k: int) -> float:
    return 10.0 * math.sqrt(v) * math.exp(4 * math.pi * math.sqrt(v * (max(k, 0) + 1)))


def _log_fv_majorant(v: int, k: int) -> float:
    """log of the majorant; safe where the direct value overflows a float."""
    return math.log(10.0 * math.sqrt(v)) + 4 * math.pi * math.sqrt(v * (max(k, 0) + 1))


def _within_majorant(v: int, k: int, coeff: int) -> bool:
    if coeff == 0:
        return True
    # integer bit length against the log-majorant avoids float overflow
    return (abs(coeff).bit_length() - 1) * math.log(2) <= _log_fv_majorant(v, k)


@lru_cache(maxsize=64)
def basis_Fv(v: int, terms: int = 64) -> QSeries:
    """Weight -2 basis element F_v = q^{-v} + O(1) on level 6."""
    if v < 1:
        raise ValueError("v must be >= 1")
    if v == 1:
        f = build_F(terms)
    else:
        work = terms + v
        fv = build_F(work).ser * build_J6(work).ser.power(v - 1)
        for j in range(v - 1, 0, -1):
            cj = fv[-j]
            if cj:
                fv = fv - basis_Fv(j, terms + 1).ser.scale(cj)
        f = QSeries(0, fv)
    s = f.ser
    assert s[-v] == 1 and all(s[-j] == 0 for j in range(1, v))
    for k in range(-v, min(s.prec, terms)):
        if not _within_majorant(v, k, s[k]):
            raise CoefficientBoundError(f"|a_{v}({k})| exceeds the growth majorant")
    return QSeries(0, Lser(s.offset, s.coeffs, min(s.prec, terms)))


@lru_cache(maxsize=8)
def j_invariant(terms: int = 64) -> QSeries:
    """j = E_4^3 / Delta = q^{-1} + 744 + 196884q + ..."""
    n = terms + 2
    e4 = _eisenstein_E4(n)
    delta = _pentagonal(n, 1).power(24).shift(1)
    j = (e4 * e4 * e4) * delta.inverse()
    assert j[-1] == 1 and j[0] == 744 and j[1] == 196884
    return QSeries(0, Lser(j.offset, j.coeffs, terms))


def _jprime(terms: int) -> Lser:
    """j' = -q dj/dq = q^{-1} - 196884q - ..."""
    j = j_invariant(terms).ser
    return Lser(j.offset, [-(j.offset + i) * c for i, c in enumerate(j.coeffs)], j.prec)


@lru_cache(maxsize=32)
def basis_gm(m: int, terms: int = 8) -> QSeries:
    """The scaled weight -1/2 basis element m^(3/2) g_m, for m ≡ 1 (mod 24), m > 0.

    Series q^{-m/24} + (integer coefficients) q^{23/24 + k}; built as
    eta^{-1} times a monic polynomial in j.
    """
    if m < 1 or m % 24 != 1:
        raise ValueError("m must be positive and 1 mod 24")
    deg = (m - 1) // 24
    n = terms + deg + 2
    etainv = _pentagonal(n, 1).inverse()
    jser = j_invariant(n).ser
    # eta^{-1} j^k has leading integer-grid exponent -k (prefactor q^{-1/24})
    work = etainv * jser.power(deg) if deg else etainv
    for k in range(deg - 1, -1, -1):
        ck = work[-k]
        if ck:
            work = work - (etainv * jser.power(k) if k else etainv).scale(ck)
    for k in range(deg):
        assert work[-k] == 0
    assert work[-deg] == 1
    return QSeries(-1, work)


@lru_cache(maxsize=32)
def basis_hm_neg(m: int, terms: int = 8) -> QSeries:
    """The scaled weight 5/2 basis element |m|^(-3/2) h_m for m ≡ 1 (mod 24), m < 0.

    Series q^{m/24} - (class-number coefficient) q^{1/24} - ...; built as
    eta * j' times a monic polynomial in j.
    """
    if m > 0 or m % 24 != 1:
        raise ValueError("m must be negative and 1 mod 24")
    deg = (-m - 23) // 24
    n = terms + deg + 3
    base = _pentagonal(n, 1) * _jprime(n)  # eta*j' without the q^{1/24}
    jser = j_invariant(n).ser
    work = base * jser.power(deg) if deg else base
    for k in range(deg - 1, -1, -1):
        ck = work[-k - 1]
        if ck:
            work = work - (base * jser.power(k) if k else base).scale(ck)
    for k in range(deg):
        assert work[-k - 1] == 0
    assert work[-deg - 1] == 1
    return QSeries(1, work)


@dataclass(frozen=True)
class ExactCoefficient:
    """p(m,n) = integer * sqrt(radicand) / denom, exactly."""

    integer: int
    radicand: int
    denom: int

    def value(self) -> float:
        return self.integer * math.sqrt(self.radicand) / self.denom

    def mp_value(self, mp):
        return mp.mpf(self.integer) * mp.sqrt(self.radicand) / self.denom


def coefficient_p(m: int, n: int, terms: int = 8) -> ExactCoefficient:
    """Exact p(m,n) for m < 0 < n, both 1 mod 24, read off the h_m basis.

    From |m|^{-3/2} h_m = q^{m/24} - sum |mn| p(m,n) |m|^{-3/2} q^{n/24}:
    p(m,n) = -A sqrt|m| / n where A is the printed coefficient.
    """
    if not (m < 0 < n and m % 24 == 1 and n % 24 == 1):
        raise ValueError("need m < 0 < n with m, n = 1 mod 24")
    need = (n - m) // 24 + 2
    h = basis_hm_neg(m, max(terms, need))
    a = h.coeff24(n)
    # cross-check against the dual g_n display when n is 1 mod 24 and small
    return ExactCoefficient(-a, -m, n)


def partition_oracle(k: int) -> int:
    """p(k) by the Euler pentagonal recurrence (exact)."""
    return _partition_list(k)[k]


@lru_cache(maxsize=None)
def _partition_list(k: int) -> list[int]:
    p = [1] + [0] * k
    for n in range(1, k + 1):
        total = 0
        j = 1
        while True:
            g1 = j * (3 * j - 1) // 2
            if g1 > n:
                break
            sign = 1 if j % 2 else -1
            total += sign * p[n - g1]
            g2 = j * (3 * j + 1) // 2
            if g2 <= n:
                total += sign * p[n - g2]
            j += 1
        p[n] = total
    return p
