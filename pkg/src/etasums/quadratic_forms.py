"""Integral binary quadratic forms: class enumeration, the level-6 residue
classes, Atkin-Lehner involutions, genus characters, CM points and geodesics.

Conventions: [a, b, c] is ax^2 + bxy + cy^2 with discriminant b^2 - 4ac.
A matrix M = (A, B; C, D) with positive determinant acts by

    (M Q)(x, y) = (1/det M) Q(Dx - By, -Cx + Ay),

so that M maps the root tau_Q to tau_{MQ}.  Forms of negative discriminant
are taken positive definite (a > 0). The distinguished family is
Q^(r)_n = {[a,b,c] : b^2-4ac = n, 6 | a, b = r (mod 12), a > 0 if n < 0}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from . import ntcore


@dataclass(frozen=True, order=True)
class QF:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    @property
    def content(self) -> int:
        return gcd(gcd(self.a, self.b), self.c)

    def value(self, x: int, y: int) -> int:
        return self.a * x * x + self.b * x * y + self.c * y * y

    def primitive_part(self) -> tuple["QF", int]:
        g = self.content
        return QF(self.a // g, self.b // g, self.c // g), g

    def __neg__(self) -> "QF":
        return QF(-self.a, -self.b, -self.c)

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)


Matrix = tuple[int, int, int, int]  # (A, B, C, D) row-major

W_MATRICES: dict[int, Matrix] = {
    1: (1, 0, 0, 1),
    2: (2, -1, 6, -2),
    3: (3, 1, 6, 3),
    6: (0, -1, 6, 0),
}

# r -> r * {1, 7, 5, 11}: how W_d permutes the residue classes b mod 12
W_RESIDUE_MULT = {1: 1, 2: 7, 3: 5, 6: 11}


def mat_det(M: Matrix) -> int:
    return M[0] * M[3] - M[1] * M[2]


def mat_mul(M: Matrix, N: Matrix) -> Matrix:
    return (
        M[0] * N[0] + M[1] * N[2],
        M[0] * N[1] + M[1] * N[3],
        M[2] * N[0] + M[3] * N[2],
        M[2] * N[1] + M[3] * N[3],
    )


def compose(Q: QF, M: Matrix) -> QF:
    """Column substitution Q(Ax + By, Cx + Dy); no determinant scaling."""
    A, B, C, D = M
    a = Q.value(A, C)
    c = Q.value(B, D)
    b = 2 * Q.a * A * B + Q.b * (A * D + B * C) + 2 * Q.c * C * D
    return QF(a, b, c)


def act(M: Matrix, Q: QF) -> QF:
    """The determinant-normalized action; requires the result integral."""
    A, B, C, D = M
    det = mat_det(M)
    if det <= 0:
        raise ValueError("action requires positive determinant")
    raw = compose(Q, (D, -B, -C, A))
    if raw.a % det or raw.b % det or raw.c % det:
        raise ValueError(f"{M} does not act integrally on {Q.as_tuple()}")
    return QF(raw.a // det, raw.b // det, raw.c // det)


def atkin_lehner(d: int, Q: QF) -> QF:
    """W_d Q for d | 6 (fixed choices of the Atkin-Lehner matrices)."""
    return act(W_MATRICES[d], Q)


def mobius(M: Matrix, tau: complex) -> complex:
    A, B, C, D = M
    return (A * tau + B) / (C * tau + D)


def tau_point(Q: QF) -> complex:
    """CM point of a positive definite form."""
    n = Q.disc
    if n >= 0 or Q.a <= 0:
        raise ValueError("CM point requires negative discriminant, a > 0")
    return complex(-Q.b / (2 * Q.a), math.sqrt(-n) / (2 * Q.a))


# ------------------------------------------------------------- enumeration


def classes_definite(n: int) -> list[QF]:
    """Reduced representatives of all SL_2(Z)-classes of discriminant n < 0.

    Includes imprimitive forms.  Reduction: |b| <= a <= c, with b >= 0 when
    |b| = a or a = c.
    """
    if n >= 0 or n % 4 not in (0, 1):
        raise ValueError("need n < 0 with n = 0, 1 mod 4")
    out = []
    amax = math.isqrt(-n // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            num = b * b - n
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if b < 0 and (a == c or -b == a):
                continue
            out.append(QF(a, b, c))
    return sorted(out)


def _reduced_indefinite(n: int) -> set[QF]:
    """All Gauss-reduced forms: 0 < b < sqrt(n), sqrt(n) - b < 2|a| < sqrt(n) + b."""
    s = math.isqrt(n)
    out = set()
    for b in range(1, s + 1):
        if (n - b * b) % 4:
            continue
        prod = (b * b - n) // 4  # = a*c, negative
        for a in range(1, -prod + 1):
            if prod % a == 0 and s - b < 2 * a <= s + b:
                out.add(QF(a, b, prod // a))
                out.add(QF(-a, b, prod // -a))
    return out


def _rho(Q: QF, n: int) -> QF:
    """Gauss reduction step on a reduced indefinite form."""
    s = math.isqrt(n)
    c = Q.c
    m = 2 * abs(c)
    b = (-Q.b) % m
    b += m * ((s - b) // m)  # unique rep in (sqrt(n) - 2|c|, sqrt(n))
    return QF(c, b, (b * b - n) // (4 * c))


def classes_indefinite(n: int) -> list[QF]:
    """One reduced representative per SL_2(Z)-class, n > 0 nonsquare."""
    if n <= 0 or ntcore.is_square(n) or n % 4 not in (0, 1):
        raise ValueError("need positive nonsquare n = 0, 1 mod 4")
    remaining = _reduced_indefinite(n)
    reps = []
    while remaining:
        q0 = min(remaining)
        reps.append(q0)
        q = q0
        while True:
            q = _rho(q, n)
            remaining.discard(q)
            if q == q0:
                break
    return sorted(reps)


def classes_square(n: int) -> list[QF]:
    """SL_2(Z)-class representatives [0, w, c], 0 <= c < w, for n = w^2 > 0."""
    w = math.isqrt(n)
    if n <= 0 or w * w != n:
        raise ValueError("need a positive square discriminant")
    return [QF(0, w, c) for c in range(w)]


def sl2_classes(n: int) -> list[QF]:
    """SL_2(Z)-class representatives of discriminant n (any sign)."""
    if n % 4 not in (0, 1) or n == 0:
        raise ValueError("not a discriminant")
    if n < 0:
        return classes_definite(n)
    if ntcore.is_square(n):
        return classes_square(n)
    return classes_indefinite(n)


def _ext_gcd(u: int, w: int) -> tuple[int, int, int]:
    """(g, x, y) with u*x + w*y = g = gcd(u, w)."""
    old_r, r = u, w
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_x, x = x, old_x - q * x
        old_y, y = y, old_y - q * y
    return old_r, old_x, old_y


def square_normal_form(Q: QF) -> QF:
    """The [0, w, c], 0 <= c < w normal form of a square-discriminant class."""
    n = Q.disc
    w = math.isqrt(n)
    if n <= 0 or w * w != n:
        raise ValueError("square discriminant required")
    for num, den in _root_fractions(Q):
        g, x, y = _ext_gcd(num, den)
        assert g == 1
        M = (num, -y, den, x)
        assert mat_det(M) == 1
        cand = compose(Q, M)
        if cand.b == w:
            assert cand.a == 0
            return QF(0, w, cand.c % w)
    raise AssertionError("no root produced the +w orientation")


def _root_fractions(Q: QF) -> list[tuple[int, int]]:
    """Roots of Q(x, 1) = 0 on P^1 as primitive (num, den) pairs, den >= 0."""
    n = Q.disc
    w = math.isqrt(n)
    assert w * w == n
    if Q.a == 0:
        roots = [(1, 0)]
        if Q.b != 0:
            f = Fraction(-Q.c, Q.b)
            roots.append((f.numerator, f.denominator))
        return roots
    out = []
    for sgn in (1, -1):
        f = Fraction(-Q.b + sgn * w, 2 * Q.a)
        out.append((f.numerator, f.denominator))
    return out


def root_vectors(Q: QF) -> list[tuple[int, int]]:
    """Primitive integer vectors spanning the two zero-lines (square disc)."""
    return _root_fractions(Q)


def class_number(n: int) -> int:
    return len(sl2_classes(n))


# --------------------------------------------------- the level-6 residue family


class LiftSearchError(RuntimeError):
    """No level-6 representative found within the search bound."""


def lift_to_residue_one(Q: QF, bound: int = 320) -> QF:
    """An SL_2(Z)-equivalent form [a', b', c'] with 6 | a' and b' = 1 (mod 12).

    Searches primitive vectors (u, w) with 6 | Q(u, w), completes to a
    unimodular matrix, and normalizes b' into (-|a'|, |a'|] by translations
    (which preserve b' mod 12 since 12 | 2a').
    """
    n = Q.disc
    for m in range(1, bound + 1):
        shell = [(u, m) for u in range(-m, m + 1)]
        shell += [(su * m, w) for w in range(m) for su in (1, -1)]
        for u, w in shell:
            if gcd(u, w) != 1:
                continue
            aa = Q.value(u, w)
            if aa % 6 or (n < 0 and aa <= 0):
                continue
            g, x, y = _ext_gcd(u, w)
            if g < 0:
                x, y = -x, -y
            M = (u, -y, w, x)  # det = u*x + w*y = 1
            assert mat_det(M) == 1
            cand = compose(Q, M)
            assert cand.a == aa and cand.disc == n
            if cand.b % 12 != 1:
                continue
            if aa != 0:
                span = 2 * abs(aa)
                b2 = cand.b % span
                if b2 > abs(aa):
                    b2 -= span
                cand = QF(aa, b2, (b2 * b2 - n) // (4 * aa))
                assert cand.b % 12 == 1
            return cand
    raise LiftSearchError(f"no residue-1 lift of {Q.as_tuple()} within bound {bound}")


def residue_one_classes(n: int) -> list[QF]:
    """Representatives of the level-6 classes with b = 1 (mod 12), disc n.

    One per SL_2(Z)-class, by the canonical bijection between SL_2(Z)-classes
    and level-6 classes in each allowed residue.
    """
    return [lift_to_residue_one(Q) for Q in sl2_classes(n)]


# ------------------------------------------------------------ genus character


def genus_chi(m: int, Q: QF) -> int:
    """The genus character: (m | r) for any represented r coprime to m,
    or 0 if gcd(a, b, c, m) > 1.  Requires m = 1 mod 4 squarefree, 6 | a.

    Evaluated by the closed form kron(m/g, a) * kron(g, c) with
    g = +-gcd(a/6, m) = 1 (mod 4).
    """
    _check_chi_modulus(m)
    if Q.a % 6:
        raise ValueError("genus character evaluated on forms with 6 | a")
    g = gcd(Q.a // 6, m)  # equals gcd(Q.a, m) as gcd(m, 6) = 1
    if g % 4 == 3:
        g = -g
    return ntcore.kronecker(m // g, Q.a) * ntcore.kronecker(g, Q.c)


def _check_chi_modulus(m: int) -> None:
    if m % 4 != 1:
        raise ValueError("genus character needs m = 1 (mod 4)")
    _, sf = ntcore.squarefree_decompose(m)
    if sf != m:
        raise ValueError("genus character needs squarefree m")


def genus_chi_definitional(m: int, Q: QF, search: int = 40) -> int:
    """Reference implementation: (m | r) for the first represented r with
    gcd(r, m) = 1; 0 when gcd(contents, m) > 1."""
    _check_chi_modulus(m)
    if gcd(Q.content, m) > 1:
        return 0
    for s in range(0, search + 1):
        for x in range(-s, s + 1):
            for y in {s - abs(x), abs(x) - s}:
                r = Q.value(x, y)
                if r != 0 and gcd(r, m) == 1:
                    return ntcore.kronecker(m, r)
    raise RuntimeError("no represented value coprime to m found")


def genus_chi_explicit(m: int, b: int, c: int, n: int) -> int:
    """chi_m on [6c, b, (b^2 - mn)/(24c)] by the prime-by-prime closed form.

    Requires b^2 = mn (mod 24c).
    """
    _check_chi_modulus(m)
    val = (b * b - m * n) // (24 * c)
    assert (b * b - m * n) % (24 * c) == 0
    out = 1
    for p, lam in ntcore.factorize(c):
        plam = p**lam
        if m % p:
            out *= ntcore.kronecker(m, plam)
        else:
            pstar = p if p % 4 == 1 else -p
            out *= ntcore.kronecker(m // pstar, plam) * ntcore.kronecker(
                pstar, (b * b - m * n) // plam
            )
        if out == 0:
            return 0
    return out


# ------------------------------------------------------- geodesics and cusps


def automorph(Q: QF) -> Matrix:
    """Generator of the oriented automorphism group of an indefinite form.

    For content delta, the stabilizer is generated by the automorph of the
    primitive part.
    """
    P, _ = Q.primitive_part()
    n = P.disc
    t, u = ntcore.pell(n)
    assert (t + P.b * u) % 2 == 0
    M = ((t + P.b * u) // 2, P.c * u, -P.a * u, (t - P.b * u) // 2)
    assert mat_det(M) == 1
    return M


def geodesic_apex(Q: QF) -> complex:
    """Top point of the root semicircle of an indefinite form with a != 0."""
    n = Q.disc
    if n <= 0 or Q.a == 0:
        raise ValueError("need an indefinite form with a != 0")
    return complex(-Q.b / (2 * Q.a), math.sqrt(n) / (2 * abs(Q.a)))


def cusp_class_divisor(r: int, s: int) -> int:
    """The d | 6 with W_d (r/s) in the cusp class of infinity.

    The class of r/s on Gamma_0(6) is determined by gcd(s, 6); the group
    operation d * d' = dd'/gcd(d,d')^2 sends gcd 6 -> 1, 3 -> 2, 2 -> 3, 1 -> 6.
    """
    g = gcd(s, 6)
    return {6: 1, 3: 2, 2: 3, 1: 6}[g]


def minimal_height_representative(Q: QF) -> QF:
    """A level-6-equivalent form of the same class with the smallest leading
    coefficient found, hence the highest root point (definite forms only).

    Leading coefficients across the class are the values Q(x, y) with
    6 | y and gcd(x, y) = 1, realized by acting with (A, B; -y, x).
    """
    n = Q.disc
    if n >= 0:
        raise ValueError("height reduction applies to definite forms")
    if Q.b % 12 != 1 or Q.a % 6 or Q.a <= 0:
        raise ValueError("expected a positive-definite level-6 form with b = 1 mod 12")
    best = Q
    xb = 2 * math.isqrt(abs(n)) + 24
    tb = math.isqrt(abs(n)) // 6 + 4
    for t in range(-tb, tb + 1):
        y = 6 * t
        for x in range(-xb, xb + 1):
            if gcd(x, y) != 1:
                continue
            aa = Q.value(x, y)
            if aa <= 0 or aa >= best.a:
                continue
            g, u_, w_ = _ext_gcd(x, y)
            if g < 0:
                u_, w_ = -u_, -w_
            M = (u_, w_, -y, x)  # det = u_*x + w_*y = 1, lower-left = 0 mod 6
            assert mat_det(M) == 1
            cand = act(M, Q)
            assert cand.a == aa and cand.disc == n and cand.b % 12 == 1
            best = cand
    span = 2 * best.a
    b2 = best.b % span
    if b2 > best.a:
        b2 -= span
    out = QF(best.a, b2, (b2 * b2 - n) // (4 * best.a))
    assert out.b % 12 == 1 and out.disc == n
    return out
