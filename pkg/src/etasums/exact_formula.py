"""Rademacher-type exact series for partition-family coefficients.

Two kernels drive every series here, both summed over the modulus c of the
eta-multiplier Kloosterman sum K(m', n'; c):

* ``I32`` (mixed-sign index pair): absolutely convergent I-Bessel series;
  truncation by block stability with the last block reported as the tail.
* ``dJds`` (positive index pair): the order-derivative J-Bessel series,
  conditionally convergent; summed in natural order to a fixed cap with the
  final oscillation band reported as the error.

Terms are evaluated in vectorized/float64 blocks where the kernel magnitude
permits and at working precision where it does not (large Bessel argument),
but the reduction is always performed in increasing-c order: the positive
case converges only conditionally, so order is part of the definition.

``kloosterman_fast`` evaluates the same K(m', n'; c) through the quadratic
Weyl-sum closed form (divisor/CRT work per term instead of a length-c sum);
``bench_kloosterman`` times it against the direct definition.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from math import gcd

import mpmath
import numpy as np

from . import ntcore
from .common import Approx, _jsonable
from .dedekind_kloosterman import kloosterman, unit_data
from .gauss_weyl import kloosterman_from_weyl, x_prime
from .special_functions import (
    bessel_I,
    bessel_i32_np,
    bessel_j32_np,
    dJ_dorder_at_3half,
    dJ_dorder_at_3half_np,
)


class InsufficientPrecisionError(ArithmeticError):
    """Integer rounding gap too large to trust the computed value."""


class BothNegativeError(ValueError):
    """The coefficient family is defined for index pairs not both negative."""


class BadShapeError(ValueError):
    """Argument not of the 24x+1 = v^2 m (m squarefree, (v,6)=1) shape."""


# float64 kernels are reliable below this Bessel argument; above it the
# alternating series / exp scale demands the arbitrary-precision path
_FLOAT_KERNEL_MAX_X = 20.0

_DEFAULT_OSC_CMAX = 5000
_HARD_CMAX = 400_000


@dataclass
class SeriesRun:
    """One truncated series evaluation with its reported uncertainty."""

    m: int
    n: int
    kernel: str  # "I32" | "dJds"
    precision_bits: int
    c_max: int  # requested ceiling (0 = adaptive)
    value: float = 0.0
    tail_estimate: float = math.inf
    c_max_used: int = 0

    def approx(self) -> Approx:
        return Approx(self.value, self.tail_estimate)

    def to_dict(self) -> dict:
        return {
            "value": _jsonable(self.value),
            "tail_estimate": _jsonable(self.tail_estimate),
            "c_max_used": self.c_max_used,
            "precision_bits": self.precision_bits,
        }


def _series_i32(mp_: int, np_: int, prec: int, tol: float, c_cap: int) -> tuple:
    """Block-stable I-Bessel series: returns (sum over c of K/c * I32, tail, c_used).

    Stops once three consecutive 10-term blocks each contribute less than
    tol/10 in absolute value.  The tail estimate combines the last block
    with the remaining sum modelled from the measured term size: term
    magnitudes decay like c^-2 here (Bessel factor c^-3/2, numerator sum
    of square-root size), so the remainder past C has rms about
    rms(term) * sqrt(C) / sqrt(3); a 3x safety factor is applied.
    """
    with mpmath.workprec(prec + 30):
        A_mp = mpmath.pi * mpmath.sqrt(abs((24 * mp_ + 1) * (24 * np_ + 1))) / 6
        A = float(A_mp)
        total = mpmath.mpf(0)
        block = mpmath.mpf(0)
        last_block = mpmath.mpf(0)
        recent = []  # |term| over the last ~100 moduli, for the tail model
        quiet = 0
        c = 0
        while True:
            c += 1
            x = A / c
            if x > _FLOAT_KERNEL_MAX_X:
                # exponentially large kernel: closed-form K at working
                # precision (the direct sum at this precision would cost
                # O(c) arbitrary-precision terms)
                term = (
                    kloosterman_from_weyl(mp_, np_, c, prec=prec + 20)
                    / c
                    * bessel_I(1.5, A_mp / c, prec + 20)
                )
            else:
                term = kloosterman(mp_, np_, c) / c * float(bessel_i32_np(x))
            block += term
            recent.append(float(abs(term)))
            if len(recent) > 30:
                recent.pop(0)
            if c % 10 == 0:
                total += block
                last_block = block
                quiet = quiet + 1 if abs(block) < tol / 10 else 0
                block = mpmath.mpf(0)
                if quiet >= 3 and c >= 60:
                    break
                if c >= min(c_cap, _HARD_CMAX):
                    if c_cap >= _HARD_CMAX:
                        raise RuntimeError(
                            f"I-Bessel series failed to stabilize by c = {c}"
                        )
                    break
        term_rms = math.sqrt(sum(t * t for t in recent) / len(recent))
        tail = (
            float(abs(last_block))
            + 1.8 * term_rms * math.sqrt(c)
            + 1e-13 * c
            + math.ldexp(1.0, -prec + 8) * (1 + float(abs(total)))
        )
        return +total, tail, c


def p_mn(m: int, n: int, prec: int = 128, c_max: int | None = None, tol: float | None = None) -> SeriesRun:
    """Exact-formula coefficient p(m, n) for m = n = 1 (mod 24).

    mn < 0: 2 pi |mn|^(-1/4) sum_c K(m',n';c)/c I_{3/2}(pi sqrt|mn|/(6c)),
    absolutely convergent, block-stable truncation.
    mn > 0: 4 (mn)^(-1/4) sum_c K(m',n';c)/c d/ds J_{s-1/2}(pi sqrt(mn)/(6c))
    at s=2, conditionally convergent: natural-order sum to ``c_max``
    (default 5000) with the final oscillation band as the error.

    The 4 (mn)^(-1/4) normalization of the positive case was confirmed
    numerically through the p(m,n) = p(n,m) symmetry runs and the
    s-derivative cycle traces before being hard-coded here.
    """
    if m % 24 != 1 or n % 24 != 1:
        raise ValueError("need m = n = 1 (mod 24)")
    if m < 0 and n < 0:
        raise BothNegativeError("index pair must not be both negative")
    mp_, np_ = x_prime(m), x_prime(n)
    if m * n < 0:
        with mpmath.workprec(prec + 30):
            pref = 2 * mpmath.pi / abs(mpmath.mpf(m) * n) ** mpmath.mpf("0.25")
            if tol is None:
                # first-term scale: K(.;1) = 1
                A = mpmath.pi * mpmath.sqrt(abs(mpmath.mpf(m) * n)) / 6
                scale = float(pref * bessel_I(1.5, A, 60))
                tol = max(1e-8, 1e-6 * abs(scale)) / float(pref)
            total, tail, c_used = _series_i32(mp_, np_, prec, tol, c_max or _HARD_CMAX)
            value = +(pref * total)
            tail = float(pref) * tail
        run = SeriesRun(m, n, "I32", prec, c_max or 0)
        run.value = value
        run.tail_estimate = tail
        run.c_max_used = c_used
        return run
    # positive pair: conditionally convergent order-derivative kernel
    cap = c_max or _DEFAULT_OSC_CMAX
    A = math.pi * math.sqrt(float(m) * n) / 6
    cs = np.arange(1.0, cap + 1.0)
    xs = A / cs
    kernel = np.empty_like(xs)
    small = xs <= _FLOAT_KERNEL_MAX_X
    if small.any():
        kernel[small] = dJ_dorder_at_3half_np(xs[small])
    for i in np.nonzero(~small)[0]:
        kernel[i] = float(dJ_dorder_at_3half(xs[i], prec=max(prec, 80)))
    # the length-c direct sum would cost O(cap^2) total here; the closed
    # form is O(divisors) per modulus and agrees to float64 accuracy
    ks = np.empty_like(xs)
    for i, c in enumerate(range(1, cap + 1)):
        ks[i] = float(kloosterman_from_weyl(mp_, np_, c, prec=64))
    pref = 4.0 / (float(m) * n) ** 0.25
    partials = pref * np.cumsum(ks / cs * kernel)
    window = partials[-max(10, cap // 10) :]
    run = SeriesRun(m, n, "dJds", prec, cap)
    run.value = float(partials[-1])
    run.tail_estimate = float(window.max() - window.min()) + 1e-10
    run.c_max_used = cap
    return run


def partition(k: int, prec: int = 128) -> int:
    """The partition number p(k) by the exact I-Bessel series.

    Realized through the two-index series at (m, n) = (1, 1 - 24k), whose
    modulus-c numerator specializes to the classical K(0, -k; c); the value
    is p(k) sqrt(24k - 1).  Rounds to the nearest integer and insists the
    rounding gap stay below 0.25.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = 1 - 24 * k
    root = math.sqrt(24 * k - 1)
    run = p_mn(1, n, prec=prec, tol=0.05 * root)
    with mpmath.workprec(prec + 30):
        x = run.value / mpmath.sqrt(24 * k - 1)
        nearest = int(mpmath.nint(x))
        gap = float(abs(x - nearest))
    if gap + run.tail_estimate / root >= 0.25:
        raise InsufficientPrecisionError(
            f"p({k}): rounding gap {gap:.3f} + tail {run.tail_estimate / root:.3f} >= 0.25"
        )
    return nearest


# ------------------------------------------------------------- fast K path


def kloosterman_fast(Mp: int, np_: int, c: int, prec: int = 128):
    """K(M', n'; c) through the closed quadratic Weyl-sum identity.

    Requires 24 M' + 1 = v^2 m with m squarefree and (v, 6) = 1 (every
    integer that is 1 mod 24 has this shape; the check guards the contract).
    Cost per term is divisor/CRT work rather than a length-c character sum.
    """
    if c < 1:
        raise BadShapeError("modulus c must be >= 1")
    M = 24 * Mp + 1
    v, m = ntcore.squarefree_decompose(M)
    if v * v * m != M or gcd(v, 6) != 1 or m % 24 != 1:
        raise BadShapeError(f"{M} is not of the v^2 m shape with (v,6)=1, m squarefree")
    return kloosterman_from_weyl(Mp, np_, c, prec=prec)


def _clear_number_theory_caches() -> None:
    unit_data.cache_clear()
    ntcore.factorize.cache_clear()


def bench_kloosterman(
    c_max: int = 10_000,
    shapes: tuple[tuple[int, int, int], ...] = ((1, 1, 1), (1, 25, 1), (-23, 1, 1), (1, 1, 5)),
    points: int = 9,
) -> dict:
    """Direct vs fast Kloosterman benchmark over log-spaced moduli.

    ``shapes`` lists (m, n, v) index triples; the first index of K is then
    (v^2 m)'.  Each row records wall times for the float64 direct sum and
    the Weyl-sum fast path, their ratio, and the agreement gap measured at
    80 bits.  Agreement must hold to 1e-15 relative per row.
    """
    cs = sorted({max(1, int(round(c))) for c in np.geomspace(10, c_max, points)})
    rows = []
    for m, n, v in shapes:
        Mp = x_prime(v * v * m)
        np2 = x_prime(n)
        for c in cs:
            check_direct = kloosterman(Mp, np2, c, prec=80)
            check_fast = kloosterman_fast(Mp, np2, c, prec=80)
            with mpmath.workprec(90):
                agreement = float(abs(check_direct - check_fast))
            if agreement > 1e-15 * max(1.0, float(abs(check_direct))):
                raise AssertionError(
                    f"fast path disagrees with direct sum at shape {(m, n, v)}, c={c}"
                )
            _clear_number_theory_caches()
            t0 = time.perf_counter()
            kloosterman(Mp, np2, c)
            t_direct = time.perf_counter() - t0
            _clear_number_theory_caches()
            t0 = time.perf_counter()
            kloosterman_fast(Mp, np2, c, prec=64)
            t_fast = time.perf_counter() - t0
            rows.append(
                {
                    "shape": {"m": m, "n": n, "v": v},
                    "c": c,
                    "t_direct": t_direct,
                    "t_fast": t_fast,
                    "ratio": t_direct / t_fast if t_fast > 0 else math.inf,
                    "agreement": agreement,
                }
            )
    logc = np.log([r["c"] for r in rows if r["c"] >= 100])
    logt = np.log([r["t_direct"] for r in rows if r["c"] >= 100])
    slope = float(np.polyfit(logc, logt, 1)[0]) if len(logc) >= 3 else math.nan
    return {"rows": rows, "direct_loglog_slope": slope, "c_max": c_max}


# ------------------------------------------------- diagnostic partial sums


def orthogonality_partial(m: int, n: int, c_cap: int = 2000) -> float:
    """Partial sum of K(m',n';c)/c J_{3/2}(pi sqrt(mn)/(6c)) up to c_cap.

    Tends (slowly, conditionally) to 0 for m != n and to 1/(2 pi) for m = n;
    used as a smoke test of the spectral normalization.
    """
    if m <= 0 or n <= 0 or m % 24 != 1 or n % 24 != 1:
        raise ValueError("need positive m = n = 1 (mod 24)")
    mp_, np_ = x_prime(m), x_prime(n)
    A = math.pi * math.sqrt(float(m) * n) / 6
    total = 0.0
    for c in range(1, c_cap + 1):
        k = float(kloosterman_from_weyl(mp_, np_, c, prec=64))
        total += k / c * float(bessel_j32_np(A / c))
    return total
