"""Analytic kernels: half-integer Bessel closed forms, ascending series with
rigorous tail bounds, the order-derivative of J at 3/2, digamma at
half-integers, Whittaker values M_{s,0}, and the normalized incomplete-gamma
tail ratio.

All arbitrary-precision routines take the working precision in bits as an
explicit argument and return mpmath values computed with guard bits; nothing
depends on the ambient mpmath context.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
import scipy.special

# --------------------------------------------------------------- digamma


def digamma_half(k: int, prec: int = 128) -> mpmath.mpf:
    """psi(k + 1/2) for integer k >= 0, from psi(1/2) = -gamma - 2 ln 2."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    with mpmath.workprec(prec + 10):
        val = -mpmath.euler - 2 * mpmath.log(2)
        acc = mpmath.mpf(0)
        for j in range(1, k + 1):
            acc += mpmath.mpf(2) / (2 * j - 1)
        return +(val + acc)


# ------------------------------------------------------- Bessel functions


def _bessel_series(nu, x, prec: int, sign: int) -> mpmath.mpf:
    """sum_k sign^k (x/2)^(nu+2k) / (k! Gamma(nu+k+1)) with a ratio-test tail
    bound: once r_k = (x/2)^2/((k+1)(nu+k+1)) < 1/2 the tail is < |term| r/(1-r).

    For the alternating (J) case the partial sums reach ~e^x before collapsing
    to O(x^{-1/2}), so ~x log2(e) guard bits absorb the cancellation.
    """
    guard = 30 + (int(1.5 * float(x)) + 10 if sign < 0 else 0)
    with mpmath.workprec(prec + guard):
        nu = mpmath.mpf(nu)
        xh = mpmath.mpf(x) / 2
        x2 = xh * xh
        term = xh**nu / mpmath.gamma(nu + 1)
        total = term
        k = 0
        floor = mpmath.mpf(2) ** (-(prec + 15))
        while True:
            k += 1
            term = term * sign * x2 / (k * (nu + k))
            total += term
            r = x2 / ((k + 1) * (nu + k + 1))
            if r < 0.5 and abs(term) * r / (1 - r) < floor * (abs(total) + floor):
                return +total


def bessel_I(nu, x, prec: int = 128) -> mpmath.mpf:
    """I_nu(x) for real nu > -1 and x > 0."""
    if x <= 0:
        raise ValueError("x must be positive")
    if nu == 1.5 and x > 0.5:
        with mpmath.workprec(prec + 30):
            xm = mpmath.mpf(x)
            val = mpmath.sqrt(2 / (mpmath.pi * xm)) * (mpmath.cosh(xm) - mpmath.sinh(xm) / xm)
            return +val
    if nu == 0.5:
        with mpmath.workprec(prec + 30):
            xm = mpmath.mpf(x)
            return +(mpmath.sqrt(2 / (mpmath.pi * xm)) * mpmath.sinh(xm))
    return _bessel_series(nu, x, prec, +1)


def bessel_J(nu, x, prec: int = 128) -> mpmath.mpf:
    """J_nu(x) for real nu > -1 and x > 0."""
    if x <= 0:
        raise ValueError("x must be positive")
    if nu == 1.5 and x > 0.5:
        with mpmath.workprec(prec + 30):
            xm = mpmath.mpf(x)
            val = mpmath.sqrt(2 / (mpmath.pi * xm)) * (mpmath.sin(xm) / xm - mpmath.cos(xm))
            return +val
    if nu == 0.5:
        with mpmath.workprec(prec + 30):
            xm = mpmath.mpf(x)
            return +(mpmath.sqrt(2 / (mpmath.pi * xm)) * mpmath.sin(xm))
    return _bessel_series(nu, x, prec, -1)


def bessel_i32_np(x):
    """Vectorized float64 I_{3/2}; safe for 1e-4 < x < 700."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(2 / (np.pi * x)) * (np.cosh(x) - np.sinh(x) / x)


def bessel_j32_np(x):
    """Vectorized float64 J_{3/2}."""
    x = np.asarray(x, dtype=float)
    return np.sqrt(2 / (np.pi * x)) * (np.sin(x) / x - np.cos(x))


def dJ_dorder_at_3half(x, prec: int = 128) -> mpmath.mpf:
    """d/dnu J_nu(x) at nu = 3/2:

    ln(x/2) J_{3/2}(x) - sum_k (-1)^k psi(k+5/2) (x/2)^{3/2+2k} / (k! Gamma(k+5/2)).
    """
    if x <= 0:
        raise ValueError("x must be positive")
    guard = 30 + int(1.5 * float(x)) + 10
    with mpmath.workprec(prec + guard):
        xm = mpmath.mpf(x)
        xh = xm / 2
        x2 = xh * xh
        lead = mpmath.log(xh) * bessel_J(1.5, xm, prec + 20)
        psi = digamma_half(2, prec + 20)  # psi(5/2)
        term = xh ** mpmath.mpf(1.5) / mpmath.gamma(mpmath.mpf(2.5))
        total = psi * term
        k = 0
        floor = mpmath.mpf(2) ** (-(prec + 15))
        while True:
            k += 1
            term = term * (-1) * x2 / (k * (k + mpmath.mpf(1.5)))
            psi += mpmath.mpf(2) / (2 * k + 3)  # psi(k + 5/2)
            total += psi * term
            r = x2 / ((k + 1) * (k + mpmath.mpf(2.5)))
            if r < 0.5 and abs(psi * term) * r / (1 - r) * 2 < floor * (abs(total) + 1):
                break
        return +(lead - total)


def dJ_dorder_at_3half_np(x, terms: int = 60):
    """Vectorized float64 order-derivative of J at 3/2 (same series).

    The alternating series cancels ~x log2(e) bits, so float64 is only
    trustworthy for x <= 20 (~7 significant digits at the boundary).
    """
    x = np.asarray(x, dtype=float)
    if np.any(x > 20):
        raise ValueError("float64 series loses too many bits for x > 20; use dJ_dorder_at_3half")
    xh = x / 2
    lead = np.log(xh) * bessel_j32_np(x)
    k = np.arange(terms)
    psi = scipy.special.psi(k + 2.5)
    logw = (1.5 + 2 * k) * np.log(xh[..., None]) - scipy.special.gammaln(k + 1) - scipy.special.gammaln(k + 2.5)
    series = ((-1.0) ** k * psi * np.exp(logw)).sum(axis=-1)
    return lead - series


# ------------------------------------------------------- Whittaker M_{s,0}


def whittaker_M_s0(s, y, prec: int = 128) -> mpmath.mpf:
    """M_{s,0}(y) = 2^{2s-1} Gamma(s + 1/2) sqrt(y) I_{s-1/2}(y/2), y > 0."""
    if y <= 0:
        raise ValueError("y must be positive")
    with mpmath.workprec(prec + 30):
        sm = mpmath.mpf(s)
        ym = mpmath.mpf(y)
        nu = sm - mpmath.mpf(0.5)
        if nu == 1.5:
            ib = bessel_I(1.5, ym / 2, prec + 20)
        else:
            ib = _bessel_series(nu, ym / 2, prec + 20, +1)
        val = 2 ** (2 * sm - 1) * mpmath.gamma(sm + mpmath.mpf(0.5)) * mpmath.sqrt(ym) * ib
        return +val


def whittaker_M_s0_float(s: float, y) -> np.ndarray:
    """Vectorized float64 M_{s,0}(y) via scipy's I-Bessel."""
    y = np.asarray(y, dtype=float)
    return 2 ** (2 * s - 1) * scipy.special.gamma(s + 0.5) * np.sqrt(y) * scipy.special.iv(s - 0.5, y / 2)


def whittaker_M20(y, prec: int = 128) -> mpmath.mpf:
    """M_{2,0}(y) = 6 sqrt(pi) sqrt(y) I_{3/2}(y/2)."""
    with mpmath.workprec(prec + 20):
        val = 6 * mpmath.sqrt(mpmath.pi) * mpmath.sqrt(mpmath.mpf(y)) * bessel_I(1.5, mpmath.mpf(y) / 2, prec + 10)
        return +val


# ------------------------------------------- normalized incomplete gamma


def incomplete_gamma_neg32(x, prec: int = 128) -> mpmath.mpf:
    """Gamma(-3/2, x) = (2/3)(x^{-3/2} e^{-x} - 2 x^{-1/2} e^{-x} + 2 sqrt(pi) erfc(sqrt(x)))."""
    if x <= 0:
        raise ValueError("x must be positive; the tail integral diverges at 0")
    with mpmath.workprec(prec + 20):
        xm = mpmath.mpf(x)
        ex = mpmath.exp(-xm)
        val = (
            mpmath.mpf(2)
            / 3
            * (xm ** mpmath.mpf(-1.5) * ex - 2 * ex / mpmath.sqrt(xm) + 2 * mpmath.sqrt(mpmath.pi) * mpmath.erfc(mpmath.sqrt(xm)))
        )
        return +val


def beta_incomplete(y, prec: int = 128) -> mpmath.mpf:
    """beta(y) = Gamma(-3/2, pi y / 6) / Gamma(-3/2), with Gamma(-3/2) = 4 sqrt(pi) / 3.

    Defined for y > 0.  The defining tail integral (3/(4 sqrt(pi)))
    int_{pi y/6}^infty e^{-t} t^{-5/2} dt diverges as y -> 0+, so there is no
    finite value at 0; beta(y) ~ (pi y/6)^{-3/2} / (2 sqrt(pi)) near 0 and
    decreases monotonically to 0 as y -> infinity.
    """
    if y <= 0:
        raise ValueError("y must be positive; the tail integral diverges at 0")
    with mpmath.workprec(prec + 20):
        num = incomplete_gamma_neg32(mpmath.pi * mpmath.mpf(y) / 6, prec + 10)
        return +(num / (4 * mpmath.sqrt(mpmath.pi) / 3))


def beta_incomplete_float(y) -> np.ndarray:
    """Vectorized float64 beta(y) for y > 0."""
    y = np.asarray(y, dtype=float)
    x = np.pi * y / 6
    ex = np.exp(-x)
    g = 2.0 / 3.0 * (x**-1.5 * ex - 2 * ex / np.sqrt(x) + 2 * math.sqrt(math.pi) * scipy.special.erfc(np.sqrt(x)))
    return g / (4 * math.sqrt(math.pi) / 3)
