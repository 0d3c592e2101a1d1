"""Dedekind sums and exact Kloosterman multisets against brute-force oracles."""

import math
from fractions import Fraction
from math import gcd

import mpmath
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from etasums import dedekind_kloosterman as dk


def sawtooth(x: Fraction) -> Fraction:
    """((x)) = x - floor(x) - 1/2 for x not an integer, else 0."""
    if x.denominator == 1:
        return Fraction(0)
    return x - math.floor(x) - Fraction(1, 2)


def dedekind_oracle(d: int, c: int) -> Fraction:
    return sum(
        (sawtooth(Fraction(r, c)) * sawtooth(Fraction(d * r, c)) for r in range(1, c)),
        Fraction(0),
    )


coprime_pair = st.tuples(st.integers(1, 60), st.integers(-120, 120)).filter(
    lambda t: gcd(t[1], t[0]) == 1
)


@given(coprime_pair)
@example((1, 0))
@example((12, 5))
def test_dedekind_against_defining_sum(t):
    c, d = t
    assert dk.dedekind_sum(d, c) == dedekind_oracle(d % c, c)


@given(st.integers(2, 500))
def test_dedekind_s1(c):
    assert dk.dedekind_sum(1, c) == Fraction((c - 1) * (c - 2), 12 * c)


@given(coprime_pair)
def test_dedekind_symmetries(t):
    c, d = t
    s = dk.dedekind_sum(d, c)
    assert dk.dedekind_sum(-d, c) == -s
    assert dk.dedekind_sum(d + c, c) == s
    if c > 1:
        dbar = pow(d % c, -1, c)
        assert dk.dedekind_sum(dbar, c) == s


@given(coprime_pair)
def test_dedekind_scaled_integral(t):
    c, d = t
    v = dk.dedekind_scaled(d, c)
    assert Fraction(v, 6 * c) == dk.dedekind_sum(d, c)


@given(st.integers(1, 200))
@example(1)
@example(2)
@example(240)
def test_unit_data_matches_recursion(c):
    units, inv, scaled = dk.unit_data(c)
    assert len(units) == len(inv) == len(scaled)
    for u, i, s in zip(units, inv, scaled):
        if c > 1:
            assert (u * i) % c == 1
        assert s == dk.dedekind_scaled(int(u), c)


def kloosterman_oracle(a: int, b: int, c: int) -> mpmath.mpc:
    """Direct complex-exponential evaluation from the definition."""
    total = mpmath.mpc(0)
    for d in range(c):
        if gcd(d, c) != 1:
            continue
        dbar = pow(d, -1, c) if c > 1 else 0
        s = dk.dedekind_sum(d, c)
        phase = mpmath.mpf(s.numerator) / s.denominator / 2 + mpmath.mpf(dbar * a + d * b) / c
        total += mpmath.exp(2j * mpmath.pi * phase)
    return total


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(-40, 40), st.integers(-40, 40))
def test_kloosterman_exact_against_oracle(c, a, b):
    with mpmath.workprec(80):
        direct = kloosterman_oracle(a, b, c)
        exact = dk.kloosterman_exact(a, b, c).evaluate()
        assert abs(direct.imag) < 1e-18
        assert abs(exact.imag) < 1e-9
        assert abs(direct.real - exact.real) < 1e-9


@settings(max_examples=40)
@given(st.integers(1, 60), st.integers(-30, 30), st.integers(-30, 30))
def test_kloosterman_symmetry_and_periodicity(c, a, b):
    k1 = dk.kloosterman_exact(a, b, c)
    assert k1.is_real_symmetric()
    assert k1 == dk.kloosterman_exact(b, a, c)
    assert k1 == dk.kloosterman_exact(a + c, b, c)
    assert k1 == dk.kloosterman_exact(a, b - c, c)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 80), st.integers(-20, 20), st.integers(-20, 20))
def test_kloosterman_float_vs_mp(c, a, b):
    kf = dk.kloosterman(a, b, c)
    km = dk.kloosterman(a, b, c, prec=80)
    assert abs(kf - float(km)) < 1e-9 * max(1.0, c)


def test_kloosterman_trivial():
    assert dk.kloosterman(0, 0, 1) == 1.0
    assert dk.kloosterman_exact(5, -7, 1).counts == ((0, 1),)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 24), st.integers(-10, 10))
def test_selberg_identity_small(c, b):
    gap = dk.selberg_identity_gap(b, c, prec=96)
    assert gap < mpmath.mpf(2) ** -60


def test_dedekind_rejects_noncoprime():
    with pytest.raises(ValueError):
        dk.dedekind_sum(2, 4)
    with pytest.raises(ValueError):
        dk.dedekind_sum(0, 5)
