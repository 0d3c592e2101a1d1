"""Form classes, the level-6 family, genus characters, geodesic data."""

import math
from math import gcd

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from etasums import ntcore
from etasums import quadratic_forms as qf
from etasums.quadratic_forms import QF


def random_gamma06(draw_ints):
    """Build an element of Gamma_0(6) from small generator words."""
    T = (1, 1, 0, 1)
    S6 = (1, 0, 6, 1)
    M = (1, 0, 0, 1)
    for k in draw_ints:
        M = qf.mat_mul(M, T if k % 2 == 0 else S6)
        if k % 3 == 0:
            M = qf.mat_mul(M, (1, -1, 0, 1))
    return M


# ------------------------------------------------------------- enumeration


def test_classes_definite_disc_minus23():
    assert [q.as_tuple() for q in qf.classes_definite(-23)] == [
        (1, 1, 6),
        (2, -1, 3),
        (2, 1, 3),
    ]


def test_class_numbers_definite():
    for n, h in [(-23, 3), (-47, 5), (-71, 7), (-95, 8), (-119, 10), (-3, 1), (-4, 1)]:
        assert qf.class_number(n) == h


def test_classes_definite_includes_imprimitive():
    forms = qf.classes_definite(-92)
    assert QF(2, 2, 12) in forms  # 2 * [1,1,6]
    assert QF(4, 2, 6) in forms and QF(4, -2, 6) in forms  # 2 * [2,+-1,3]
    prim = [q for q in forms if q.content == 1]
    assert len(prim) == 3 and len(forms) == 6


@given(st.integers(-400, -3))
def test_classes_definite_are_reduced_and_distinct(n):
    assume(n % 4 in (0, 1))
    forms = qf.classes_definite(n)
    assert len(set(forms)) == len(forms)
    for q in forms:
        assert q.disc == n
        assert -q.a < q.b <= q.a <= q.c
        if q.b < 0:
            assert -q.b != q.a and q.a != q.c


def test_classes_indefinite():
    assert len(qf.classes_indefinite(73)) == 1
    assert len(qf.classes_indefinite(12)) == 2
    for q in qf.classes_indefinite(316):
        assert q.disc == 316


@given(st.integers(5, 500))
def test_indefinite_cycles_close(n):
    assume(n % 4 in (0, 1) and not ntcore.is_square(n))
    reps = qf.classes_indefinite(n)
    for q in reps:
        assert q.disc == n
        r, steps = q, 0
        while True:
            r = qf._rho(r, n)
            steps += 1
            assert steps < 200
            if r == q:
                break


def test_classes_square():
    assert [q.as_tuple() for q in qf.classes_square(25)] == [(0, 5, c) for c in range(5)]
    assert qf.classes_square(1) == [QF(0, 1, 0)]


@given(st.integers(1, 12), st.integers(-30, 30), st.integers(-8, 8), st.integers(-8, 8))
def test_square_normal_form_invariant(w, c0, p, r):
    """The [0,w,c] normal form is an SL_2(Z)-class invariant."""
    Q = QF(0, w, c0)
    M = qf.mat_mul((1, p, 0, 1), qf.mat_mul((1, 0, r, 1), (1, -p, 0, 1)))
    assert qf.mat_det(M) == 1
    Q2 = qf.act(M, Q)
    assert Q2.disc == w * w
    assert qf.square_normal_form(Q2) == QF(0, w, c0 % w)


# ----------------------------------------------------------------- the action


definite_forms = st.builds(
    QF,
    st.integers(1, 12),
    st.integers(-12, 12),
    st.integers(1, 20),
).filter(lambda q: q.disc < 0)


@given(definite_forms, st.lists(st.integers(0, 5), max_size=6))
def test_action_on_tau(Q, word):
    M = random_gamma06(word)
    Q2 = qf.act(M, Q)
    assert Q2.disc == Q.disc
    t1, t2 = qf.tau_point(Q), qf.tau_point(Q2)
    assert abs(qf.mobius(M, t1) - t2) < 1e-9


@given(definite_forms, st.lists(st.integers(0, 5), max_size=5))
def test_action_is_homomorphism(Q, word):
    M = random_gamma06(word)
    N = (5, 2, 12, 5)  # det 1
    assert qf.act(qf.mat_mul(M, N), Q) == qf.act(M, qf.act(N, Q))


def test_atkin_lehner_example():
    assert qf.atkin_lehner(2, QF(6, 1, 1)) == QF(36, -29, 6)


@given(definite_forms.filter(lambda q: q.a % 6 == 0 or q.c % 6 == 0))
def test_atkin_lehner_residue_action(Q):
    if Q.a % 6:
        Q = QF(Q.c, -Q.b, Q.a)  # flip to put the 6-divisible coefficient first
    for d in (1, 2, 3, 6):
        W = qf.atkin_lehner(d, Q)
        assert W.disc == Q.disc
        assert W.a % 6 == 0
        assert W.b % 12 == (Q.b * qf.W_RESIDUE_MULT[d]) % 12


@given(definite_forms.filter(lambda q: q.a % 6 == 0))
def test_atkin_lehner_involution(Q):
    for d in (1, 2, 3, 6):
        W2 = qf.atkin_lehner(d, qf.atkin_lehner(d, Q))
        # W_d^2 is a scalar matrix for d in {1, 2, 6}; for d = 3 it is
        # 3 * (a Gamma_0(6) element), so only the class is preserved
        assert W2.disc == Q.disc
        if d in (1, 2, 6):
            assert W2 == Q
        else:
            assert W2.b % 12 == Q.b % 12


# ----------------------------------------------------------------- the lifts


@given(st.integers(-13, 20).map(lambda k: 24 * k + 1))
@settings(max_examples=34, deadline=None)
def test_residue_one_classes(n):
    reps = qf.residue_one_classes(n)
    assert len(reps) == qf.class_number(n)
    for q in reps:
        assert q.disc == n
        assert q.a % 6 == 0
        assert q.b % 12 == 1
        if n < 0:
            assert q.a > 0


def test_lift_examples():
    assert qf.lift_to_residue_one(QF(1, 1, 6)) == QF(6, 1, 1)
    lifted = qf.lift_to_residue_one(QF(0, 5, 0))
    assert lifted.a % 6 == 0 and lifted.b % 12 == 1 and lifted.disc == 25
    assert qf.lift_to_residue_one(QF(0, 1, 0)) == QF(0, 1, 0)


# ------------------------------------------------------------ genus character


MVALS = [1, -23, -47, 73, 97, -95, -119]
NVALS = [1, 25, 49, -23, -47, 73, -95, 121]


def weyl_shape_forms(m: int, n: int, cmax: int = 12) -> list[QF]:
    """Forms [6c, b, (b^2-mn)/(24c)] with b^2 = mn (mod 24c), the shape on
    which the genus character enters the exponential sums."""
    out = []
    for c in range(1, cmax + 1):
        for b in ntcore.sqrts_mod(m * n, 24 * c):
            out.append(QF(6 * c, b, (b * b - m * n) // (24 * c)))
    return out


mn_pairs = st.tuples(st.sampled_from(MVALS), st.sampled_from(NVALS))


@given(mn_pairs, st.integers(0, 10**6))
@settings(max_examples=150, deadline=None)
def test_genus_chi_against_definitional(mn, pick):
    m, n = mn
    forms = weyl_shape_forms(m, n)
    assume(forms)
    Q = forms[pick % len(forms)]
    assert qf.genus_chi(m, Q) == qf.genus_chi_definitional(m, Q)


@given(mn_pairs, st.integers(0, 10**6), st.lists(st.integers(0, 5), max_size=5))
@settings(max_examples=80, deadline=None)
def test_genus_chi_gamma_invariant(mn, pick, word):
    m, n = mn
    forms = weyl_shape_forms(m, n)
    assume(forms)
    Q = forms[pick % len(forms)]
    Q2 = qf.act(random_gamma06(word), Q)
    assert Q2.a % 6 == 0
    assert qf.genus_chi(m, Q) == qf.genus_chi(m, Q2)


@given(mn_pairs, st.integers(0, 10**6))
@settings(max_examples=80, deadline=None)
def test_genus_chi_atkin_lehner_invariant(mn, pick):
    m, n = mn
    forms = weyl_shape_forms(m, n)
    assume(forms)
    Q = forms[pick % len(forms)]
    for d in (2, 3, 6):
        W = qf.atkin_lehner(d, Q)
        assert W.a % 6 == 0
        assert qf.genus_chi(m, Q) == qf.genus_chi(m, W)


@given(mn_pairs, st.integers(1, 40))
@settings(max_examples=120, deadline=None)
def test_genus_chi_explicit_path(mn, c):
    """The factored closed form agrees with the gcd-based evaluation."""
    m, n = mn
    for b in ntcore.sqrts_mod(m * n, 24 * c):
        Q = QF(6 * c, b, (b * b - m * n) // (24 * c))
        assert qf.genus_chi_explicit(m, b, c, n) == qf.genus_chi(m, Q)


@given(mn_pairs, st.integers(0, 10**6))
@settings(max_examples=100, deadline=None)
def test_genus_chi_multiplicative(mn, pick):
    """P2: chi([6aa',b,c]) = chi([6a,b,a'c]) chi([6a',b,ac]) for coprime a,a'."""
    m, n = mn
    forms = [q for q in weyl_shape_forms(m, n, 20) if (q.a // 6) % 2 == 0]
    forms = [q for q in forms if (q.a // 6) // 2 % 2 == 1 and (q.a // 6) > 2]
    assume(forms)
    Q = forms[pick % len(forms)]
    cc = Q.a // 6
    a = cc & -cc  # 2-part
    ap = cc // a
    assert gcd(a, ap) == 1 and a > 1 and ap > 1
    q1 = QF(6 * a, Q.b, ap * Q.c)
    q2 = QF(6 * ap, Q.b, a * Q.c)
    assert qf.genus_chi(m, Q) == qf.genus_chi(m, q1) * qf.genus_chi(m, q2)


@given(mn_pairs, st.integers(0, 10**6))
@settings(max_examples=80, deadline=None)
def test_genus_chi_sign(mn, pick):
    """P5: chi_m(-Q) = sgn(m) chi_m(Q)."""
    m, n = mn
    forms = weyl_shape_forms(m, n)
    assume(forms)
    Q = forms[pick % len(forms)]
    negQ = -Q
    sgn = 1 if m > 0 else -1
    assert qf.genus_chi_definitional(m, negQ) == sgn * qf.genus_chi_definitional(m, Q)


def test_genus_chi_zero_when_common_factor():
    # gcd(a, b, c, m) = 5 forces 0
    Q = QF(6 * 5, 5 * 12 + 5 * 0, 5)
    m = -95  # 5 | m
    Q = QF(30, 25, 5)
    assert gcd(gcd(Q.a, Q.b), gcd(Q.c, m)) % 5 == 0
    assert qf.genus_chi(m, Q) == 0
    assert qf.genus_chi_definitional(m, Q) == 0


# -------------------------------------------------------- geodesics and cusps


def test_automorph_disc73():
    (Q,) = qf.classes_indefinite(73)
    M = qf.automorph(Q)
    assert qf.mat_det(M) == 1
    assert qf.act(M, Q) == Q


@given(st.integers(5, 300))
def test_automorph_stabilizes(n):
    assume(n % 4 in (0, 1) and not ntcore.is_square(n))
    for Q in qf.classes_indefinite(n)[:3]:
        M = qf.automorph(Q)
        assert qf.mat_det(M) == 1
        assert qf.act(M, Q) == Q
        # apex lies on the invariant semicircle
        z = qf.geodesic_apex(Q)
        w = qf.mobius(M, z)
        assert abs(Q.a * (w.real**2 + w.imag**2) + Q.b * w.real + Q.c) < 1e-6


def test_automorph_imprimitive():
    Q = QF(2, 2, -6)  # 2 * [1, 1, -3], disc 52
    assert Q.disc == 52 and Q.content == 2
    M = qf.automorph(Q)
    assert qf.act(M, Q) == Q
    # and it is the automorph of the primitive part
    assert M == qf.automorph(QF(1, 1, -3))


def test_cusp_class_divisor():
    assert qf.cusp_class_divisor(1, 0) == 1  # infinity
    assert qf.cusp_class_divisor(0, 1) == 6  # zero
    assert qf.cusp_class_divisor(1, 2) == 3
    assert qf.cusp_class_divisor(1, 3) == 2
    assert qf.cusp_class_divisor(1, 6) == 1
    assert qf.cusp_class_divisor(2, 3) == 2


def test_root_vectors():
    assert qf.root_vectors(QF(0, 1, 0)) == [(1, 0), (0, 1)]
    rv = qf.root_vectors(QF(6, 1, -1))
    assert set(rv) == {(1, 3), (-1, 2)}


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        qf.classes_definite(10)
    with pytest.raises(ValueError):
        qf.classes_indefinite(25)
    with pytest.raises(ValueError):
        qf.tau_point(QF(1, 0, -1))
    with pytest.raises(ValueError):
        qf.genus_chi(3, QF(6, 1, 1))
