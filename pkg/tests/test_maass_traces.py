"""Tests for the weight-0 series evaluators and their class-number traces.

Expected values marked [DERIVED] were frozen from independent oracles
(partition recurrences, closed-form targets); cross-route agreement tests
need no external numbers at all.
"""

import math
from fractions import Fraction

import mpmath
import pytest

from etasums.maass_traces import (
    IDENTITY,
    ConvergenceRegionError,
    CuspPair,
    GeodesicPath,
    NonPositiveImaginaryPartError,
    P_poincare,
    P_poincare_adaptive,
    P_v_from_qexp,
    PoincareSpec,
    TraceRequest,
    _cycle_integral_closed,
    cm_point_exact,
    damping_data,
    normalizing_factor,
    poincare_term_count,
    reduce_point,
    run_trace,
    square_trace_target,
    trace_cm,
)
from etasums.qseries import partition_oracle
from etasums.quadratic_forms import QF, mobius, residue_one_classes


# ------------------------------------------------------------ validation


def test_spec_rejects_bad_index():
    with pytest.raises(ValueError):
        PoincareSpec(v=2, s=2.0)
    with pytest.raises(ValueError):
        PoincareSpec(v=3, s=2.0)
    with pytest.raises(ValueError):
        PoincareSpec(v=0, s=2.0)


def test_spec_rejects_convergence_boundary():
    with pytest.raises(ConvergenceRegionError):
        PoincareSpec(v=1, s=1.0)
    with pytest.raises(ConvergenceRegionError):
        PoincareSpec(v=1, s=0.5)
    PoincareSpec(v=1, s=1.0 + 1e-6)  # just inside is fine


def test_qexp_rejects_lower_half_plane():
    with pytest.raises(NonPositiveImaginaryPartError):
        P_v_from_qexp(1, complex(0.3, -1.0))
    with pytest.raises(NonPositiveImaginaryPartError):
        P_v_from_qexp(1, complex(0.3, 0.0))


def test_trace_request_validation():
    with pytest.raises(ValueError):
        TraceRequest(v=1, m=2, n=1)  # m != 1 mod 24
    with pytest.raises(ValueError):
        TraceRequest(v=1, m=25, n=1)  # m not squarefree
    with pytest.raises(ValueError):
        TraceRequest(v=2, m=1, n=1)  # v not coprime to 6
    with pytest.raises(ValueError):
        TraceRequest(v=1, m=1, n=1, mode="nonsense")


def test_cm_trace_rejects_positive_discriminant():
    with pytest.raises(ValueError):
        trace_cm(TraceRequest(v=1, m=1, n=25))


# ------------------------------------------------- q-expansion evaluation


def test_qexp_term_doubling_is_stable():
    # deep CM point of the principal discriminant -23 form
    tau = (Fraction(-1, 12), mpmath.sqrt(23) / 12)
    a = P_v_from_qexp(1, tau, terms=220)
    b = P_v_from_qexp(1, tau, terms=440)
    assert abs(complex(a.value - b.value)) < 1e-10


def test_qexp_error_bound_covers_truncation():
    tau = complex(0.21, 0.8)
    short = P_v_from_qexp(1, tau, terms=10)
    long = P_v_from_qexp(1, tau, terms=300)
    assert abs(complex(short.value - long.value)) <= short.err


# ------------------------------------------- coset-sum evaluation and raising


def test_normalizing_factor_at_s2():
    assert normalizing_factor(2.0) == pytest.approx(1 / 6, rel=1e-14)


def test_two_routes_agree_at_i():
    qexp = P_v_from_qexp(1, complex(0.0, 1.0))
    direct = P_poincare_adaptive(1, complex(0.0, 1.0))
    diff = abs(complex(qexp.value) - complex(direct.value))
    assert diff <= qexp.err + direct.err


@pytest.mark.parametrize(
    "tau", [complex(0.37, 0.62), complex(-0.45, 1.7), complex(0.08, 0.33)]
)
def test_two_routes_agree_generic_points(tau):
    qexp = P_v_from_qexp(1, tau)
    direct = P_poincare_adaptive(1, tau, rel_tol=1e-8)
    diff = abs(complex(qexp.value) - complex(direct.value))
    assert diff <= qexp.err + direct.err


def test_two_routes_agree_v5():
    tau = complex(0.13, 1.21)
    qexp = P_v_from_qexp(5, tau)
    direct = P_poincare_adaptive(5, tau, rel_tol=1e-8)
    diff = abs(complex(qexp.value) - complex(direct.value))
    assert diff <= qexp.err + direct.err


@pytest.mark.parametrize(
    "gamma",
    [
        (1, 1, 0, 1),
        (1, 0, 6, 1),
        (5, 1, 24, 5),
        (7, -3, 12, -5),
    ],
)
def test_group_invariance_above_s2(gamma):
    # undamped series is invariant under the level-6 group; test at s = 2.5
    # where convergence is comfortable for moderate caps
    assert gamma[0] * gamma[3] - gamma[1] * gamma[2] == 1
    tau = complex(0.29, 0.9)
    spec = PoincareSpec(v=1, s=2.5, height_cap=2048)
    a = P_poincare(spec, tau)
    b = P_poincare(spec, mobius(gamma, tau))
    assert abs(a - b) < 2e-4 * max(1.0, abs(a))


# ------------------------------------------------------------ cusp damping


def test_damping_rows_vertical_line_form():
    pair = damping_data(QF(0, 1, 0))
    assert pair.rows_by_slice() == {1: ((0, 1),), 6: ((0, 1),)}


def test_damping_rows_disc_25_classes():
    # hand-computed slice/row table for every residue-one class of disc 25
    expected = {
        (30, 25, 5): {2: ((12, -5),), 3: ((0, 1),)},
        (-6, 1, 1): {2: ((12, -5),), 3: ((12, -5),)},
        (18, 13, 2): {2: ((30, -13),), 3: ((0, 1),)},
        (42, 37, 8): {2: ((90, -37),), 3: ((0, 1),)},
        (6, 1, -1): {2: ((0, 1),), 3: ((0, 1),)},
    }
    for Q in residue_one_classes(25):
        assert damping_data(Q).rows_by_slice() == expected[Q.as_tuple()]


def test_damping_deletes_exactly_two_terms():
    Q = QF(0, 1, 0)
    pair = damping_data(Q)
    tau = complex(0.05, 0.35)
    plain = PoincareSpec(v=1, s=2.0, height_cap=128)
    damped = PoincareSpec(v=1, s=2.0, height_cap=128, damping=pair)
    assert poincare_term_count(plain, tau) - poincare_term_count(damped, tau) == 2


def test_damped_series_bounded_toward_cusp():
    # along the vertical root geodesic of x, the damped series stays bounded
    # while the plain series blows up with the identity-coset term
    Q = QF(0, 1, 0)
    spec = PoincareSpec(v=1, s=2.0, height_cap=128, damping=damping_data(Q))
    vals = [abs(P_poincare(spec, complex(0.0, math.exp(s)))) for s in (1.0, 2.5, 4.0)]
    assert vals[2] < vals[1] < vals[0] < 10.0


# ------------------------------------------------------- point reduction


@pytest.mark.parametrize(
    "gamma",
    [
        (1, 3, 0, 1),
        (1, 0, 6, 1),
        (5, 1, 24, 5),
        (7, -3, 12, -5),
        (25, -7, 18, -5),
    ],
)
def test_reduce_point_recovers_height(gamma):
    z = complex(0.173, 0.81)
    scrambled = mobius(gamma, z)
    _, t = reduce_point(scrambled)
    assert t.imag > 0.79
    assert abs(t.imag - z.imag) < 1e-9


def test_reduce_point_is_level_6():
    z = mobius((5, 1, 24, 5), complex(0.3, 1.4))
    M, t = reduce_point(z)
    a, b, c, d = M
    assert a * d - b * c == 1 and c % 6 == 0
    assert abs(mobius(M, z) - t) < 1e-12


# ------------------------------------------------------------- CM traces
# [DERIVED] single-class discriminants: the trace equals the partition
# number p((1 - n)/24) scaled by sqrt|n| (Euler-recurrence oracle).


@pytest.mark.parametrize("n", [-23, -47, -71])
def test_cm_trace_single_class_discriminants(n):
    res = trace_cm(TraceRequest(v=1, m=1, n=n))
    target = math.sqrt(-n) * partition_oracle((1 - n) // 24)
    assert abs(res.value - target) < 1e-6


def test_cm_trace_json_roundtrip():
    res = trace_cm(TraceRequest(v=1, m=1, n=-23))
    d = res.to_dict()
    assert set(d) == {"value", "err", "request", "truncation"}
    assert d["request"]["mode"] == "cm"
    assert d["truncation"]["classes"] == 3


# -------------------------------------------------- square-disc cycle traces


def test_square_trace_target_values():
    assert square_trace_target(1, 1, 1) == 4.0
    assert square_trace_target(5, 1, 25) == -4.0  # (12|5) = -1
    assert square_trace_target(1, 1, 25) == 0.0  # v = 1 has no t = 5 factor
    assert square_trace_target(7, 1, 49) == -4.0  # (12|7) = -1
    assert square_trace_target(35, 1, 25) == -4.0  # t = 5, l = 7
    assert square_trace_target(5, 25, 1) == 0.0  # n not m t^2


def test_square_trace_principal_case():
    res = run_trace(TraceRequest(v=1, m=1, n=1, mode="cycle_s2_square"))
    assert abs(res.value - 4.0) < 1e-2
    assert res.err < 1e-2


def test_square_trace_rejects_nonsquare():
    with pytest.raises(ValueError):
        run_trace(TraceRequest(v=1, m=1, n=73, mode="cycle_s2_square"))


# ---------------------------------------------- closed cycle integrals


def test_closed_cycle_integral_basepoint_independent():
    Q = residue_one_classes(73)[0]
    a = _cycle_integral_closed(1, Q, 2.2, 256)
    b = _cycle_integral_closed(1, Q, 2.2, 256, base_sig=0.83)
    assert abs(a - b) < 2e-4 * max(1.0, abs(a))


def test_geodesic_measure_constant():
    # dtau / Q(tau) pulled back through the parametrization equals dsig / w:
    # check numerically via a small finite difference
    Q = QF(6, 1, -3)  # disc 73
    w = math.sqrt(73.0)
    path = GeodesicPath(Q, w)
    for sig in (-1.3, 0.0, 0.7):
        h = 1e-6
        dtau = (path.point(sig + h) - path.point(sig - h)) / (2 * h)
        z = path.point(sig)
        qz = Q.a * z * z + Q.b * z + Q.c
        assert abs(dtau / qz - 1 / w) < 1e-6


def test_geodesic_vertical_branch():
    Q = QF(0, 1, 0)
    path = GeodesicPath(Q, 1.0)
    z = path.point(0.4)
    assert z.real == 0.0 and z.imag == pytest.approx(math.exp(0.4))
    assert path.sigma_of(z) == pytest.approx(0.4)


def test_cm_point_exact_matches_float():
    Q = QF(6, 1, 1)
    z = cm_point_exact(Q, 80)
    assert complex(z) == pytest.approx(complex(-1 / 12, math.sqrt(23) / 12))
