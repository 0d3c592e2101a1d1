"""Weight-0 Maass-type series on level 6 and their traces over form classes.

Two independent evaluation routes for the same function family:

* ``P_v_from_qexp`` applies the weight-raising differential operator to the
  weight -2 basis element F_v term by term, summing the q-expansion at
  arbitrary precision with a majorant-controlled tail.
* ``P_poincare`` sums the defining series over cosets of the translation
  subgroup (all four Atkin-Lehner slices, Moebius-signed), in float64 with
  numpy row blocks.  It supports the spectral parameter s > 1 and optional
  "damping": deletion of the two divergent terms attached to the root cusps
  of a square-discriminant form.

On top of these sit the three trace maps over genus-character-weighted class
representatives: CM value sums (negative discriminant), damped cycle
integrals of the s = 2 series (square discriminant), and the s-derivative of
cycle integrals (positive nonsquare discriminant).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Optional

import mpmath
import numpy as np
import scipy.special

from . import ntcore
from .common import Approx, _jsonable
from .qseries import _fv_majorant, basis_Fv
from .quadratic_forms import (
    QF,
    W_MATRICES,
    act,
    automorph,
    genus_chi,
    mat_det,
    mat_mul,
    minimal_height_representative,
    mobius,
    residue_one_classes,
    root_vectors,
)

Matrix = tuple[int, int, int, int]
IDENTITY: Matrix = (1, 0, 0, 1)
MOEBIUS_D = {1: 1, 2: -1, 3: -1, 6: 1}


class NonPositiveImaginaryPartError(ValueError):
    """Evaluation point not in the upper half plane."""


class ConvergenceRegionError(ValueError):
    """Spectral parameter outside the region of normal convergence (s > 1)."""


# --------------------------------------------------------------- domain types


@dataclass(frozen=True)
class CuspPair:
    """The two root cusps of a square-discriminant form with the coset data
    of the corresponding divergent series terms.

    ``deleted`` holds one ``(d, (C, D))`` per root: the Atkin-Lehner slice d
    whose image of the root is in the cusp class of infinity, and the bottom
    row (C, D) of the translation-coset that sends that image to infinity
    ((0, 1) denotes the identity coset).
    """

    roots: tuple[tuple[int, int], tuple[int, int]]
    deleted: tuple[tuple[int, tuple[int, int]], ...]

    def rows_by_slice(self) -> dict[int, tuple[tuple[int, int], ...]]:
        out: dict[int, tuple[tuple[int, int], ...]] = {}
        for d, row in self.deleted:
            out[d] = out.get(d, ()) + (row,)
        return out


@dataclass(frozen=True)
class PoincareSpec:
    """Parameters of one direct series evaluation.

    ``height_cap`` is the resolution knob: terms are kept while the image
    height exceeds 1/height_cap^2, so the enumerated lower-left entries reach
    about height_cap/sqrt(y) and doubling the cap quadruples the work.
    """

    v: int
    s: float
    weight: int = 0
    height_cap: int = 256
    damping: Optional[CuspPair] = None

    def __post_init__(self):
        if self.v < 1 or gcd(self.v, 6) != 1:
            raise ValueError("index v must be a positive integer coprime to 6")
        if self.s <= 1:
            raise ConvergenceRegionError("series converges only for s > 1")
        if self.weight != 0:
            raise ValueError("only weight 0 is implemented")


@dataclass(frozen=True)
class TraceRequest:
    """One trace computation over the discriminant-mn class list."""

    v: int
    m: int
    n: int
    mode: str = "cm"  # cm | cycle_s2_square | cycle_deriv
    precision_bits: int = 64
    height_cap: int = 256
    quad_tol: float = 1e-4

    def __post_init__(self):
        if self.v < 1 or gcd(self.v, 6) != 1:
            raise ValueError("index v must be a positive integer coprime to 6")
        if self.m % 24 != 1 or self.n % 24 != 1:
            raise ValueError("need m, n = 1 (mod 24)")
        if ntcore.squarefree_decompose(self.m)[1] != self.m:
            raise ValueError("m must be squarefree")
        if self.mode not in ("cm", "cycle_s2_square", "cycle_deriv"):
            raise ValueError(f"unknown mode {self.mode!r}")


@dataclass
class TraceResult:
    value: float
    err: float
    request: TraceRequest
    truncation: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "value": _jsonable(self.value),
            "err": _jsonable(self.err),
            "request": _jsonable(vars(self.request)),
            "truncation": _jsonable(self.truncation),
        }

    def approx(self) -> Approx:
        return Approx(self.value, self.err)


# ------------------------------------------------------- q-expansion route


def _log_majorant(v: int, k: int) -> float:
    """log of the coefficient majorant 10 sqrt(v) exp(4 pi sqrt(v(k+1)))."""
    return math.log(10.0 * math.sqrt(v)) + 4 * math.pi * math.sqrt(v * (max(k, 0) + 1))


def _qexp_cutoff(v: int, y: float, bits: int) -> int:
    """Smallest k beyond which every raised-series term is below 2^-(bits+8).

    Uses the coefficient majorant; starts past the hump of the term-size
    curve so the log-size is decreasing from here on.
    """
    target = -(bits + 8) * math.log(2)
    k = int(4 * v / y**2) + 4
    while True:
        lt = (
            _log_majorant(v, k)
            + math.log(k + 1 + 1 / (2 * math.pi * y))
            - 2 * math.pi * k * y
            - math.log(v)
        )
        if lt < target:
            return k
        if k > 200_000:
            raise RuntimeError("q-expansion cutoff search ran away; y too small?")
        k += max(4, k // 8)


def _qexp_tail(v: int, y: float, k: int) -> float:
    """Bound on the dropped tail beyond index k (absolute value)."""
    lt = (
        _log_majorant(v, k + 1)
        + math.log(k + 2 + 1 / (2 * math.pi * y))
        - 2 * math.pi * (k + 1) * y
        - math.log(v)
    )
    ratio = min(0.9, 1.2 * math.exp(-math.pi * y))
    return math.exp(min(lt, 700.0)) / (1 - ratio)


def qexp_workprec(v: int, y: float, bits: int) -> int:
    """Working precision needed to absorb the exp(2 pi v / y) size of the
    principal part before cancellation."""
    return bits + int(2 * math.pi * v / (y * math.log(2))) + 50


def P_v_from_qexp(v: int, tau, terms: int | None = None, bits: int = 64) -> Approx:
    """Evaluate the raised series -(1/v)[sum k a_v(k) e(k tau) +
    (1/(2 pi y)) sum a_v(k) e(k tau)] from the F_v expansion.

    ``tau`` may be a python complex, an mpmath mpc, or an (x, y) pair whose
    entries are exact (Fraction/mpf) for high-precision evaluation points.
    Returns an Approx whose value is an mpc and whose err bounds the dropped
    tail plus rounding.
    """
    if isinstance(tau, tuple):
        x_in, y_in = tau
    else:
        tau = mpmath.mpmathify(tau)
        x_in, y_in = tau.real, tau.imag
    yf = float(y_in)
    if yf <= 0:
        raise NonPositiveImaginaryPartError("Im(tau) must be positive")
    K = terms if terms is not None else _qexp_cutoff(v, yf, bits)
    fv = basis_Fv(v, K + 3).ser
    prec = qexp_workprec(v, yf, bits)
    with mpmath.workprec(prec):
        if isinstance(x_in, Fraction):
            x = mpmath.mpf(x_in.numerator) / x_in.denominator
        else:
            x = mpmath.mpf(x_in)
        if isinstance(y_in, Fraction):
            y = mpmath.mpf(y_in.numerator) / y_in.denominator
        else:
            y = mpmath.mpf(y_in)
        two_pi = 2 * mpmath.pi
        w = mpmath.exp(mpmath.mpc(-two_pi * y, two_pi * x))
        cur = w ** (-v)
        s0 = mpmath.mpc(0)
        s1 = mpmath.mpc(0)
        for k in range(-v, K + 1):
            a = fv[k]
            if a:
                t = a * cur
                s0 += t
                s1 += k * t
            cur *= w
        val = -(s1 + s0 / (two_pi * y)) / v
        val = +val
    err = _qexp_tail(v, yf, K) + math.ldexp(max(1.0, abs(complex(val))), -bits)
    return Approx(val, err)


def cm_point_exact(Q: QF, prec: int):
    """The CM point (-b + i sqrt|disc|) / (2a) as an mpc at ``prec`` bits."""
    D = Q.disc
    if D >= 0 or Q.a <= 0:
        raise ValueError("need a positive definite form")
    with mpmath.workprec(prec + 10):
        y = mpmath.sqrt(mpmath.mpf(-D)) / (2 * Q.a)
        x = mpmath.mpf(-Q.b) / (2 * Q.a)
        return mpmath.mpc(x, y)


# --------------------------------------------------- coset enumeration route


def _inv_mod_vec(a: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Elementwise a^{-1} mod m by the extended Euclid algorithm, vectorized.

    Requires 0 < a < m and gcd(a, m) = 1 elementwise (int64, products fit).
    """
    t = np.zeros_like(m)
    newt = np.ones_like(m)
    r = m.copy()
    newr = a.copy()
    while True:
        nz = newr != 0
        if not nz.any():
            break
        q = r // np.where(nz, newr, 1)
        t, newt = (
            np.where(nz, newt, t),
            np.where(nz, t - q * newt, newt),
        )
        r, newr = (
            np.where(nz, newr, r),
            np.where(nz, r - q * newr, newr),
        )
    return np.mod(t, m)


def _whittaker_rows(s: float, arg: np.ndarray) -> np.ndarray:
    return (
        2 ** (2 * s - 1)
        * scipy.special.gamma(s + 0.5)
        * np.sqrt(arg)
        * scipy.special.iv(s - 0.5, arg / 2)
    )


# Number of distinct C values examined per enumeration block in _slice_sum.
_C_BLOCK = 1_500_000


def _slice_sum(
    u: complex,
    s: float,
    v: int,
    y_floor: float,
    skip_rows: tuple[tuple[int, int], ...] = (),
) -> tuple[complex, int]:
    """Sum of M_{s,0}(4 pi v y_g) e(-v x_g) over translation cosets at u.

    Keeps every coset whose image height y_g = Im(gamma u) is at least
    ``y_floor``; rows are the bottom pairs (C, D), C > 0 = 0 (mod 6),
    gcd(C, D) = 1, taken once per +-(C, D), plus the identity coset (0, 1).
    Rows listed in ``skip_rows`` are omitted.
    """
    x_u, y_u = u.real, u.imag
    total = 0.0 + 0.0j
    nrows = 0
    if (0, 1) not in skip_rows:
        arg = 4 * math.pi * v * y_u
        total += float(_whittaker_rows(s, np.float64(arg))) * cmath.exp(
            -2j * math.pi * v * x_u
        )
        nrows += 1
    W2 = y_u / y_floor  # keep |C u + D|^2 <= W2
    c_max = int(math.sqrt(W2) / y_u)
    if c_max < 6:
        return total, nrows
    # Scan the C range in blocks so memory stays bounded even when the point
    # sits very low and the admissible C range runs into the millions.
    for c_base in range(6, c_max + 1, 6 * _C_BLOCK):
        c_stop = min(c_base + 6 * (_C_BLOCK - 1), c_max)
        Cs = np.arange(float(c_base), c_stop + 1.0, 6.0)
        half = np.sqrt(np.maximum(W2 - (Cs * y_u) ** 2, 0.0))
        ctr = -Cs * x_u
        lo = np.ceil(ctr - half).astype(np.int64)
        counts = np.floor(ctr + half).astype(np.int64) - lo + 1
        live = counts > 0
        if not live.any():
            continue
        Ci = Cs[live].astype(np.int64)
        lo = lo[live]
        counts = counts[live]
        nflat = int(counts.sum())
        if nflat > 40_000_000:
            raise RuntimeError("coset row budget exceeded; lower the resolution")
        starts = np.cumsum(counts) - counts
        idx = np.arange(nflat, dtype=np.int64)
        D = np.repeat(lo - starts, counts) + idx
        C = np.repeat(Ci, counts)
        keep = np.gcd(C, D) == 1
        for Cb, Db in skip_rows:
            if Cb:
                keep &= ~((C == Cb) & (D == Db))
        C = C[keep]
        D = D[keep]
        if not C.size:
            continue
        A = _inv_mod_vec(np.mod(D, C), C)
        Cf = C.astype(np.float64)
        wr = Cf * x_u + D.astype(np.float64)
        wi = Cf * y_u
        q2 = wr * wr + wi * wi
        y_g = y_u / q2
        x_g = A / Cf - wr / (Cf * q2)
        total += complex(
            np.sum(_whittaker_rows(s, 4 * np.pi * v * y_g) * np.exp(-2j * np.pi * v * x_g))
        )
        nrows += int(C.size)
    return total, nrows


def normalizing_factor(s: float) -> float:
    """C(s)/Gamma(2s) with C(s) = (2^s / pi) Gamma((s+1)/2)^2; equals 1/6 at
    s = 2, matching the raised q-expansion normalization."""
    return (
        2**s / math.pi * scipy.special.gamma((s + 1) / 2) ** 2 / scipy.special.gamma(2 * s)
    )


def P_poincare(spec: PoincareSpec, tau: complex) -> complex:
    """Single direct evaluation of the series at ``tau`` with the given cap.

    Slices d | 6 enter with the Moebius sign; the damped variant omits the
    two divergent terms recorded in spec.damping.
    """
    tau = complex(tau)
    if tau.imag <= 0:
        raise NonPositiveImaginaryPartError("Im(tau) must be positive")
    if spec.s <= 1:
        raise ConvergenceRegionError("series converges only for s > 1")
    skips = spec.damping.rows_by_slice() if spec.damping else {}
    y_floor = 1.0 / spec.height_cap**2
    total = 0.0 + 0.0j
    for d in (1, 2, 3, 6):
        u = mobius(W_MATRICES[d], tau)
        part, _ = _slice_sum(u, spec.s, spec.v, y_floor, skips.get(d, ()))
        total += MOEBIUS_D[d] * part
    return normalizing_factor(spec.s) * total


def poincare_term_count(spec: PoincareSpec, tau: complex) -> int:
    """Number of coset terms the evaluation at ``tau`` actually sums."""
    tau = complex(tau)
    skips = spec.damping.rows_by_slice() if spec.damping else {}
    y_floor = 1.0 / spec.height_cap**2
    n = 0
    for d in (1, 2, 3, 6):
        u = mobius(W_MATRICES[d], tau)
        _, k = _slice_sum(u, spec.s, spec.v, y_floor, skips.get(d, ()))
        n += k
    return n


def P_poincare_adaptive(
    v: int,
    tau: complex,
    s: float = 2.0,
    rel_tol: float = 1e-7,
    damping: Optional[CuspPair] = None,
    cap0: int = 64,
    cap_max: int = 65536,
) -> Approx:
    """Double the height cap until the value stabilizes to rel_tol."""
    cap = cap0
    prev = None
    while True:
        cur = P_poincare(PoincareSpec(v=v, s=s, height_cap=cap, damping=damping), tau)
        if prev is not None:
            delta = abs(cur - prev)
            scale = max(1.0, abs(cur))
            if delta <= rel_tol * scale or cap >= cap_max:
                return Approx(cur, 3 * delta + 1e-13 * scale)
        prev = cur
        cap *= 2


# ------------------------------------------------------------ cusp damping


def damping_data(Q: QF) -> CuspPair:
    """Locate the two divergent series terms of a square-discriminant form.

    Each root r/s of Q(x, 1) lies in the cusp class of infinity after exactly
    one Atkin-Lehner slice d | 6; within that slice the offending coset is
    the one whose bottom row kills the image root.
    """
    roots = root_vectors(Q)
    assert len(roots) == 2, "square-discriminant form must have two root lines"
    deleted = []
    for r, sden in roots:
        hits = []
        for d, W in W_MATRICES.items():
            r2 = W[0] * r + W[1] * sden
            s2 = W[2] * r + W[3] * sden
            g = gcd(r2, s2)
            r2, s2 = r2 // g, s2 // g
            if s2 % 6:
                continue
            if s2 == 0:
                row = (0, 1)
            else:
                C, D = (s2, -r2) if s2 > 0 else (-s2, r2)
                row = (C, D)
            hits.append((d, row))
        if len(hits) != 1:
            raise AssertionError(
                f"root {r}/{sden} of {Q.as_tuple()} met {len(hits)} slices, expected 1"
            )
        deleted.append(hits[0])
    assert len(deleted) == 2
    return CuspPair(roots=(roots[0], roots[1]), deleted=tuple(deleted))


# ------------------------------------------------------ point reduction


def reduce_point(tau, warm: Matrix = IDENTITY, max_iter: int = 600):
    """Greedy level-6 reduction: returns (M, M tau) with M in the level-6
    group chosen to (locally) maximize the image height.

    Walks by integer translations and inversion moves with lower-left entry
    divisible by 6, widening the candidate window as needed.  Points falling
    into the finite-cusp neighborhoods cannot be raised; the walk then stops
    with the point translated into |Re| <= 1/2.  ``tau`` may be a python
    complex or an mpmath mpc (used for points given at extended precision).
    """
    M = warm
    t = mobius(M, tau) if M != IDENTITY else tau
    if t.imag <= 0:
        raise NonPositiveImaginaryPartError("Im(tau) must be positive")
    for _ in range(max_iter):
        sh = round(float(t.real))
        if sh:
            M = mat_mul((1, -sh, 0, 1), M)
            t = mobius(M, tau)
        if t.imag >= 0.5:
            break
        window = 6 * max(4, int(1.5 / math.sqrt(float(t.imag)) / 6) + 2)
        best = None
        for c in range(6, window + 1, 6):
            d0 = round(-c * float(t.real))
            for d in (d0 - 1, d0, d0 + 1):
                if gcd(c, d) != 1:
                    continue
                q = abs(c * t + d) ** 2
                if q < 0.998 and (best is None or q < best[0]):
                    best = (q, c, d)
        if best is None:
            break
        _, c, d = best
        a = pow(d % c, -1, c)
        b = (a * d - 1) // c
        M = mat_mul((a, b, c, d), M)
        assert mat_det(M) == 1
        t = mobius(M, tau)
    sh = round(float(t.real))
    if sh:
        M = mat_mul((1, -sh, 0, 1), M)
        t = mobius(M, tau)
    return M, t


# ---------------------------------------------------------------- CM traces


def trace_cm(req: TraceRequest) -> TraceResult:
    """chi_m-weighted sum of series values at the CM points of the
    discriminant-mn class representatives, scaled by |mn|^{-1/2}."""
    if req.m * req.n >= 0:
        raise ValueError("CM trace needs mn < 0")
    D = req.m * req.n
    bits = req.precision_bits
    classes = residue_one_classes(D)
    total = mpmath.mpc(0)
    err = 0.0
    kmax = 0
    for Q in classes:
        chi = genus_chi(req.m, Q)
        if chi == 0:
            continue
        Qm = minimal_height_representative(Q)
        yf = math.sqrt(-D) / (2 * Qm.a)
        prec = qexp_workprec(req.v, yf, bits)
        tau = cm_point_exact(Qm, prec)
        val = P_v_from_qexp(req.v, (tau.real, tau.imag), bits=bits)
        kmax = max(kmax, _qexp_cutoff(req.v, yf, bits))
        with mpmath.workprec(prec):
            total += chi * val.value
        err += val.err
    with mpmath.workprec(bits + 60):
        total = total / mpmath.sqrt(-D)
        re, im = float(total.real), float(total.imag)
    err = err / math.sqrt(-D) + math.ldexp(max(1.0, abs(re)), -bits + 4)
    assert abs(im) < 1e-8 * max(1.0, abs(re)) + err, "trace has an imaginary residue"
    return TraceResult(
        value=re,
        err=err,
        request=req,
        truncation={"qexp_terms": kmax, "classes": len(classes)},
    )


# ------------------------------------------------- geodesic parametrization


@dataclass(frozen=True)
class GeodesicPath:
    """Arc-length parametrization of the root geodesic of an indefinite form.

    For a != 0 the semicircle tau(sig) = -b/(2a) - (w/(2a)) tanh(sig)
    + i (w/(2|a|)) sech(sig); for a = 0 (square discriminant only) the
    vertical line -c/b + i e^sig.  In both cases the form-valued measure
    dtau / Q(tau, 1) pulls back to dsig / w with w = sqrt(disc) > 0.
    """

    Q: QF
    w: float

    def point(self, sig: float) -> complex:
        Q = self.Q
        if Q.a != 0:
            th = math.tanh(sig)
            sech = 1.0 / math.cosh(sig)
            return complex(
                -Q.b / (2 * Q.a) - (self.w / (2 * Q.a)) * th,
                (self.w / (2 * abs(Q.a))) * sech,
            )
        assert Q.b > 0
        return complex(-Q.c / Q.b, math.exp(sig))

    def point_mp(self, sig):
        """mpmath version of ``point`` at the ambient working precision;
        needed because for |sig| beyond ~17 the float64 x-coordinate
        degenerates onto the root of the form."""
        Q = self.Q
        sig = mpmath.mpf(sig)
        if Q.a != 0:
            w = mpmath.sqrt(Q.disc)
            return mpmath.mpc(
                mpmath.mpf(-Q.b) / (2 * Q.a) - w / (2 * Q.a) * mpmath.tanh(sig),
                w / (2 * abs(Q.a)) / mpmath.cosh(sig),
            )
        assert Q.b > 0
        return mpmath.mpc(mpmath.mpf(-Q.c) / Q.b, mpmath.exp(sig))

    def sigma_of(self, z: complex) -> float:
        Q = self.Q
        if Q.a != 0:
            c = (2 * Q.a * z.real + Q.b) / self.w
            c = min(1.0 - 1e-15, max(-1.0 + 1e-15, c))
            return math.atanh(-c)
        return math.log(z.imag)

    def sigma_of_mp(self, z) -> float:
        """Arc-length coordinate of an mpmath point, safe near the roots."""
        Q = self.Q
        if Q.a != 0:
            c = (2 * Q.a * z.real + Q.b) / mpmath.sqrt(Q.disc)
            return float(mpmath.atanh(-c))
        return float(mpmath.log(z.imag))


def _legendre_nodes(order: int = 10):
    return np.polynomial.legendre.leggauss(order)


def _panel_quad(f, lo: float, hi: float, order: int = 10) -> complex:
    xs, ws = _legendre_nodes(order)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    return half * sum(w * f(mid + half * x) for x, w in zip(xs, ws))


def _panel_quad_adaptive(f, lo: float, hi: float, tol: float, depth: int = 0) -> complex:
    """Gauss-Legendre panel with automatic bisection.

    Compares 10- and 20-node estimates; panels that disagree are split, which
    handles the sharp oscillatory peaks the series develops for larger v.
    """
    coarse = _panel_quad(f, lo, hi, order=10)
    fine = _panel_quad(f, lo, hi, order=20)
    if abs(fine - coarse) <= max(tol, 1e-9 * abs(fine)) or depth >= 7:
        return fine
    mid = 0.5 * (lo + hi)
    return _panel_quad_adaptive(f, lo, mid, tol / 2, depth + 1) + _panel_quad_adaptive(
        f, mid, hi, tol / 2, depth + 1
    )


# ----------------------------------------- damped cycle trace (square disc)


def _cycle_integral_damped(
    v: int,
    Q: QF,
    s: float,
    height_cap: int,
    panel_tol: float,
    sig_max: float = 18.0,
) -> complex:
    """Integral of the damped series over the full root geodesic of Q,
    against the form-valued measure (one 1/w factor)."""
    n = Q.disc
    w = math.isqrt(n)
    assert w * w == n
    path = GeodesicPath(Q, float(w))
    pair = damping_data(Q)
    spec = PoincareSpec(v=v, s=s, height_cap=height_cap, damping=pair)

    def f(sig: float) -> complex:
        return P_poincare(spec, path.point(sig))

    total = _panel_quad_adaptive(f, -1.0, 0.0, panel_tol / 4) + _panel_quad_adaptive(
        f, 0.0, 1.0, panel_tol / 4
    )
    for sgn in (1.0, -1.0):
        quiet = 0
        k = 1
        while k < sig_max:
            lo, hi = (k, k + 1.0) if sgn > 0 else (-k - 1.0, -k)
            part = _panel_quad_adaptive(f, lo, hi, panel_tol / 4)
            total += part
            quiet = quiet + 1 if abs(part) < panel_tol else 0
            if quiet >= 2:
                break
            k += 1
    return total / w


def trace_cycle_square_s2(req: TraceRequest) -> TraceResult:
    """Damped cycle-integral trace at s = 2 over a square discriminant.

    The expected closed-form value is (4/sqrt(m)) (12|t) (m|l) when
    n = m t^2 and v = t l with gcd(l, m) = 1, and 0 otherwise; see
    ``square_trace_target``.
    """
    D = req.m * req.n
    if D <= 0 or not ntcore.is_square(D):
        raise ValueError("square-discriminant trace needs mn a positive square")
    classes = residue_one_classes(D)
    cap = req.height_cap

    def run(cap_now: int) -> complex:
        tot = 0.0 + 0.0j
        for Q in classes:
            chi = genus_chi(req.m, Q)
            if chi == 0:
                continue
            tot += chi * _cycle_integral_damped(
                req.v, Q, 2.0, cap_now, req.quad_tol / (6 * max(1, len(classes)))
            )
        return tot

    cur = run(cap)
    prev = run(cap // 2)
    # the height-floor truncation is first order in 1/cap^2: extrapolate
    val = (4 * cur - prev) / 3
    err = 0.7 * abs(cur - prev) + 1e-10
    re, im = val.real, val.imag
    assert abs(im) < 1e-8 * max(1.0, abs(re)) + err, "trace has an imaginary residue"
    return TraceResult(
        value=re,
        err=err,
        request=req,
        truncation={"height_cap": cap, "classes": len(classes)},
    )


def square_trace_target(v: int, m: int, n: int) -> float:
    """Closed-form value of the damped square-discriminant trace at s = 2."""
    if m * n <= 0 or n % m:
        return 0.0
    t2 = n // m
    t = math.isqrt(t2)
    if t * t != t2 or v % t:
        return 0.0
    ell = v // t
    if gcd(ell, m) != 1:
        return 0.0
    return 4 / math.sqrt(m) * ntcore.kronecker(12, t) * ntcore.kronecker(m, ell)


# ------------------------------------- s-derivative cycle trace (nonsquare)


def _panel_quad_ordered(f, lo: float, hi: float, tol: float, depth: int = 0) -> complex:
    """Adaptive 10/20-node panel that calls ``f`` in ascending order of the
    abscissa, so stateful integrands (warm-started reduction) stay warm."""
    xs10, ws10 = _legendre_nodes(10)
    xs20, ws20 = _legendre_nodes(20)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    nodes = [(mid + half * x, wgt, 0) for x, wgt in zip(xs10, ws10)]
    nodes += [(mid + half * x, wgt, 1) for x, wgt in zip(xs20, ws20)]
    nodes.sort(key=lambda row: row[0])
    sums = [0.0 + 0.0j, 0.0 + 0.0j]
    for sig, wgt, which in nodes:
        sums[which] += wgt * f(sig)
    coarse, fine = half * sums[0], half * sums[1]
    if abs(fine - coarse) <= max(tol, 1e-9 * abs(fine)) or depth >= 7:
        return fine
    return _panel_quad_ordered(f, lo, mid, tol / 2, depth + 1) + _panel_quad_ordered(
        f, mid, hi, tol / 2, depth + 1
    )


def _cycle_integral_closed(v: int, Q: QF, s: float, height_cap: int, base_sig: float = 0.0) -> complex:
    """Integral of the plain series from z to (automorph of Q) z along the
    root geodesic, with the form-valued measure; z is the path point at
    arc-length ``base_sig``.  Independent of the basepoint.

    Path points are produced at extended precision: one period spans
    2 log(fundamental-unit) in arc length, far beyond where float64 tanh
    saturates, and the greedy reduction needs the residual distance to the
    root that float64 has already rounded away there.  The basepoint is
    specified by arc length rather than as a point because the flow through
    the automorph amplifies any off-geodesic component by e^(period).
    """
    n = Q.disc
    w = math.sqrt(n)
    path = GeodesicPath(Q, w)
    g = automorph(Q)
    spec = PoincareSpec(v=v, s=s, height_cap=height_cap)
    warm: list[Matrix] = [IDENTITY]

    # generous first guess: refined once the endpoints are known
    prec = [256]

    def f(sig: float) -> complex:
        with mpmath.workprec(prec[0]):
            tau = path.point_mp(sig)
            M, t = reduce_point(tau, warm[0])
        warm[0] = M
        return P_poincare(spec, complex(t.real, t.imag))

    with mpmath.workprec(prec[0]):
        z0 = path.point_mp(base_sig)
        z1 = mobius(g, z0)
        s0 = float(base_sig)
        s1 = path.sigma_of_mp(z1)
    lo, hi = min(s0, s1), max(s0, s1)
    sign = 1.0 if s1 >= s0 else -1.0
    prec[0] = 96 + int(3.0 * max(abs(lo), abs(hi)))
    total = 0.0 + 0.0j
    k = lo
    while k < hi:
        k2 = min(k + 1.0, hi)
        total += _panel_quad_ordered(f, k, k2, 1e-6)
        k = k2
    return sign * total / w


def trace_cycle_s(req: TraceRequest, s: float) -> complex:
    """(1/2pi) chi_m-weighted sum of closed cycle integrals at parameter s."""
    D = req.m * req.n
    if D <= 0 or ntcore.is_square(D):
        raise ValueError("cycle trace needs mn > 0 nonsquare")
    total = 0.0 + 0.0j
    for Q in residue_one_classes(D):
        chi = genus_chi(req.m, Q)
        if chi == 0:
            continue
        total += chi * _cycle_integral_closed(req.v, Q, s, req.height_cap)
    return total / (2 * math.pi)


def trace_cycle_deriv(req: TraceRequest, h: float = 1e-3) -> TraceResult:
    """d/ds of the cycle trace at s = 2 by central differences with one
    Richardson step (h and h/2)."""
    D = req.m * req.n
    if D <= 0 or ntcore.is_square(D):
        raise ValueError("derivative trace needs mn > 0 nonsquare")

    def deriv(hh: float) -> complex:
        return (trace_cycle_s(req, 2 + hh) - trace_cycle_s(req, 2 - hh)) / (2 * hh)

    d1 = deriv(h)
    d2 = deriv(h / 2)
    val = (4 * d2 - d1) / 3
    err = abs(d2 - d1) + 1e-8 / h
    re, im = val.real, val.imag
    assert abs(im) < 1e-6 * max(1.0, abs(re)) + err, "trace has an imaginary residue"
    return TraceResult(
        value=re,
        err=err,
        request=req,
        truncation={"height_cap": req.height_cap, "h": h},
    )


# ------------------------------------------------------------- dispatcher


def run_trace(req: TraceRequest) -> TraceResult:
    if req.mode == "cm":
        return trace_cm(req)
    if req.mode == "cycle_s2_square":
        return trace_cycle_square_s2(req)
    return trace_cycle_deriv(req)
