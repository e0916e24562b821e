"""Heights for points on elliptic curves over Q.

The route to every height is dynamical: the multiplication-by-2 map on
x-coordinates lifts to a homogeneous degree-4 pair F = (F1, F2) on A^2, and

    lambda_hat_v(P) = (1/2) G_v(a, b) - (1/2) log|b|_v - (1/12) log|Delta|_v

for any projective lift (a : b) of x(P), where G_v is the escape rate
lim log||F^n||_v / 4^n.  Summing over all places kills the last two terms by
the product formula, giving the canonical height as (1/2) sum_v G_v.

Archimedean escape rates use binary64 with per-step sup-norm renormalization;
finite-place rates are exact big-integer content extractions.  The q-series
local height for degenerating (Tate) curves serves as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpz

import sympy

from .errors import (
    DegenerateInputError,
    InsufficientDepthError,
    PrecisionError,
    UndefinedAtOriginError,
)
from .kernel import PlaceQ, Poly, vp
from .weierstrass import WeierstrassCurve

DEFAULT_DEPTH = 7
DEFAULT_FINITE_N = 8
DEFAULT_ARCH_TOL = 1e-12


# ---------------------------------------------------------------------------
# The standard lift
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lift:
    """F(z,w) = (w^4 phi(z/w), w^4 psi(z/w)) as coefficient tuples.

    f1[k] multiplies z^(4-k) w^k in F1, same for f2; entries are integers for
    integral models, floats/complex for specialized fibers.
    """

    f1: tuple
    f2: tuple

    def apply(self, a, b):
        a2 = a * a
        b2 = b * b
        a3 = a2 * a
        b3 = b2 * b
        f1 = self.f1
        f2 = self.f2
        v1 = f1[0] * (a2 * a2) + f1[2] * a2 * b2 + f1[3] * a * b3 + f1[4] * (b2 * b2)
        v2 = f2[1] * a3 * b + f2[2] * a2 * b2 + f2[3] * a * b3 + f2[4] * (b2 * b2)
        return v1, v2


def standard_lift(E):
    """Lift of the duplication map of a curve with integral b-invariants.

    The caller is responsible for clearing denominators (integral_model).
    """
    b = E.b_invariants()
    f1 = (1, 0, -b.b4, -2 * b.b6, -b.b8)
    f2 = (0, 4, b.b2, 2 * b.b4, b.b6)
    return Lift(f1=tuple(f1), f2=tuple(f2))


def integral_model(E):
    """(curve with integer a_i, scaling u): a_i -> u^i a_i, (x,y) -> (u^2 x, u^3 y)."""
    u = 1
    for a in E.coefficients:
        u = u * a.denominator // math.gcd(u, a.denominator)
    return E.scaled(Fraction(u)), Fraction(u)


def lift_of_x(x):
    """Coprime integer projective lift (a, b) of a rational x-coordinate."""
    x = Fraction(x)
    return mpz(x.numerator), mpz(x.denominator)


def _mpz_lift(lift):
    return Lift(
        f1=tuple(mpz(int(c)) for c in lift.f1),
        f2=tuple(mpz(int(c)) for c in lift.f2),
    )


def _float_lift(lift):
    return Lift(
        f1=tuple(complex(c) for c in lift.f1),
        f2=tuple(complex(c) for c in lift.f2),
    )


# ---------------------------------------------------------------------------
# Escape rates
# ---------------------------------------------------------------------------


def escape_rate_arch(lift, X, tol=DEFAULT_ARCH_TOL, max_iter=60):
    """Archimedean escape rate G(X) = lim log||F^n(X)|| / 4^n.

    Per-step renormalization: X_k = F(X_{k-1}) / m_k with m_k the sup norm,
    so G = log||X|| + sum 4^{-k} log m_k; the geometric tail bound
    (max |log m|) 4^{-N} / 3 < tol picks the stopping point.
    """
    a, b = complex(X[0]), complex(X[1])
    norm = max(abs(a), abs(b))
    if norm == 0:
        raise DegenerateInputError("escape rate at (0, 0)")
    F = _float_lift(lift)
    total = math.log(norm)
    a, b = a / norm, b / norm
    logmax = 1.0
    scale = 1.0
    for k in range(1, max_iter + 1):
        a, b = F.apply(a, b)
        m = max(abs(a), abs(b))
        if m == 0 or not math.isfinite(m):
            raise PrecisionError("renormalized iterate degenerated")
        a, b = a / m, b / m
        scale *= 0.25
        lm = math.log(m)
        total += scale * lm
        logmax = max(logmax, abs(lm))
        if logmax * scale / 3.0 < tol:
            break
    return total


@dataclass(frozen=True)
class FiniteRateResult:
    """Escape rate at a finite place, as the rational multiplier of log p."""

    p: int
    rate: Fraction          # G_p = rate * log p
    snapped: bool
    method: str             # "zero" | "periodic" | "denominator-snap" | "raw"
    partial: Fraction       # the unsnapped partial sum multiplier
    gap: Fraction           # Cauchy gap bound at the truncation depth
    vps: tuple              # vp of the content extracted at each step

    @property
    def value(self):
        return float(self.rate) * math.log(self.p)


def escape_rate_finite(lift, X, p, N=DEFAULT_FINITE_N, snap_den_bound=None):
    """Exact-content escape rate at p: G_p = -sum vp(c_k) 4^{-k} log p.

    c_k is the integer content of the k-th iterate (extracted each step, so
    pairs stay coprime).  The sequence vp(c_k) is eventually periodic; a
    detected period gives the exact rational limit, otherwise the partial sum
    is snapped to a nearby small-denominator rational when one lies within
    the Cauchy gap.
    """
    a, b = mpz(int(X[0])), mpz(int(X[1]))
    if gmpy2.gcd(a, b) != 1:
        raise DegenerateInputError("lift must be a coprime integer pair")
    F = _mpz_lift(lift)
    vps = []
    for _ in range(N):
        a, b = F.apply(a, b)
        if a == 0 and b == 0:
            raise DegenerateInputError("lift has a common root; degenerate map")
        c = gmpy2.gcd(a, b)
        a, b = a // c, b // c
        vps.append(_mpz_vp(c, p))
    partial = -sum(Fraction(v, 4 ** (k + 1)) for k, v in enumerate(vps))
    vmax = max(vps) if vps else 0
    gap = Fraction(2 * max(1, vmax), 3 * 4 ** N)
    if vmax == 0:
        return FiniteRateResult(p, Fraction(0), True, "zero", partial, gap, tuple(vps))
    # period detection on the tail of the vp sequence
    for per in range(1, 5):
        if N < 3 * per + 1:
            break
        if all(vps[k] == vps[k + per] for k in range(N - 3 * per, N - per)):
            m = N - 3 * per
            head = -sum(Fraction(v, 4 ** (k + 1)) for k, v in enumerate(vps[:m]))
            pat = vps[m : m + per]
            block = sum(Fraction(v, 4 ** (i + 1)) for i, v in enumerate(pat))
            tail = -block * Fraction(1, 4 ** m) / (1 - Fraction(1, 4 ** per))
            return FiniteRateResult(
                p, head + tail, True, "periodic", partial, gap, tuple(vps)
            )
    if snap_den_bound is None:
        snap_den_bound = 48
    cand = partial.limit_denominator(snap_den_bound)
    if abs(cand - partial) <= gap:
        return FiniteRateResult(p, cand, True, "denominator-snap", partial, gap, tuple(vps))
    return FiniteRateResult(p, partial, False, "raw", partial, gap, tuple(vps))


def _mpz_vp(c, p):
    c = abs(c)
    v = 0
    while c % p == 0:
        c //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# Local heights
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalHeightValue:
    place: PlaceQ
    value: float
    rational: Fraction | None = None   # finite places: value = rational * log p
    snapped: bool | None = None


def local_height(E, x, v, tol=DEFAULT_ARCH_TOL, N=DEFAULT_FINITE_N):
    """Neron local height of an affine point with x-coordinate x at the place v.

    Only the x-coordinate is needed: the height is computed from the
    projective lift (numerator : denominator) of x in lowest terms on the
    denominator-cleared model, and the discriminant normalization makes the
    result independent of the model choice.
    """
    if x is None:
        raise UndefinedAtOriginError("local height is undefined at the origin")
    Ei, u = integral_model(E)
    if not Ei.is_smooth:
        raise DegenerateInputError("curve is singular")
    lift = standard_lift(Ei)
    xi = Fraction(x) * u * u
    a, b = lift_of_x(xi)
    delta = Ei.discriminant()
    if v.is_archimedean:
        G = escape_rate_arch(lift, (a, b), tol)
        val = 0.5 * G - 0.5 * math.log(abs(b)) - math.log(abs(int(delta))) / 12.0
        return LocalHeightValue(v, val)
    p = v.p
    res = escape_rate_finite(lift, (a, b), p, N=N, snap_den_bound=_snap_bound(delta, p))
    # log|b|_p = -vp(b) log p ; log|Delta|_p = -vp(Delta) log p
    mult = (
        Fraction(1, 2) * res.rate
        + Fraction(_mpz_vp(mpz(int(b)), p), 2)
        + Fraction(vp(delta, p), 12)
    )
    return LocalHeightValue(v, float(mult) * math.log(p), rational=mult, snapped=res.snapped)


def _snap_bound(delta, p):
    return 48 * (abs(vp(Fraction(delta), p)) + 1)


def bad_primes(E):
    """Primes where the standard-lift contents can be divisible: a finite
    superset of the places with nonzero escape rate for coprime lifts.

    Contents of coprime iterates divide the resultant of (F1, F2), which is
    supported on 2 and the discriminant of the integral model.
    """
    Ei, _ = integral_model(E)
    delta = int(Ei.discriminant())
    if delta == 0:
        raise DegenerateInputError("curve is singular")
    n = 2 * abs(delta)
    return sorted(sympy.factorint(n).keys())


# ---------------------------------------------------------------------------
# Canonical height
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CanonicalHeightResult:
    value: float                 # the place-sum estimate (primary)
    limit_estimate: float        # (1/2) h(F^depth X) / 4^depth
    place_sum_estimate: float
    gap: float
    exact_zero: bool
    depth: int
    finite_parts: tuple          # (p, Fraction multiplier) pairs


def canonical_height(E, x, depth=DEFAULT_DEPTH, tol=DEFAULT_ARCH_TOL):
    """Canonical height of a point with x-coordinate x, two ways.

    (i) the limit definition (1/2) log max(|A_n|, |B_n|) / 4^n on reduced
    integer pairs, and (ii) the place sum (1/2)[G_arch + sum_p G_p] over the
    bad primes.  Torsion is detected symbolically when an iterate lands on
    the point at infinity, which sets the exact-zero flag.
    """
    if depth < 2:
        raise InsufficientDepthError("canonical height needs depth >= 2")
    Ei, u = integral_model(E)
    if not Ei.is_smooth:
        raise DegenerateInputError("curve is singular")
    lift = standard_lift(Ei)
    F = _mpz_lift(lift)
    a, b = lift_of_x(Fraction(x) * u * u)
    exact_zero = b == 0
    k = 0
    while not exact_zero and k < depth:
        a, b = F.apply(a, b)
        c = gmpy2.gcd(a, b)
        a, b = a // c, b // c
        k += 1
        if b == 0:
            exact_zero = True
    if exact_zero:
        return CanonicalHeightResult(0.0, 0.0, 0.0, 0.0, True, depth, ())
    limit_est = 0.5 * _log_mpz(max(abs(a), abs(b))) / 4 ** depth
    a0, b0 = lift_of_x(Fraction(x) * u * u)
    G = escape_rate_arch(lift, (a0, b0), tol)
    finite = []
    total = G
    for p in bad_primes(E):
        res = escape_rate_finite(
            lift, (a0, b0), p, N=max(DEFAULT_FINITE_N, depth),
            snap_den_bound=_snap_bound(Ei.discriminant(), p),
        )
        finite.append((p, res.rate))
        total += float(res.rate) * math.log(p)
    place_sum = 0.5 * total
    return CanonicalHeightResult(
        value=place_sum,
        limit_estimate=limit_est,
        place_sum_estimate=place_sum,
        gap=abs(place_sum - limit_est),
        exact_zero=False,
        depth=depth,
        finite_parts=tuple(finite),
    )


def _log_mpz(m):
    """log of a positive mpz too large for float conversion."""
    m = mpz(m)
    bits = m.bit_length()
    if bits <= 900:
        return math.log(float(m))
    shift = bits - 64
    return math.log(float(m >> shift)) + shift * math.log(2.0)


# ---------------------------------------------------------------------------
# Tate q-series oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TateParameters:
    """A degenerating-curve parameter pair: |q| < 1, w not a power of q.

    Normalization puts w in the fundamental annulus |q| < |w| <= 1.
    """

    q: complex
    w: complex

    def __post_init__(self):
        q, w = complex(self.q), complex(self.w)
        if not abs(q) < 1:
            raise DegenerateInputError("need |q| < 1")
        if w == 0:
            raise DegenerateInputError("w must be nonzero")
        while abs(w) > 1:
            w = w * q
        while abs(w) <= abs(q):
            w = w / q
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "w", w)


def bernoulli2(s):
    """Second Bernoulli polynomial s^2 - s + 1/6."""
    return s * s - s + Fraction(1, 6) if isinstance(s, Fraction) else s * s - s + 1.0 / 6.0


def tate_series_local_height(tp, terms=60):
    """Local height on a degenerating curve from its q-series.

    value = -1/2 B2(log|w|/log|q|) log|q| - log|1-w|
            - sum_{n=1..terms} log|(1-q^n w)(1-q^n / w)|,
    returned with the geometric tail bound 2 |q|^(terms+1)/(1-|q|).
    """
    q, w = tp.q, tp.w
    lq = math.log(abs(q))
    s = math.log(abs(w)) / lq
    val = -0.5 * bernoulli2(s) * lq - math.log(abs(1 - w))
    qn = 1.0 + 0.0j
    winv = 1.0 / w
    for _ in range(terms):
        qn = qn * q
        val -= math.log(abs((1 - qn * w) * (1 - qn * winv)))
    tail = 2.0 * abs(q) ** (terms + 1) / (1.0 - abs(q))
    return val, tail


def _q_power_sum(q, weight, terms):
    """sum n^weight q^n / (1 - q^n)."""
    total = 0j
    qn = 1 + 0j
    for n in range(1, terms + 1):
        qn *= q
        total += n ** weight * qn / (1 - qn)
    return total


def tate_g2_g3(q, terms=60):
    """Eisenstein-normalized g2, g3 of the parameter q."""
    g2 = (1 + 240 * _q_power_sum(q, 3, terms)) / 12
    g3 = (-1 + 504 * _q_power_sum(q, 5, terms)) / 216
    return g2, g3


def tate_curve(q, terms=60):
    """The curve y^2 = x^3 - (g2/4) x - (g3/4) with discriminant g2^3 - 27 g3^2.

    The discriminant is returned in its product form q prod (1-q^n)^24, which
    equals g2^3 - 27 g3^2 but avoids the catastrophic cancellation of the
    direct difference for |q| near 1/2.
    """
    g2, g3 = tate_g2_g3(q, terms)
    E = WeierstrassCurve(0.0, 0.0, 0.0, complex(-g2 / 4), complex(-g3 / 4))
    delta = complex(q)
    qn = 1 + 0j
    for _ in range(terms):
        qn *= q
        delta *= (1 - qn) ** 24
    return E, delta


def tate_point_x(tp, terms=60):
    """x-coordinate of the point parametrized by w on the curve of tate_curve."""
    q, w = tp.q, tp.w
    x = 1.0 / 12 + w / (1 - w) ** 2
    qn = 1 + 0j
    for _ in range(1, terms + 1):
        qn *= q
        x += qn * w / (1 - qn * w) ** 2
        x += (qn / w) / (1 - qn / w) ** 2
        x -= 2 * qn / (1 - qn) ** 2
    return x


def local_height_arch_numeric(E, x, delta=None, tol=DEFAULT_ARCH_TOL):
    """Archimedean local height for a float/complex-coefficient curve.

    Same assembly as local_height, with the lift (x : 1); `delta` overrides
    the discriminant (useful when a series value is more accurate).
    """
    lift = standard_lift(E)
    G = escape_rate_arch(lift, (complex(x), 1.0 + 0j), tol)
    if delta is None:
        delta = E.discriminant()
    return 0.5 * G - math.log(abs(delta)) / 12.0
