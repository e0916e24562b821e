"""Torsion parameters: base points t where the section specializes to a
2-power-order torsion point.

P_t has order dividing 2^n exactly when x([2^n] P_t) = infinity, i.e. when
the denominator B_n(t) of the n-th x-map iterate vanishes (away from
singular fibers).  Levels nest: B_{n-1} divides B_n, and dividing it out
leaves the exact-order-2^n polynomial.

Two operating modes:

* exact: the iterate pair is computed as integer polynomials (Kronecker
  multiplication keeps level 6 and 7 in desk range), singular factors are
  struck, and the exact-order polynomial is produced by exact division.
* captured: beyond the float-embedding range of the coefficients, roots are
  located by Newton iteration on the renormalized projective orbit (the
  Newton ratio is invariant under the per-step rescaling because the lift is
  homogeneous), with expected counts certified modulo a large prime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np

from .errors import DegenerateInputError, ResourceLimitError, RootFindingError
from .heights_ff import cleared_section
from .kernel import Poly, complex_roots
from .zpoly import (
    DEFAULT_CERT_PRIME,
    ZPoly,
    modp_divmod,
    modp_gcd,
    modp_trim,
)

ITERATE_CAP = 10
EXACT_POLY_CAP = 6
# Monomial-basis root finding is only trusted while the integer coefficients
# embed exactly in binary64 (53-bit mantissa, ~36 nats): beyond that the
# rounding of the coefficients alone moves ill-conditioned roots by O(1), as
# a comparison against 60-digit reference roots shows already at level 4.
_EMBED_NAT_LIMIT = 36.0


# ---------------------------------------------------------------------------
# Exact iteration
# ---------------------------------------------------------------------------


def iterate_x_map(E, x_P, n, cap=ITERATE_CAP):
    """(A_n, B_n) with x([2^n] P_t) = A_n/B_n, content extracted each step."""
    if n < 0:
        raise DegenerateInputError("n must be nonnegative")
    if n > cap:
        raise ResourceLimitError(f"iterate level {n} exceeds the cap {cap}")
    cs = cleared_section(E, x_P)
    A, B = cs.A0, cs.B0
    for _ in range(n):
        A, B = _apply_exact(cs, A, B)
    return A, B


def _apply_exact(cs, A, B):
    f1, f2 = cs.lift_f1, cs.lift_f2
    a2 = A * A
    b2 = B * B
    a3 = a2 * A
    b3 = b2 * B
    V1 = f1[0] * (a2 * a2) + f1[2] * (a2 * b2) + f1[3] * (A * b3) + f1[4] * (b2 * b2)
    V2 = f2[1] * (a3 * B) + f2[2] * (a2 * b2) + f2[3] * (A * b3) + f2[4] * (b2 * b2)
    c = gmpy2.gcd(V1.content(), V2.content())
    if c not in (0, 1):
        V1, V2 = V1.divexact_const(c), V2.divexact_const(c)
    return V1, V2


def _singular_strike_list(cs):
    """Irreducible integer factors of the discriminant, for striking."""
    import sympy

    x = sympy.Symbol("x")
    expr = sympy.Poly([int(c) for c in reversed(cs.delta.coeffs)], x)
    out = []
    for fac, _m in expr.factor_list()[1]:
        coeffs = [int(c) for c in reversed(fac.all_coeffs())]
        z = ZPoly(coeffs)
        if z.degree >= 1:
            out.append(z)
    return out


def _strike(z, factors):
    z = z.primitive()
    for s in factors:
        while True:
            try:
                z = z.divexact(s)
            except (DegenerateInputError, ZeroDivisionError):
                break
    return z


def torsion_polynomial(E, x_P, n, cap=ITERATE_CAP):
    """Primitive part of B_n with singular-parameter factors removed.

    The removed factors also carry gcd(A_n, B_n), which is supported on the
    singular parameters.
    """
    if n < 1:
        raise DegenerateInputError("torsion level must be >= 1")
    cs = cleared_section(E, x_P)
    strikes = _singular_strike_list(cs)
    A, B = cs.A0, cs.B0
    if n > cap:
        raise ResourceLimitError(f"torsion level {n} exceeds the cap {cap}")
    for _ in range(n):
        A, B = _apply_exact(cs, A, B)
    return _strike(B, strikes)


def exact_order_polynomial(E, x_P, n, cap=ITERATE_CAP):
    """Level-n torsion polynomial with the level-(n-1) polynomial divided out."""
    if n == 1:
        return torsion_polynomial(E, x_P, 1, cap)
    cs = cleared_section(E, x_P)
    strikes = _singular_strike_list(cs)
    A, B = cs.A0, cs.B0
    if n > cap:
        raise ResourceLimitError(f"torsion level {n} exceeds the cap {cap}")
    prev = None
    cur = None
    for _ in range(n):
        A, B = _apply_exact(cs, A, B)
        prev, cur = cur, _strike(B, strikes)
    out = cur
    if prev is not None and prev.degree >= 1:
        try:
            out = out.divexact(prev)
        except (DegenerateInputError, ZeroDivisionError):
            pass
    return out


# ---------------------------------------------------------------------------
# mod-p certificates
# ---------------------------------------------------------------------------


def _modp_torsion_poly(cs, n, p):
    """Struck B_n mod p (degrees and gcd structure only)."""
    from .heights_ff import _modp_apply

    f1 = [c.mod_small_prime(p) for c in cs.lift_f1]
    f2 = [c.mod_small_prime(p) for c in cs.lift_f2]
    strikes = [modp_trim(s.mod_small_prime(p), p) for s in _singular_strike_list(cs)]
    A = modp_trim(cs.A0.mod_small_prime(p), p)
    B = modp_trim(cs.B0.mod_small_prime(p), p)
    out = []
    for _ in range(n):
        A, B = _modp_apply(f1, f2, A, B, p)
        Bs = B.copy()
        for s in strikes:
            while len(Bs) > 1:
                q, r = modp_divmod(Bs, s, p)
                if len(r) == 0:
                    Bs = q
                else:
                    break
        out.append(Bs)
    return out


def _modp_exact_order(cs, n, p):
    """(degree, squarefree degree) of the exact-order poly at level n, mod p."""
    polys = _modp_torsion_poly(cs, n, p)
    cur = polys[n - 1]
    if n >= 2:
        prev = polys[n - 2]
        while len(cur) > 1 and len(prev) > 1:
            q, r = modp_divmod(cur, prev, p)
            if len(r) == 0:
                cur = q
            else:
                break
    deg = len(cur) - 1
    if deg <= 0:
        return 0, 0
    darr = modp_trim((cur[1:] * np.arange(1, len(cur), dtype=np.int64)) % p, p)
    if len(darr) == 0:
        return deg, 0
    g = modp_gcd(cur, darr, p)
    return deg, deg - (len(g) - 1)


# ---------------------------------------------------------------------------
# Root extraction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TorsionSet:
    """Torsion parameters at level n (order dividing 2^n).

    roots/multiplicities: the full level-n root multiset (inherited levels
    included); exact_order_roots/exact_order_multiplicities: the new level-n
    parameters only.  poly is the exact-order polynomial in exact mode, None
    in captured mode; degree is its exact degree either way.  rational
    members of exact_order_roots are certified by exact evaluation and listed
    in rational_roots.
    """

    n: int
    poly: Poly | None
    degree: int
    roots: tuple
    multiplicities: tuple
    exact_order_roots: tuple
    exact_order_multiplicities: tuple
    rational_roots: tuple
    mode: str                 # "exact" | "captured"
    complete: bool

    @property
    def count_with_multiplicity(self):
        return sum(self.exact_order_multiplicities)

    @property
    def count_distinct(self):
        return len(self.exact_order_roots)


def _coeff_range_nats(z):
    bits = [c.numerator.bit_length() if isinstance(c, Fraction) else int(c).bit_length()
            for c in z.coeffs if c != 0]
    return (max(bits) - min(bits)) * math.log(2.0)


def torsion_parameters_all(E, x_P, n, tol=1e-10, cap=ITERATE_CAP):
    """TorsionSets for every level 1..n in one pass (levels nest, so the
    lower sets come for free while building the level-n set)."""
    if n < 1:
        raise DegenerateInputError("torsion level must be >= 1")
    if n > cap:
        raise ResourceLimitError(f"torsion level {n} exceeds the cap {cap}")
    cs = cleared_section(E, x_P)
    sets = []
    prev_roots, prev_mults = [], []
    for level in range(1, n + 1):
        ts = _torsion_level(E, x_P, cs, level, tol, prev_roots, prev_mults)
        sets.append(ts)
        prev_roots = list(ts.roots)
        prev_mults = list(ts.multiplicities)
    return sets


def torsion_parameters(E, x_P, n, tol=1e-10, cap=ITERATE_CAP):
    """TorsionSet for level n (lower levels are computed on the way and
    embedded in the inherited root list)."""
    return torsion_parameters_all(E, x_P, n, tol=tol, cap=cap)[-1]


def rational_torsion_parameters(E, x_P, nmax, cap=ITERATE_CAP):
    """Certified rational torsion parameters per level, without complex root
    extraction.

    Rational parameters are real, so discovery runs orbit Newton from real
    seeds only (dense near the bulk plus geometric far seeds); every
    candidate that rounds to a small rational is certified by the exact
    Fraction orbit, making the output sound at any level.  Returns
    {level: tuple of Fractions}.
    """
    if nmax < 1:
        raise DegenerateInputError("torsion level must be >= 1")
    if nmax > cap:
        raise ResourceLimitError(f"torsion level {nmax} exceeds the cap {cap}")
    cs = cleared_section(E, x_P)
    dense = np.linspace(-40.0, 40.0, 4001)
    far = np.concatenate([np.geomspace(40.0, 1e12, 200),
                          -np.geomspace(40.0, 1e12, 200)])
    seeds = np.concatenate([dense, far]).astype(complex)
    out = {}
    found = []
    for level in range(1, nmax + 1):
        pts = _newton_active(cs, level, seeds, 1e-10, None, 1.0,
                             accept=1e-10, max_iter=60, dtype=np.clongdouble)
        rats = set(_certify_rationals_orbit(cs, level, [complex(p) for p in pts]))
        # drop rationals certified at a lower level (they recur as roots of
        # every deeper B_n)
        for lower in out.values():
            rats -= set(lower)
        out[level] = tuple(sorted(rats))
        found.extend(out[level])
    return out


def _torsion_level(E, x_P, cs, level, tol, prev_roots, prev_mults,
                   exact_cap=None):
    exact_ok = level <= (EXACT_POLY_CAP if exact_cap is None else exact_cap)
    poly = None
    if exact_ok:
        try:
            zp = exact_order_polynomial(E, x_P, level)
        except ResourceLimitError:
            exact_ok = False
            zp = None
    if exact_ok and zp is not None and zp.degree >= 0:
        degree = zp.degree
        if degree == 0:
            return TorsionSet(level, zp.to_poly(), 0, tuple(prev_roots),
                              tuple(prev_mults), (), (), (), "exact", True)
        deg_sq = _squarefree_degree(zp)
        base_mult = 1
        work = zp
        if deg_sq and degree == 2 * deg_sq:
            sq = zp.primitive().exact_sqrt()
            if sq is not None:
                work, base_mult = sq, 2
        if _coeff_range_nats(work) < _EMBED_NAT_LIMIT and work.degree <= 400:
            rts = complex_roots(work.to_poly(), tol)
            eor, eom = _cluster(rts, tol)
            eom = [m * base_mult for m in eom]
            rational = _certify_rationals(zp, eor)
            roots = tuple(prev_roots) + tuple(eor)
            mults = tuple(prev_mults) + tuple(eom)
            return TorsionSet(level, zp.to_poly(), degree, roots, mults, tuple(eor),
                              tuple(eom), rational, "exact", True)
        # exact polynomial known but beyond the float-embedding range:
        # discover the bulk cheaply by orbit Newton, then certify and
        # complete the root set by Aberth iteration on the exact squarefree
        # coefficients (the orbit evaluator alone cannot resolve the far
        # parameters or the tightest clusters)
        if work.degree != (deg_sq or degree):
            raise RootFindingError(
                f"level {level}: non-uniform multiplicities beyond the "
                "embedding range are not supported")
        cap, _cm, _cc = _orbit_capture(cs, level, tol, prev_roots, degree,
                                       deg_sq, max_rounds=2)
        seeds = _aberth_seed_pool(cap, prev_roots, cs, work.degree)
        # no float-side dedup: the Aberth stage certifies pairwise
        # distinctness at working precision, and far near-double pairs may
        # legitimately collide in binary64
        eor, complete = _aberth_exact(work, seeds, tol)
        complete = complete and len(eor) == work.degree
        eom = (base_mult,) * len(eor)
        rational = _certify_rationals(zp, eor)
        roots = tuple(prev_roots) + tuple(eor)
        mults = tuple(prev_mults) + tuple(eom)
        return TorsionSet(level, zp.to_poly(), degree, roots, mults,
                          tuple(eor), tuple(eom), rational, "exact", complete)
    deg_data = _modp_exact_order(cs, level, DEFAULT_CERT_PRIME)
    poly_out = None
    mode = "captured"
    degree, deg_sq = deg_data
    eor, eom, complete = _orbit_capture(cs, level, tol, prev_roots, degree, deg_sq)
    rational = _certify_rationals_orbit(cs, level, eor)
    roots = tuple(prev_roots) + tuple(eor)
    mults = tuple(prev_mults) + tuple(eom)
    return TorsionSet(level, poly_out, degree, roots, mults, tuple(eor), tuple(eom),
                      rational, mode, complete)


def _squarefree_degree(zp):
    arr = modp_trim(zp.mod_small_prime(DEFAULT_CERT_PRIME), DEFAULT_CERT_PRIME)
    p = DEFAULT_CERT_PRIME
    if len(arr) <= 1:
        return 0
    darr = modp_trim((arr[1:] * np.arange(1, len(arr), dtype=np.int64)) % p, p)
    g = modp_gcd(arr, darr, p)
    return (len(arr) - 1) - (len(g) - 1)


def _cluster(rts, tol):
    """Group a sorted root list into (distinct root, multiplicity) pairs."""
    out, mults = [], []
    eps = max(1e-7, 10 * tol)
    for z in rts:
        if out and abs(z - out[-1]) < eps * (1 + abs(z)):
            mults[-1] += 1
            out[-1] = out[-1] + (z - out[-1]) / mults[-1]
        else:
            out.append(z)
            mults.append(1)
    return out, mults


def _certify_rationals(zp, roots):
    """Rational members of a float root list, certified by exact evaluation."""
    out = []
    seen = set()
    for z in roots:
        if abs(z.imag) > 1e-7:
            continue
        cand = Fraction(z.real).limit_denominator(10 ** 4)
        if cand in seen:
            continue
        seen.add(cand)
        if _zpoly_eval_rational(zp, cand) == 0:
            out.append(cand)
    return tuple(sorted(out))


def _zpoly_eval_rational(zp, q):
    """Exact sum c_i a^i b^(d-i) for q = a/b: zero iff q is a root."""
    a, b = gmpy2.mpz(q.numerator), gmpy2.mpz(q.denominator)
    d = zp.degree
    total = gmpy2.mpz(0)
    bp = gmpy2.mpz(1)
    apows = [gmpy2.mpz(1)]
    for _ in range(d):
        apows.append(apows[-1] * a)
    for i in range(d, -1, -1):
        total += zp.coeffs[i] * apows[i] * bp
        bp *= b
    return total


def exact_order_at(cs, t, nmax):
    """Exact 2-power torsion order exponent of the fiber point at rational t.

    Runs the x-map iteration in exact rational arithmetic: the first level n
    at which the iterate denominator vanishes (with nonzero numerator) means
    the point has exact order 2^n.  Returns 0 for a point of order 1 or 2^0
    never happens; returns None if no level <= nmax works or the fiber is
    singular there.
    """
    t = Fraction(t)
    if _zpoly_eval_rational(cs.delta, t) == 0:
        return None
    f1 = [Fraction(_zpoly_eval_rational(c, t)) for c in cs.lift_f1]
    f2 = [Fraction(_zpoly_eval_rational(c, t)) for c in cs.lift_f2]
    a = Fraction(_zpoly_eval_rational(cs.A0, t))
    b = Fraction(_zpoly_eval_rational(cs.B0, t))
    if b == 0:
        return 0
    for n in range(1, nmax + 1):
        a2, b2 = a * a, b * b
        a3, b3 = a2 * a, b2 * b
        v1 = f1[0] * a2 * a2 + f1[2] * a2 * b2 + f1[3] * a * b3 + f1[4] * b2 * b2
        v2 = f2[1] * a3 * b + f2[2] * a2 * b2 + f2[3] * a * b3 + f2[4] * b2 * b2
        if v1 == 0 and v2 == 0:
            return None
        m = max(abs(v1), abs(v2))
        a, b = v1 / m, v2 / m
        if b == 0:
            return n
    return None


def _certify_rationals_orbit(cs, level, roots):
    """Rational members of a float root list, certified by the exact orbit."""
    out = []
    seen = set()
    for z in roots:
        if abs(z.imag) > 1e-7:
            continue
        cand = Fraction(z.real).limit_denominator(10 ** 4)
        if cand in seen or abs(float(cand) - z.real) > 1e-6 * (1 + abs(z)):
            continue
        seen.add(cand)
        if exact_order_at(cs, cand, level) == level:
            out.append(cand)
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# Orbit Newton capture
# ---------------------------------------------------------------------------


def _aberth_exact(zp, seeds, tol, max_iter=400):
    """All roots of a squarefree integer polynomial, exact-coefficient Aberth.

    Every p/p' evaluation uses the exact coefficients at a precision that
    covers their bit length, so the ill-conditioning of the monomial basis is
    absorbed entirely: binary64 (and even 64-bit-mantissa) embeddings of
    these coefficients move clustered roots by more than their separation.
    Points with |z| > 1 are evaluated through the reciprocal polynomial at
    w = 1/z (p'/p = d/z - w^2 q'/q), keeping the working precision
    independent of the root magnitude.  Converged points freeze (they still
    repel the active ones), so a good warm start leaves only the stragglers
    iterating.  Returns (sorted tuple, all_converged).
    """
    d = zp.degree
    bits = max(int(c).bit_length() for c in zp.coeffs if c != 0)
    ctx = gmpy2.context(precision=bits + 320)
    with gmpy2.local_context(ctx):
        cf = [gmpy2.mpc(int(c)) for c in zp.coeffs]
        dcf = [k * cf[k] for k in range(1, d + 1)]
        rcf = cf[::-1]
        drcf = [k * rcf[k] for k in range(1, d + 1)]
        rng = np.random.default_rng(271 + d)
        z = [gmpy2.mpc(complex(s)) for s in seeds[:d]]
        while len(z) < d:
            w = rng.uniform(-3, 3) + 1j * rng.uniform(-3, 3)
            z.append(gmpy2.mpc(w))
        frozen = [False] * d
        # far below any downstream tolerance yet far above the evaluation
        # noise floor at this precision, so freezing always triggers
        eps_freeze = gmpy2.mpfr("1e-25")

        def newton_ratio(w):
            if abs(w) <= 1:
                pv = _mpc_horner(cf, w)
                dv = _mpc_horner(dcf, w)
                if dv == 0:
                    return None
                return pv / dv
            u = 1 / w
            qv = _mpc_horner(rcf, u)
            dqv = _mpc_horner(drcf, u)
            if qv == 0:
                return gmpy2.mpc(0)
            denom = d / w - u * u * dqv / qv
            if denom == 0:
                return None
            return 1 / denom

        for _ in range(max_iter):
            moved = False
            for i in range(d):
                if frozen[i]:
                    continue
                r = newton_ratio(z[i])
                if r is None:
                    z[i] = z[i] + gmpy2.mpc(0.05 * (1 + abs(z[i])))
                    moved = True
                    continue
                s = gmpy2.mpc(0)
                for j in range(d):
                    if j != i:
                        diff = z[i] - z[j]
                        if diff == 0:
                            diff = gmpy2.mpc(1e-30)
                        s += 1 / diff
                den = 1 - r * s
                w = r if den == 0 else r / den
                mag = abs(w)
                lim = 0.3 * (1 + abs(z[i]))
                if mag > lim:
                    w = w * (lim / mag)
                z[i] = z[i] - w
                if mag < eps_freeze * (1 + abs(z[i])):
                    # do not freeze two points onto the same root: the
                    # repulsion term must keep acting on the duplicate
                    clash = any(frozen[j] and abs(z[i] - z[j]) < 1e-12 * (1 + abs(z[i]))
                                for j in range(d))
                    if clash:
                        z[i] = z[i] + gmpy2.mpc(1e-6 * (1 + abs(z[i])))
                    else:
                        frozen[i] = True
                else:
                    moved = True
            if not moved:
                break
        converged = all(frozen)
        if converged:
            # pairwise distinctness at working precision: the d points must
            # sit on d different roots (binary64 output may still collide
            # for far near-double pairs, which is a representation issue,
            # not a multiset error)
            zs = sorted(z, key=lambda w: (w.real, w.imag))
            for i in range(1, len(zs)):
                if abs(zs[i] - zs[i - 1]) < 1e-20 * (1 + abs(zs[i])):
                    converged = False
                    break
        out = [complex(v) for v in z]
    out.sort(key=lambda z_: (round(z_.real, 11), round(z_.imag, 11)))
    return tuple(out), converged


def _mpc_horner(cs, w):
    acc = cs[-1]
    for c in cs[-2::-1]:
        acc = acc * w + c
    return acc


def _horner_dtype(zp, t, dtype, derivative=False):
    cfs = [dtype(float(c)) for c in zp.coeffs]
    if derivative:
        cfs = [k * cfs[k] for k in range(1, len(cfs))]
    if not cfs:
        return np.zeros_like(t)
    acc = np.full_like(t, cfs[-1])
    for c in cfs[-2::-1]:
        acc = acc * t + c
    return acc


def _orbit_target(cs, ts, level, dtype=complex):
    """Renormalized value and t-derivative of B_level at the parameters ts.

    The per-step sup-norm rescaling multiplies (a, b, da, db) by a common
    constant; the Newton ratio value/derivative is unchanged because the lift
    is homogeneous of degree 4.  dtype np.clongdouble extends the exponent
    range, which matters at deep levels where renormalized values underflow
    binary64.
    """
    t = np.asarray(ts, dtype=dtype)
    f1v = [_horner_dtype(c, t, dtype) for c in cs.lift_f1]
    f2v = [_horner_dtype(c, t, dtype) for c in cs.lift_f2]
    f1d = [_horner_dtype(c, t, dtype, derivative=True) for c in cs.lift_f1]
    f2d = [_horner_dtype(c, t, dtype, derivative=True) for c in cs.lift_f2]
    a = _horner_dtype(cs.A0, t, dtype)
    b = _horner_dtype(cs.B0, t, dtype)
    da = _horner_dtype(cs.A0, t, dtype, derivative=True)
    db = _horner_dtype(cs.B0, t, dtype, derivative=True)
    for _ in range(level):
        a2, b2 = a * a, b * b
        a3, b3 = a2 * a, b2 * b
        v1 = f1v[0] * a2 * a2 + f1v[2] * a2 * b2 + f1v[3] * a * b3 + f1v[4] * b2 * b2
        v2 = f2v[1] * a3 * b + f2v[2] * a2 * b2 + f2v[3] * a * b3 + f2v[4] * b2 * b2
        dv1 = (
            f1d[0] * a2 * a2 + f1d[2] * a2 * b2 + f1d[3] * a * b3 + f1d[4] * b2 * b2
            + (4 * f1v[0] * a3 + 2 * f1v[2] * a * b2 + f1v[3] * b3) * da
            + (2 * f1v[2] * a2 * b + 3 * f1v[3] * a * b2 + 4 * f1v[4] * b3) * db
        )
        dv2 = (
            f2d[1] * a3 * b + f2d[2] * a2 * b2 + f2d[3] * a * b3 + f2d[4] * b2 * b2
            + (3 * f2v[1] * a2 * b + 2 * f2v[2] * a * b2 + f2v[3] * b3) * da
            + (f2v[1] * a3 + 2 * f2v[2] * a2 * b + 3 * f2v[3] * a * b2 + 4 * f2v[4] * b3) * db
        )
        m = np.maximum(np.abs(v1), np.abs(v2))
        m = np.where(m > 0, m, dtype(1.0))
        a, b, da, db = v1 / m, v2 / m, dv1 / m, dv2 / m
    return b, db


def _aberth_seed_pool(cap_roots, prev_roots, cs, d):
    """Seed list for the exact Aberth stage: captured roots first (most are
    already converged), then rings around all known structure and the large
    circles for the far parameters."""
    cap = np.asarray(cap_roots, dtype=complex) if len(cap_roots) else np.zeros(0, complex)
    prev = np.asarray(prev_roots, dtype=complex) if len(prev_roots) else np.zeros(0, complex)
    sing = np.asarray(_strike_root_values(cs), dtype=complex)
    rng = np.random.default_rng(613 + d)
    centers = np.concatenate([cap, prev, sing])
    rings = _ring_seeds(centers, radii=(3e-3, 0.03, 0.15), nang=6)
    circles = _circle_seeds(rng, radii=np.geomspace(3.0, 1e12, 24), nang=12)
    rings = rings[rng.permutation(len(rings))]
    circles = circles[rng.permutation(len(circles))]
    # captured roots first (they are near-converged); reserve a share of the
    # remaining slots for the large circles so the far parameters always get
    # starting points
    missing = max(d - len(cap), 0)
    pool = np.concatenate([cap, circles[:max(missing // 3, 12)], rings])
    out = []
    for v in pool:
        v = complex(v)
        if not any(abs(v - u) < 1e-10 * (1 + abs(v)) for u in out[-40:]):
            out.append(v)
        if len(out) >= d + 64:
            break
    return out


def _orbit_capture(cs, level, tol, prev_roots, expected_deg, expected_sq,
                   max_rounds=8):
    """Locate the exact-order roots by Newton on the projective orbit.

    Returns (roots, multiplicities, complete).  All-new-roots multiplicity is
    expected_deg // expected_sq when that is uniform (certified mod p);
    otherwise double roots are detected by a vanishing derivative.
    """
    if expected_deg == 0:
        return (), (), True
    mult_uniform = None
    if expected_sq > 0 and expected_deg % expected_sq == 0:
        mult_uniform = expected_deg // expected_sq
    target_count = expected_sq if expected_sq else expected_deg
    sing = np.asarray(_strike_root_values(cs), dtype=complex)
    prev = np.asarray(prev_roots, dtype=complex) if prev_roots else np.zeros(0, dtype=complex)

    rng = np.random.default_rng(1729 + level)
    found = []
    newton_m = float(mult_uniform or 1)
    box = _seed_box(prev if len(prev) else np.array([0j, 1 + 1j]))
    # binary64 cannot represent the renormalized orbit at deep levels (the
    # components underflow near the measure support, which is where the roots
    # are), so discovery runs in the extended dtype throughout.  Seeds
    # combine three root-location patterns seen in exact runs: rings around
    # lower-level roots and singular parameters (new roots accumulate there),
    # a grid over the bulk, and large geometric circles for the parameters
    # accumulating at the singular fiber over t = infinity (their magnitude
    # grows by orders of magnitude per level: ~75 at level 3, ~8e4 at 4).
    centers = np.concatenate([prev, sing]) if len(prev) + len(sing) else prev
    seeds = np.concatenate([
        _ring_seeds(centers, radii=(1e-5, 1e-4, 1e-3, 1e-2, 0.05, 0.2), nang=8),
        _box_grid(box, 120),
        _circle_seeds(rng),
    ])
    for rounds in range(1, max_rounds + 1):
        pts = _newton_active(cs, level, seeds, tol, box, newton_m,
                             accept=1e-12, max_iter=80, dtype=np.clongdouble)
        pts = _dedup_rel(np.asarray(pts, dtype=complex), 1e-9)
        # drop lower-level and singular hits (these are also roots of B_n);
        # the eps is far below the root separations seen in runs
        pts = _drop_near(pts, prev, 1e-8)
        pts = _drop_near(pts, sing, 1e-8)
        found = _merge_found(found, pts, tol)
        if len(found) >= target_count:
            break
        # the root set of a real polynomial is closed under conjugation, so
        # unpaired conjugates are the cheapest candidates for the next round
        fnd = np.asarray(found, dtype=complex)
        seeds = np.concatenate([
            np.conj(fnd),
            _ring_seeds(fnd, radii=_RING_RADII[rounds % 2::2], nang=6),
            _refresh_seeds(found, prev, target_count, rng, rounds),
            _circle_seeds(rng, jitter=0.1 * rounds),
        ])
        if len(seeds) > 30000:
            seeds = rng.choice(seeds, 30000, replace=False)
    found.sort(key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    mult = mult_uniform or 1
    mults = [mult] * len(found)
    complete = len(found) == target_count
    return tuple(found), tuple(mults), complete


_RING_RADII = (1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 0.05)


def _circle_seeds(rng, radii=None, nang=24, jitter=0.0):
    """Seeds on large geometric circles, for roots far outside the bulk."""
    if radii is None:
        radii = np.geomspace(3.0, 1e16, 40)
    ang = 2 * np.pi * (np.arange(nang) + 0.25) / nang
    if jitter:
        ang = ang + jitter * rng.standard_normal(nang)
    ring = np.exp(1j * ang)
    return (np.asarray(radii)[:, None] * ring[None, :]).ravel()


def _box_grid(box, side):
    re0, re1, im0, im1 = box
    xs = np.linspace(re0, re1, side)
    ys = np.linspace(im0, im1, side)
    return (xs[None, :] + 1j * ys[:, None]).ravel()


def _ring_seeds(centers, radii=(1e-5, 1e-4, 1e-3, 1e-2, 0.05, 0.2), nang=10):
    """Multiscale rings around cluster centers (roots accumulate there)."""
    if len(centers) == 0:
        return np.zeros(0, dtype=complex)
    ang = np.exp(2j * np.pi * (np.arange(nang) + 0.3) / nang)
    offs = (np.asarray(radii)[:, None] * ang[None, :]).ravel()
    return (centers[:, None] + offs[None, :] * (1 + np.abs(centers))[:, None]).ravel()


def _strike_root_values(cs):
    vals = []
    for s in _singular_strike_list(cs):
        for z in complex_roots(s.to_poly(), 1e-12):
            vals.append(z)
    return vals


def _newton_active(cs, level, seeds, tol, box, newton_m, max_iter=500, accept=1e-9,
                   dtype=complex):
    """Newton iteration with an active set; returns accepted converged points.

    Points escaping past a generous magnitude cutoff or hitting a nonfinite
    value are dropped (the far torsion parameters are genuine, so no seed-box
    confinement); points whose Newton correction falls below the acceptance
    threshold are collected.
    """
    del box
    pts = np.asarray(seeds, dtype=dtype)
    done = []
    for _ in range(max_iter):
        if len(pts) == 0:
            break
        b, db = _orbit_target(cs, pts, level, dtype=dtype)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(np.abs(db) > 0, b / db, np.inf)
        corr = np.abs(step)
        conv = np.isfinite(pts) & (corr < 0.01 * accept * (1 + np.abs(pts)))
        if np.any(conv):
            done.append(pts[conv])
        alive = np.isfinite(pts) & np.isfinite(step) & ~conv
        alive &= np.abs(pts) < 1e18
        pts = pts[alive]
        step = newton_m * step[alive]
        lim = 0.3 * (1 + np.abs(pts))
        mag = np.abs(step)
        with np.errstate(invalid="ignore"):
            step = np.where(mag > lim, step * (lim / np.where(mag > 0, mag, 1.0)), step)
        pts = pts - step
    if not done:
        return np.zeros(0, dtype=complex)
    pts = np.concatenate(done)
    b, db = _orbit_target(cs, pts, level, dtype=dtype)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(np.abs(db) > 0, np.abs(b / db), np.inf)
    return pts[np.isfinite(pts) & (corr < accept * (1 + np.abs(pts)))]


def _seed_box(prev):
    if len(prev):
        re0, re1 = float(prev.real.min()), float(prev.real.max())
        im0, im1 = float(prev.imag.min()), float(prev.imag.max())
        pad_r = 0.5 + 0.3 * (re1 - re0)
        pad_i = 0.5 + 0.3 * (im1 - im0)
        return re0 - pad_r, re1 + pad_r, im0 - pad_i, im1 + pad_i
    return -6.0, 6.0, -6.0, 6.0


def _refresh_seeds(found, prev, target_count, rng, round_idx):
    base = np.asarray(found, dtype=complex)
    if len(base) == 0:
        base = prev if len(prev) else np.array([0.5 + 0.5j])
    missing = max(target_count - len(found), 1)
    reps = max(4, (8 * missing) // max(1, len(base)))
    rep = np.repeat(base, reps)
    scale = 0.25 / (1.6 ** round_idx)
    jit = scale * (rng.standard_normal(len(rep)) + 1j * rng.standard_normal(len(rep)))
    re0, re1, im0, im1 = _seed_box(prev if len(prev) else base)
    extra = (rng.uniform(re0, re1, 4 * missing)
             + 1j * rng.uniform(im0, im1, 4 * missing))
    return np.concatenate([rep + jit * (1 + np.abs(rep)), extra])


def _dedup(pts, eps):
    """Thin a candidate cloud: one representative per eps-scale cluster.

    A coarse quantization pass cuts the cloud to near-distinct values first,
    so the exact pairwise pass only sees a small set.
    """
    if len(pts) == 0:
        return pts
    q = np.round(pts / eps) * eps
    _, idx = np.unique(q, return_index=True)
    pts = pts[idx]
    # quantization leaves at most boundary-straddling duplicates; a sorted
    # sweep with a sliding real-axis window removes those in linear-ish time
    order = np.lexsort((pts.imag, pts.real))
    pts = pts[order]
    out = []
    lo = 0
    for z in pts:
        z = complex(z)
        w = eps * (1 + abs(z))
        while out and out[lo].real < z.real - w and lo < len(out) - 1:
            lo += 1
        if any(abs(z - v) < w for v in out[lo:]):
            continue
        out.append(z)
    return np.asarray(out, dtype=complex)


def _dedup_rel(pts, eps):
    """Dedup with a magnitude-relative tolerance: a and b merge when
    |a - b| < eps (1 + |a|).  Needed once roots span many orders of
    magnitude (the far parameters converge only to relative accuracy)."""
    if len(pts) == 0:
        return pts
    pts = pts[np.argsort(np.abs(pts), kind="stable")]
    mags = np.abs(pts)
    out = []
    out_mag = []
    lo = 0
    for z, m in zip(pts, mags):
        z = complex(z)
        w = eps * (1 + m)
        while lo < len(out) and out_mag[lo] < m - w:
            lo += 1
        if any(abs(z - v) < w for v in out[lo:]):
            continue
        out.append(z)
        out_mag.append(m)
    return np.asarray(out, dtype=complex)


def _drop_near(pts, ref, eps):
    if len(pts) == 0 or len(ref) == 0:
        return pts
    d = np.abs(pts[:, None] - ref[None, :])
    keep = np.min(d, axis=1) > eps * (1 + np.abs(pts))
    return pts[keep]


def _merge_found(found, pts, tol):
    eps = max(1e-7, 10 * tol)
    for z in pts:
        z = complex(z)
        if not any(abs(z - w) < eps * (1 + abs(z)) for w in found):
            found.append(z)
    return found


# ---------------------------------------------------------------------------
# Common torsion
# ---------------------------------------------------------------------------


def common_torsion(E1, x1, E2, x2, n_max, tol=1e-10, cap=ITERATE_CAP):
    """Certified common torsion parameters up to order 2^n_max.

    For each level the two torsion polynomials are compared: a constant gcd
    modulo two large primes (with prime-safe leading coefficients) certifies
    coprimality over Q, so an empty result is exact.  Nonconstant common
    parts are recomputed exactly and their roots reported.
    """
    results = []
    for n in range(1, n_max + 1):
        p1 = torsion_polynomial(E1, x1, n, cap)
        p2 = torsion_polynomial(E2, x2, n, cap)
        if p1.degree < 1 or p2.degree < 1:
            continue
        if p1.coeffs == p2.coeffs:
            g = p1
        else:
            if _coprime_mod_p(p1, p2):
                continue
            g = _exact_gcd(p1, p2)
        if g.degree < 1:
            continue
        try:
            params = list(zip(*_roots_with_mult(g, tol)))
        except RootFindingError:
            params = None
        results.append({
            "level": n,
            "gcd_degree": g.degree,
            "total": g.coeffs == p1.coeffs and g.coeffs == p2.coeffs,
            "parameters": params,
        })
    return results


def _coprime_mod_p(z1, z2):
    for p in (1048573, 1048571):
        if int(z1.lc()) % p == 0 or int(z2.lc()) % p == 0:
            continue
        a = modp_trim(z1.mod_small_prime(p), p)
        b = modp_trim(z2.mod_small_prime(p), p)
        g = modp_gcd(a, b, p)
        if len(g) == 1:
            return True
    return False


def _exact_gcd(z1, z2):
    from .kernel import poly_gcd

    g = poly_gcd(z1.to_poly(), z2.to_poly())
    return ZPoly.from_poly(g.primitive())


def _roots_with_mult(z, tol):
    if _coeff_range_nats(z) >= _EMBED_NAT_LIMIT or z.degree > 400:
        raise RootFindingError("common factor too large to embed; report its degree")
    rts = complex_roots(z.to_poly(), tol)
    return _cluster(rts, tol)


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------


def torsion_csv(ts):
    """CSV lines (n, re, im, exact_order_flag, multiplicity, rational_certified_flag)."""
    lines = ["n,re,im,exact_order_flag,multiplicity,rational_certified_flag"]
    rset = {(float(r), 0.0) for r in ts.rational_roots}
    exact = list(zip(ts.exact_order_roots, ts.exact_order_multiplicities))
    exact_keys = {(round(z.real, 12), round(z.imag, 12)) for z, _ in exact}
    for z, m in zip(ts.roots, ts.multiplicities):
        is_exact = (round(z.real, 12), round(z.imag, 12)) in exact_keys
        is_rat = any(abs(z.real - a) < 1e-9 and abs(z.imag) < 1e-9 for a, _ in rset)
        lines.append(
            f"{ts.n},{z.real:.17g},{z.imag:.17g},{int(is_exact)},{m},{int(is_rat and is_exact)}"
        )
    return "\n".join(lines) + "\n"
