"""Weierstrass models over Q and over Q(t).

A curve is y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 with coefficients in
a common ring R: Fraction for a single curve over Q, RatFunc for an elliptic
surface over the base P^1, or float/complex for specialized fibers at
floating parameters.

The multiplication-by-2 map on x-coordinates is phi/psi with

    phi = x^4 - b4 x^2 - 2 b6 x - b8,    psi = 4x^3 + b2 x^2 + 2 b4 x + b6,

and all heights downstream are built from its standard homogeneous lift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DegenerateInputError,
    NeedsModelChangeError,
    NotAnEllipticSurfaceError,
    SingularCurveError,
)
from .kernel import INF, Poly, RatFunc, complex_roots, ord_at, rational_roots
from .parsing import parse_ratfunc


def _coerce_ring(vals):
    """Promote a mixed list of int/Fraction/RatFunc/float/complex to one ring."""
    if any(isinstance(v, RatFunc) for v in vals):
        return [v if isinstance(v, RatFunc) else RatFunc.constant(Fraction(v)) for v in vals]
    if any(isinstance(v, complex) for v in vals):
        return [complex(v) for v in vals]
    if any(isinstance(v, float) for v in vals):
        return [float(v) for v in vals]
    return [Fraction(v) for v in vals]


def _is_zero(v):
    if isinstance(v, RatFunc):
        return v.is_zero
    return v == 0


@dataclass(frozen=True)
class BInvariants:
    b2: object
    b4: object
    b6: object
    b8: object


@dataclass(frozen=True)
class DuplicationData:
    """phi (degree 4, monic) and psi (degree 3) as low-first coefficient tuples."""

    phi: tuple
    psi: tuple

    def eval_phi(self, x):
        acc = self.phi[-1] * (x * 0 + 1) if not isinstance(x, (int, float, complex)) else self.phi[-1]
        for c in reversed(self.phi[:-1]):
            acc = acc * x + c
        return acc

    def eval_psi(self, x):
        acc = self.psi[-1] * (x * 0 + 1) if not isinstance(x, (int, float, complex)) else self.psi[-1]
        for c in reversed(self.psi[:-1]):
            acc = acc * x + c
        return acc


class WeierstrassCurve:
    """Immutable Weierstrass model over a coefficient ring R."""

    __slots__ = ("a1", "a2", "a3", "a4", "a6")

    def __init__(self, a1, a2, a3, a4, a6):
        vals = _coerce_ring([a1, a2, a3, a4, a6])
        for name, v in zip(("a1", "a2", "a3", "a4", "a6"), vals):
            object.__setattr__(self, name, v)

    def __setattr__(self, k, v):
        raise AttributeError("WeierstrassCurve is immutable")

    @property
    def coefficients(self):
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    @property
    def is_function_field(self):
        return isinstance(self.a1, RatFunc)

    def __repr__(self):
        return f"WeierstrassCurve(a1={self.a1}, a2={self.a2}, a3={self.a3}, a4={self.a4}, a6={self.a6})"

    def __eq__(self, other):
        if not isinstance(other, WeierstrassCurve):
            return NotImplemented
        return self.coefficients == other.coefficients

    def __hash__(self):
        return hash(("W",) + self.coefficients)

    # -- invariants ---------------------------------------------------------

    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.coefficients
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return BInvariants(b2, b4, b6, b8)

    def c_invariants(self):
        b = self.b_invariants()
        c4 = b.b2 * b.b2 - 24 * b.b4
        c6 = -b.b2 * b.b2 * b.b2 + 36 * b.b2 * b.b4 - 216 * b.b6
        return c4, c6

    def discriminant(self):
        b = self.b_invariants()
        return (
            -b.b2 * b.b2 * b.b8
            - 8 * b.b4 * b.b4 * b.b4
            - 27 * b.b6 * b.b6
            + 9 * b.b2 * b.b4 * b.b6
        )

    def discriminant_j(self):
        """(Delta, j); j is None where Delta vanishes.

        Raises NotAnEllipticSurfaceError if Delta is identically zero over the
        function field.
        """
        delta = self.discriminant()
        if _is_zero(delta):
            if self.is_function_field:
                raise NotAnEllipticSurfaceError("discriminant is identically zero")
            return delta, None
        c4, _ = self.c_invariants()
        return delta, c4 * c4 * c4 / delta

    @property
    def is_smooth(self):
        """For curves over Rat/Cx: whether Delta != 0."""
        return not _is_zero(self.discriminant())

    # -- dynamics -----------------------------------------------------------

    def duplication_map(self):
        b = self.b_invariants()
        delta = self.discriminant()
        if _is_zero(delta):
            raise SingularCurveError("duplication map needs a smooth model")
        one = b.b2 * 0 + 1
        phi = (-b.b8, -2 * b.b6, -b.b4, 0 * one, one)
        psi = (b.b6, 2 * b.b4, b.b2, 4 * one)
        return DuplicationData(phi=phi, psi=psi)

    # -- specialization -----------------------------------------------------

    def specialize(self, t0):
        """Evaluate a function-field model at a parameter (Fraction or complex).

        Poles of any coefficient raise NeedsModelChangeError; the caller
        should clear denominators first (see cleared_model).
        """
        if not self.is_function_field:
            raise DegenerateInputError("specialize applies to function-field curves")
        vals = []
        for a in self.coefficients:
            try:
                vals.append(a.eval(t0))
            except Exception as exc:
                raise NeedsModelChangeError(
                    f"coefficient has a pole at t = {t0}; clear denominators first"
                ) from exc
        return WeierstrassCurve(*vals)

    def scaled(self, u):
        """The isomorphic model with (x, y) -> (u^2 x, u^3 y): a_i -> u^i a_i."""
        return WeierstrassCurve(
            self.a1 * u,
            self.a2 * u * u,
            self.a3 * u ** 3,
            self.a4 * u ** 4,
            self.a6 * u ** 6,
        )

    def cleared_model(self):
        """Integral normal form of a function-field model.

        Returns (curve, u) with u in Q(t) a polynomial scalar such that the
        scaled curve has polynomial coefficients with integer coefficients.
        Escape-rate code needs polynomial (not rational-function) iterates.
        For curves over Q the analogue returns integer coefficients and an
        integer u.
        """
        if not self.is_function_field:
            u = 1
            for a in self.coefficients:
                u = u * a.denominator // math.gcd(u, a.denominator)
            u = Fraction(u)
            return self.scaled(u), u
        upoly = Poly.one()
        for a in self.coefficients:
            g = upoly if a.den.is_constant else _poly_lcm(upoly, a.den)
            upoly = g
        u = RatFunc(upoly)
        scaled = self.scaled(u)
        den = 1
        for a in scaled.coefficients:
            if not a.den.is_constant:
                raise DegenerateInputError("denominator clearing failed")
            for c in a.num.coeffs:
                den = den * c.denominator // math.gcd(den, c.denominator)
        if den != 1:
            u = u * den
            scaled = self.scaled(u)
        return scaled, u

    # -- singular locus -----------------------------------------------------

    def singular_parameters(self, tol=1e-10):
        """Finite singular/degenerate parameters plus a flag for infinity.

        The finite set is: roots of the numerator of Delta together with
        poles of any coefficient.  Exact rational members are certified by
        rational root extraction; the rest are floating roots.
        """
        if not self.is_function_field:
            raise DegenerateInputError("singular_parameters applies to function-field curves")
        delta, _ = self.discriminant_j()
        locus = delta.num
        for a in self.coefficients:
            if not a.den.is_constant:
                locus = locus * a.den
        exact = []
        residual = locus.primitive()
        for r, m in rational_roots(residual):
            exact.append(r)
            residual = residual.divexact(Poly((-r, 1)) ** m)
        floating = []
        if residual.degree >= 1:
            seen = []
            for z in complex_roots(residual, tol):
                if not any(abs(z - w) < 100 * tol for w in seen):
                    seen.append(z)
            floating = seen
        return SingularParameters(
            finite_exact=tuple(sorted(set(exact))),
            finite_floating=tuple(floating),
            at_infinity=self._degenerates_at_infinity(delta),
        )

    def _degenerates_at_infinity(self, delta):
        """Whether a coordinate scaling can make the fiber at infinity smooth.

        Smooth at infinity iff ord_inf(Delta) is divisible by 12 and the
        scaling lam = -ord/12 keeps every coefficient regular there.  This is
        a statement about scalings of the given model; translations are not
        attempted.
        """
        v = ord_at(delta, INF)
        if v % 12 != 0:
            return True
        lam = -v // 12
        for i, a in zip((1, 2, 3, 4, 6), self.coefficients):
            if _is_zero(a):
                continue
            if ord_at(a, INF) + i * lam < 0:
                return True
        return False


@dataclass(frozen=True)
class SingularParameters:
    finite_exact: tuple      # Fractions, certified
    finite_floating: tuple   # complex, not rational
    at_infinity: bool

    def all_finite_complex(self):
        return [complex(Fraction(r)) for r in self.finite_exact] + list(self.finite_floating)


def _poly_lcm(a, b):
    from .kernel import poly_gcd

    g = poly_gcd(a, b)
    return (a * b).divexact(g).monic()


# ---------------------------------------------------------------------------
# Curve spec interface (shared with the CLI)
# ---------------------------------------------------------------------------


def curve_from_spec(spec):
    """Build a function-field curve from {"a1": "...", ..., "var": "t"}.

    Missing a_i default to 0; coefficients are rational-function strings.
    """
    var = spec.get("var", "t")
    vals = []
    for key in ("a1", "a2", "a3", "a4", "a6"):
        raw = spec.get(key, "0")
        if isinstance(raw, (int, float)):
            raw = str(raw)
        vals.append(parse_ratfunc(raw, var))
    curve = WeierstrassCurve(*vals)
    curve.discriminant_j()  # raises if identically singular
    return curve


def curve_to_spec(curve, var="t"):
    from .parsing import format_ratfunc

    out = {"var": var}
    for key, a in zip(("a1", "a2", "a3", "a4", "a6"), curve.coefficients):
        out[key] = format_ratfunc(a, var)
    return out
