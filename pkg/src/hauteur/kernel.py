"""Exact rational / polynomial / rational-function arithmetic and complex root finding.

The coefficient tower used everywhere else in the library:

* scalars are ``fractions.Fraction`` (re-exported as ``Rat``),
* ``Poly`` is a dense univariate polynomial over Q, lowest degree first,
* ``RatFunc`` is a normalized quotient of two ``Poly`` (coprime, monic denominator),
* ``AlgebraicElement`` is an element of Q[x]/(m) for a monic irreducible m,
  used when base points are algebraic over Q.

Infinity on the base P^1 is the dedicated sentinel ``INF``, never a large
rational.  All values are immutable after construction; every operation here
is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateInputError, PoleError, RootFindingError

Rat = Fraction

DEFAULT_ROOT_TOL = 1e-10
_ABERTH_SWEEP_CAP = 1000


class _Infinity:
    """The point at infinity of P^1, as a first-class place tag."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def _is_probable_prime(n):
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
    for p in small:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PlaceQ:
    """A place of Q: archimedean (p is None) or the finite place at a prime p.

    For K = Q every place weight n_v equals 1.
    """

    p: int | None = None

    def __post_init__(self):
        if self.p is not None and not _is_probable_prime(self.p):
            raise DegenerateInputError(f"{self.p} is not prime")

    @property
    def is_archimedean(self):
        return self.p is None

    @staticmethod
    def archimedean():
        return PlaceQ(None)

    @staticmethod
    def finite(p):
        return PlaceQ(p)

    def __repr__(self):
        return "v_inf" if self.p is None else f"v_{self.p}"


def vp(x, p):
    """Exact p-adic valuation of a nonzero rational, so |x|_p = p^(-vp(x, p))."""
    x = Fraction(x)
    if x == 0:
        raise DegenerateInputError("vp(0) is undefined")
    return _int_vp(x.numerator, p) - _int_vp(x.denominator, p)


def _int_vp(n, p):
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# Dense polynomials over Q
# ---------------------------------------------------------------------------


class Poly:
    """Dense polynomial over Q, coefficients lowest degree first.

    The zero polynomial has an empty coefficient tuple and degree -1 by
    convention; otherwise the leading coefficient is nonzero.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [c if isinstance(c, Fraction) else Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @staticmethod
    def zero():
        return Poly(())

    @staticmethod
    def one():
        return Poly((1,))

    @staticmethod
    def x():
        return Poly((0, 1))

    @staticmethod
    def constant(c):
        return Poly((c,))

    @staticmethod
    def monomial(k, c=1):
        return Poly((0,) * k + (c,))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def is_zero(self):
        return not self.coeffs

    @property
    def is_constant(self):
        return len(self.coeffs) <= 1

    def lc(self):
        if self.is_zero:
            raise DegenerateInputError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self == Poly.constant(other)
        return NotImplemented

    def __hash__(self):
        return hash(("Poly", self.coeffs))

    def __repr__(self):
        if self.is_zero:
            return "Poly(0)"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                terms.append(str(c))
            else:
                var = "t" if k == 1 else f"t^{k}"
                terms.append(var if c == 1 else f"{c}*{var}")
        return "Poly(" + " + ".join(terms) + ")"

    def _coerce(self, other):
        if isinstance(other, Poly):
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.constant(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_zero or o.is_zero:
            return Poly.zero()
        a, b = self.coeffs, o.coeffs
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise DegenerateInputError("negative polynomial power")
        result, base = Poly.one(), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __divmod__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(o.coeffs)
        if dq < 0:
            return Poly.zero(), self
        quo = [Fraction(0)] * (dq + 1)
        olc = o.lc()
        ocs = o.coeffs
        for k in range(dq, -1, -1):
            c = rem[k + len(ocs) - 1] / olc
            quo[k] = c
            if c != 0:
                for j, oc in enumerate(ocs):
                    rem[k + j] -= c * oc
        return Poly(quo), Poly(rem)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def divexact(self, other):
        q, r = divmod(self, other)
        if not r.is_zero:
            raise DegenerateInputError("inexact polynomial division")
        return q

    def __call__(self, x):
        """Horner evaluation.  Accepts Fraction, float, complex, numpy arrays,
        and any object with ring arithmetic (Poly, RatFunc, AlgebraicElement)."""
        if not self.coeffs:
            if isinstance(x, np.ndarray):
                return np.zeros_like(x)
            return x * 0 if not isinstance(x, (int, float, complex, Fraction)) else Fraction(0)
        if isinstance(x, np.ndarray):
            acc = np.full(x.shape, complex(self.coeffs[-1]), dtype=complex)
            for c in reversed(self.coeffs[:-1]):
                acc = acc * x + complex(c)
            return acc
        if isinstance(x, complex):
            acc = complex(self.coeffs[-1])
            for c in reversed(self.coeffs[:-1]):
                acc = acc * x + complex(c)
            return acc
        if isinstance(x, float):
            acc = float(self.coeffs[-1])
            for c in reversed(self.coeffs[:-1]):
                acc = acc * x + float(c)
            return acc
        acc = x * 0 + self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def derivative(self):
        return Poly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def shift(self, a):
        """Return p(t + a), exact Taylor shift via Horner over Poly."""
        lin = Poly((Fraction(a), Fraction(1)))
        acc = Poly.zero()
        for c in reversed(self.coeffs):
            acc = acc * lin + c
        return acc

    def reversed_coeffs(self, length=None):
        """Coefficients highest degree first, padded to ``length`` if given."""
        cs = list(reversed(self.coeffs))
        if length is not None:
            cs = [Fraction(0)] * (length - len(cs)) + cs
        return cs

    def monic(self):
        if self.is_zero:
            return self
        l = self.lc()
        if l == 1:
            return self
        return Poly(tuple(c / l for c in self.coeffs))

    def content_and_primitive(self):
        """(content, primitive part): primitive has integer coefficients with
        positive leading coefficient and content 1; self = content * primitive."""
        if self.is_zero:
            return Fraction(0), self
        den = 1
        for c in self.coeffs:
            den = den * c.denominator // math.gcd(den, c.denominator)
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for c in ints:
            g = math.gcd(g, abs(c))
        if ints[-1] < 0:
            g = -g
        return Fraction(g, den), Poly([Fraction(c // g) for c in ints])

    def primitive(self):
        return self.content_and_primitive()[1]


# ---------------------------------------------------------------------------
# Fraction-free gcd and resultant
# ---------------------------------------------------------------------------


def _prem_int(f, g):
    """Pseudo-remainder of integer coefficient lists (lowest degree first),
    deg f >= deg g >= 0.  Returns an integer list, possibly empty."""
    rem = list(f)
    dg = len(g) - 1
    glc = g[-1]
    while len(rem) - 1 >= dg and rem:
        shift = len(rem) - 1 - dg
        coef = rem[-1]
        rem = [c * glc for c in rem[:-1]]
        for j in range(dg):
            rem[shift + j] -= coef * g[j]
        while rem and rem[-1] == 0:
            rem.pop()
    return rem


def _int_primitive(cs):
    g = 0
    for c in cs:
        g = math.gcd(g, abs(c))
    if g == 0:
        return cs
    if cs[-1] < 0:
        g = -g
    return [c // g for c in cs]


def poly_gcd(a, b):
    """Monic greatest common divisor over Q.

    Uses a content-extracting (primitive PRS) fraction-free scheme; naive
    Euclid over Fraction causes severe coefficient blowup on the degree-4^n
    polynomials produced by the dynamics.
    """
    if not isinstance(a, Poly) or not isinstance(b, Poly):
        raise DegenerateInputError("poly_gcd expects Poly inputs")
    if a.is_zero and b.is_zero:
        raise DegenerateInputError("gcd(0, 0) is undefined")
    if a.is_zero:
        return b.monic()
    if b.is_zero:
        return a.monic()
    f = [int(c) for c in a.primitive().coeffs]
    g = [int(c) for c in b.primitive().coeffs]
    if len(f) < len(g):
        f, g = g, f
    while g:
        r = _prem_int(f, g)
        if not r:
            f = g
            break
        f, g = g, _int_primitive(r)
        if len(f) < len(g):  # only possible on the first swap
            f, g = g, f
    else:
        pass
    if g:
        f = g
    return Poly(f).monic()


def resultant(a, b):
    """Resultant of two polynomials over Q (exact Fraction).

    Computed from the subresultant-style pseudo-remainder sequence with
    explicit bookkeeping of the extracted contents.
    """
    if a.is_zero or b.is_zero:
        return Fraction(0)
    da, db = a.degree, b.degree
    if da == 0:
        return a.coeffs[0] ** db
    if db == 0:
        return b.coeffs[0] ** da
    sign = Fraction(1)
    if da < db:
        a, b = b, a
        da, db = db, da
        if da * db % 2 == 1:
            sign = -sign
    # res(a, b) = lc(b)^(da - dr) * (-1)^(da*db) res(b, r) with r = a mod b
    r = a % b
    if r.is_zero:
        return Fraction(0)
    dr = r.degree
    if (da * db) % 2 == 1:
        sign = -sign
    return sign * b.lc() ** (da - dr) * resultant(b, r)


# ---------------------------------------------------------------------------
# Rational root extraction (small polynomials)
# ---------------------------------------------------------------------------


def _small_divisors(n, cap=200000):
    """Sorted positive divisors of |n|, or None if |n| resists factoring by
    trial division up to the cap."""
    n = abs(n)
    if n == 0:
        return None
    factors = {}
    d = 2
    while d * d <= n and d <= cap:
        while n % d == 0:
            factors[d] = factors.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        if n > cap * cap:
            return None
        factors[n] = factors.get(n, 0) + 1
    divs = [1]
    for p, e in factors.items():
        divs = [dd * p ** k for dd in divs for k in range(e + 1)]
    return sorted(divs)


def rational_roots(f):
    """All rational roots of f with multiplicities, as a list of (root, mult).

    Intended for small polynomials (singular loci, section denominators);
    uses divisor enumeration on the primitive part.
    """
    if f.is_zero:
        raise DegenerateInputError("rational_roots of the zero polynomial")
    f = f.primitive()
    roots = []
    # strip t^k
    k = 0
    while f.coeffs[0] == 0:
        f = Poly(f.coeffs[1:])
        k += 1
    if k:
        roots.append((Fraction(0), k))
    if f.degree < 1:
        return roots
    a0 = int(f.coeffs[0])
    ad = int(f.lc())
    nums = _small_divisors(a0)
    dens = _small_divisors(ad)
    if nums is None or dens is None:
        return roots + _rational_roots_by_float(f)
    cands = set()
    for p in nums:
        for q in dens:
            cands.add(Fraction(p, q))
            cands.add(Fraction(-p, q))
    for r in sorted(cands):
        if f(r) == 0:
            m = 0
            lin = Poly((-r, 1))
            while True:
                q, rem = divmod(f, lin)
                if not rem.is_zero:
                    break
                f, m = q, m + 1
            roots.append((r, m))
    return roots


def _rational_roots_by_float(f):
    """Fallback: locate float roots, round to small-denominator rationals and
    certify by exact evaluation."""
    roots = []
    seen = set()
    for z in complex_roots(f, 1e-10):
        if abs(z.imag) > 1e-6:
            continue
        cand = Fraction(z.real).limit_denominator(10**6)
        if cand in seen:
            continue
        seen.add(cand)
        if f(cand) == 0:
            m = 0
            lin = Poly((-cand, 1))
            g = f
            while True:
                q, rem = divmod(g, lin)
                if not rem.is_zero:
                    break
                g, m = q, m + 1
            roots.append((cand, m))
    return roots


# ---------------------------------------------------------------------------
# Rational functions over Q (elements of Q(t))
# ---------------------------------------------------------------------------


class RatFunc:
    """Normalized quotient num/den of polynomials over Q.

    Invariants: gcd(num, den) = 1, den monic and nonzero.  Normalization is
    idempotent; two equal rational functions have identical field values.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if isinstance(num, RatFunc) and den is None:
            object.__setattr__(self, "num", num.num)
            object.__setattr__(self, "den", num.den)
            return
        num = num if isinstance(num, Poly) else Poly.constant(Fraction(num))
        if den is None:
            den = Poly.one()
        elif not isinstance(den, Poly):
            den = Poly.constant(Fraction(den))
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero:
            object.__setattr__(self, "num", Poly.zero())
            object.__setattr__(self, "den", Poly.one())
            return
        g = poly_gcd(num, den)
        if g.degree > 0:
            num = num.divexact(g)
            den = den.divexact(g)
        l = den.lc()
        if l != 1:
            num = Poly(tuple(c / l for c in num.coeffs))
            den = den.monic()
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @staticmethod
    def t():
        return RatFunc(Poly.x())

    @staticmethod
    def constant(c):
        return RatFunc(Poly.constant(Fraction(c)))

    @property
    def is_zero(self):
        return self.num.is_zero

    @property
    def is_constant(self):
        return self.num.is_constant and self.den.is_constant

    def as_rat(self):
        if not self.is_constant:
            raise DegenerateInputError("not a constant rational function")
        if self.is_zero:
            return Fraction(0)
        return self.num.coeffs[0]

    def __eq__(self, other):
        o = _coerce_ratfunc(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash(("RatFunc", self.num.coeffs, self.den.coeffs))

    def __repr__(self):
        if self.den == Poly.one():
            return f"RatFunc({self.num!r})"
        return f"RatFunc({self.num!r} / {self.den!r})"

    def __add__(self, other):
        o = _coerce_ratfunc(other)
        if o is None:
            return NotImplemented
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        o = _coerce_ratfunc(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = _coerce_ratfunc(other)
        if o is None:
            return NotImplemented
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce_ratfunc(other)
        if o is None:
            return NotImplemented
        if o.is_zero:
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        o = _coerce_ratfunc(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, n):
        if n < 0:
            return (RatFunc.constant(1) / self) ** (-n)
        return RatFunc(self.num ** n, self.den ** n)

    def derivative(self):
        return RatFunc(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def eval(self, t):
        """Evaluate at a Fraction or complex parameter; PoleError at poles."""
        if isinstance(t, Fraction) or isinstance(t, int):
            t = Fraction(t)
            d = self.den(t)
            if d == 0:
                raise PoleError(f"pole at t = {t}")
            return self.num(t) / d
        d = self.den(complex(t))
        if d == 0:
            raise PoleError(f"pole at t = {t}")
        return self.num(complex(t)) / d

    def has_pole_at(self, t):
        if t is INF:
            return self.num.degree > self.den.degree
        return self.den(Fraction(t)) == 0


def _coerce_ratfunc(x):
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, (int, Fraction)):
        return RatFunc.constant(x)
    if isinstance(x, Poly):
        return RatFunc(x)
    return None


def ord_at(f, gamma):
    """Order of vanishing of a nonzero f in Q(t) at a base point of P^1.

    At finite gamma this is the integer m with f = (t-gamma)^m * (unit at
    gamma); at INF it is deg(den) - deg(num).
    """
    f = _coerce_ratfunc(f)
    if f is None or f.is_zero:
        raise DegenerateInputError("ord_at of zero (or non-coercible) input")
    if gamma is INF:
        return f.num.degree * -1 + f.den.degree
    gamma = Fraction(gamma)
    return _poly_ord_at(f.num, gamma) - _poly_ord_at(f.den, gamma)


def _poly_ord_at(p, gamma):
    if p.is_zero:
        raise DegenerateInputError("ord of zero polynomial")
    if p(gamma) != 0:
        return 0
    m = 0
    lin = Poly((-gamma, 1))
    while True:
        q, r = divmod(p, lin)
        if not r.is_zero:
            return m
        p, m = q, m + 1


def poly_ord_at_factor(p, minpoly):
    """Multiplicity of an irreducible factor (given by its monic minpoly) in p."""
    if p.is_zero:
        raise DegenerateInputError("ord of zero polynomial")
    m = 0
    while True:
        q, r = divmod(p, minpoly)
        if not r.is_zero:
            return m
        p, m = q, m + 1


# ---------------------------------------------------------------------------
# Algebraic elements Q[x]/(m)
# ---------------------------------------------------------------------------


class AlgebraicElement:
    """An element of Q[x]/(m(x)) for a monic irreducible m over Q.

    Only the ring/field operations needed by the local series iterations are
    provided; no embeddings, no comparisons beyond equality.
    """

    __slots__ = ("minpoly", "coeffs")

    def __init__(self, minpoly, coeffs):
        if not isinstance(minpoly, Poly) or minpoly.degree < 1:
            raise DegenerateInputError("minpoly must be a nonconstant Poly")
        minpoly = minpoly.monic()
        cs = [c if isinstance(c, Fraction) else Fraction(c) for c in coeffs]
        if len(cs) >= len(minpoly.coeffs):
            cs = list(Poly(cs).__mod__(minpoly).coeffs)
        while len(cs) < minpoly.degree:
            cs.append(Fraction(0))
        object.__setattr__(self, "minpoly", minpoly)
        object.__setattr__(self, "coeffs", tuple(cs[: minpoly.degree]))

    @staticmethod
    def generator(minpoly):
        return AlgebraicElement(minpoly, (0, 1))

    @staticmethod
    def from_rat(minpoly, c):
        return AlgebraicElement(minpoly, (Fraction(c),))

    @property
    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __hash__(self):
        return hash(("Alg", self.minpoly.coeffs, self.coeffs))

    def __repr__(self):
        return f"Alg({list(self.coeffs)} mod {self.minpoly!r})"

    def _coerce(self, other):
        if isinstance(other, AlgebraicElement):
            if other.minpoly != self.minpoly:
                raise DegenerateInputError("mixed algebraic fields")
            return other
        if isinstance(other, (int, Fraction)):
            return AlgebraicElement.from_rat(self.minpoly, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return AlgebraicElement(self.minpoly, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicElement(self.minpoly, [-a for a in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        prod = Poly(self.coeffs) * Poly(o.coeffs)
        return AlgebraicElement(self.minpoly, (prod % self.minpoly).coeffs)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero:
            raise ZeroDivisionError("inverse of zero algebraic element")
        # extended Euclid in Q[x]: s*self + t*minpoly = 1
        a, b = Poly(self.coeffs), self.minpoly
        s0, s1 = Poly.one(), Poly.zero()
        while not b.is_zero:
            q, r = divmod(a, b)
            a, b = b, r
            s0, s1 = s1, s0 - q * s1
        if a.degree != 0:
            raise DegenerateInputError("minpoly is not irreducible over Q")
        inv = Poly(tuple(c / a.coeffs[0] for c in s0.coeffs))
        return AlgebraicElement(self.minpoly, (inv % self.minpoly).coeffs)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()


# ---------------------------------------------------------------------------
# Complex root finding
# ---------------------------------------------------------------------------


def _scaled_complex_coeffs(f):
    """Convert huge exact coefficients to float by a common power-of-two
    rescaling (roots are scale invariant)."""
    logs = []
    for c in f.coeffs:
        if c == 0:
            logs.append(None)
            continue
        logs.append(
            c.numerator.bit_length() - c.denominator.bit_length()
        )
    top = max(l for l in logs if l is not None)
    out = []
    for c, l in zip(f.coeffs, logs):
        if l is None:
            out.append(0.0)
            continue
        shift = top - 8  # keep the largest coefficient around 2^8
        num, den = c.numerator, c.denominator
        if shift > 0:
            den <<= shift
        elif shift < 0:
            num <<= -shift
        try:
            out.append(num / den)
        except OverflowError:
            out.append(math.copysign(math.inf, num))
    if not all(math.isfinite(v) for v in out):
        raise RootFindingError("coefficient dynamic range exceeds binary64")
    return np.array(out, dtype=float)


def _aberth(coeffs, tol, cap=_ABERTH_SWEEP_CAP):
    """Aberth-Ehrlich simultaneous iteration on float coefficients (low first).

    Returns an array of roots, or None on nonconvergence.
    """
    d = len(coeffs) - 1
    p = np.asarray(coeffs, dtype=complex)
    dp = p[1:] * np.arange(1, d + 1)
    # Fujiwara-style radius for initial points
    lead = abs(p[-1])
    with np.errstate(divide="ignore"):
        radii = [abs(p[k]) / lead for k in range(d)]
    r = 1.0
    for k in range(d):
        if radii[k] > 0:
            r = max(r, 2.0 * radii[k] ** (1.0 / (d - k)))
    angles = 2 * np.pi * np.arange(d) / d + 0.4
    z = r * np.exp(1j * angles) * (1 + 0.08 * np.cos(3 * angles))

    def horner(x, cs):
        acc = np.full_like(x, cs[-1])
        for c in cs[-2::-1]:
            acc = acc * x + c
        return acc

    for _ in range(cap):
        with np.errstate(over="ignore", invalid="ignore"):
            pz = horner(z, p)
            dpz = horner(z, dp)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = np.where(dpz != 0, pz / dpz, 0.0)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            sums = np.sum(1.0 / diff, axis=1)
            denom = 1.0 - newton * sums
            step = np.where(denom != 0, newton / denom, newton)
        z = z - step
        if not np.all(np.isfinite(z)):
            return None
        if np.max(np.abs(step)) < tol * (1.0 + np.max(np.abs(z))):
            return z
    return None


def complex_roots(f, tol=DEFAULT_ROOT_TOL):
    """All complex roots of f with multiplicity, deterministically ordered.

    Simultaneous (Aberth-style) iteration with a companion-matrix fallback,
    followed by one Newton refinement pass.  Output is sorted
    lexicographically by (re, im) after rounding at the tolerance, so golden
    tests see a stable ordering.
    """
    if not isinstance(f, Poly):
        f = Poly(f)
    if f.degree < 1:
        raise DegenerateInputError("complex_roots needs degree >= 1")
    coeffs = _scaled_complex_coeffs(f)
    # strip exact zero roots first; they are common and cheap
    nzero = 0
    while coeffs[0] == 0.0 and f.coeffs[nzero] == 0:
        coeffs = coeffs[1:]
        nzero += 1
    d = len(coeffs) - 1
    roots = None
    if d >= 1:
        roots = _aberth(coeffs, tol)
        if roots is None:
            # companion-matrix oracle path
            monic = np.asarray(coeffs, dtype=complex) / coeffs[-1]
            comp = np.zeros((d, d), dtype=complex)
            comp[1:, :-1] = np.eye(d - 1)
            comp[:, -1] = -monic[:-1]
            try:
                roots = np.linalg.eigvals(comp)
            except np.linalg.LinAlgError as exc:
                raise RootFindingError(
                    f"root finding failed at degree {f.degree}"
                ) from exc
        # one Newton refinement pass against the scaled polynomial
        p = np.asarray(coeffs, dtype=complex)
        dp = p[1:] * np.arange(1, d + 1)

        def horner(x, cs):
            acc = np.full_like(x, cs[-1])
            for c in cs[-2::-1]:
                acc = acc * x + c
            return acc

        with np.errstate(over="ignore", invalid="ignore"):
            pz = horner(roots, p)
            dpz = horner(roots, dp)
        with np.errstate(divide="ignore", invalid="ignore"):
            corr = np.where(np.abs(dpz) > 0, pz / dpz, 0.0)
        good = np.abs(corr) < 10 * tol * (1 + np.abs(roots))
        roots = np.where(good, roots - corr, roots)
        out = list(roots)
    else:
        out = []
    out = [0j] * nzero + out
    if len(out) != f.degree:
        raise RootFindingError(f"root finding failed at degree {f.degree}")

    def key(z):
        q = max(tol, 1e-14)
        return (round(z.real / q), round(z.imag / q))

    return sorted((complex(z) for z in out), key=key)
