"""Dense integer polynomials tuned for the degree-4^n iterates of the dynamics.

Two representations live here:

* ``ZPoly``: gmpy2.mpz coefficients, lowest degree first.  Multiplication goes
  through Kronecker substitution (pack into one huge integer, one bigint
  multiply, unpack), which is what makes exact iteration to level 6 feasible:
  schoolbook O(d^2) on thousand-digit coefficients is hopeless at degree 2730.
* mod-p vectors: numpy int64 arrays with p small enough that products stay
  below 2^63, used for degree counting and gcd certificates where exact
  coefficients are not needed.
"""

from __future__ import annotations

import math

import gmpy2
import numpy as np
from gmpy2 import mpz

from .errors import DegenerateInputError


class ZPoly:
    """Integer polynomial, mpz coefficients lowest degree first, normalized."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [c if isinstance(c, type(mpz(0))) else mpz(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @staticmethod
    def zero():
        return ZPoly(())

    @staticmethod
    def one():
        return ZPoly((1,))

    @staticmethod
    def x():
        return ZPoly((0, 1))

    @staticmethod
    def constant(c):
        return ZPoly((c,))

    @staticmethod
    def from_poly(p):
        """From a kernel.Poly with integer coefficients."""
        return ZPoly(tuple(mpz(c.numerator) for c in p.coeffs))

    def to_poly(self):
        from .kernel import Poly

        return Poly(tuple(int(c) for c in self.coeffs))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def is_zero(self):
        return not self.coeffs

    def lc(self):
        if self.is_zero:
            raise DegenerateInputError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __eq__(self, other):
        if isinstance(other, ZPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, int):
            return self == ZPoly.constant(other)
        return NotImplemented

    def __hash__(self):
        return hash(("ZPoly", tuple(int(c) for c in self.coeffs)))

    def __repr__(self):
        return f"ZPoly(deg={self.degree})"

    def __add__(self, other):
        if isinstance(other, int):
            other = ZPoly.constant(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return ZPoly(out)

    def __neg__(self):
        return ZPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        if isinstance(other, int):
            other = ZPoly.constant(other)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            other = ZPoly.constant(other)
        if self.is_zero or other.is_zero:
            return ZPoly.zero()
        if min(len(self.coeffs), len(other.coeffs)) <= 8:
            return self._mul_schoolbook(other)
        return self._mul_kronecker(other)

    __rmul__ = __mul__

    def _mul_schoolbook(self, other):
        a, b = self.coeffs, other.coeffs
        out = [mpz(0)] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            if ai == 0:
                continue
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return ZPoly(out)

    def _mul_kronecker(self, other):
        """Kronecker substitution: evaluate both factors at 2^B, multiply once,
        unpack digits.  Signs are handled by splitting into positive and
        negative parts so the packed digits are nonnegative."""
        a, b = self.coeffs, other.coeffs
        abits = max(c.bit_length() for c in a)
        bbits = max(c.bit_length() for c in b)
        # coefficient bound: |c_k| <= min(len) * max|a| * max|b|
        B = abits + bbits + (min(len(a), len(b))).bit_length() + 2
        ap, an = _pack_split(a, B)
        bp, bn = _pack_split(b, B)
        pos = ap * bp + an * bn
        neg = ap * bn + an * bp
        nout = len(a) + len(b) - 1
        return ZPoly(_unpack_diff(pos, neg, B, nout))

    def __pow__(self, n):
        result, base = ZPoly.one(), self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __call__(self, x):
        if self.is_zero:
            return mpz(0) if isinstance(x, (int, type(mpz(0)))) else x * 0
        acc = self.coeffs[-1]
        if isinstance(x, (float, complex)):
            acc = complex(acc) if isinstance(x, complex) else float(acc)
            for c in reversed(self.coeffs[:-1]):
                acc = acc * x + (complex(c) if isinstance(x, complex) else float(c))
            return acc
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def content(self):
        """gcd of coefficients, sign chosen so primitive part has positive lc."""
        if self.is_zero:
            return mpz(0)
        g = mpz(0)
        for c in self.coeffs:
            g = gmpy2.gcd(g, c)
            if g == 1:
                break
        if self.coeffs[-1] < 0:
            g = -g
        return g

    def divexact_const(self, c):
        return ZPoly(tuple(ci // c for ci in self.coeffs))

    def exact_sqrt(self):
        """S with S*S == self, or None.

        Coefficients of S are solved from the top degree down; the candidate
        is verified by one exact multiplication at the end.
        """
        if self.is_zero:
            return ZPoly.zero()
        d = self.degree
        if d % 2 != 0 or self.coeffs[-1] < 0:
            return None
        lead, rem = gmpy2.isqrt_rem(self.coeffs[-1])
        if rem != 0:
            return None
        m = d // 2
        s = [mpz(0)] * (m + 1)
        s[m] = lead
        two_lead = 2 * lead
        for k in range(1, m + 1):
            acc = self.coeffs[d - k]
            for i in range(m - k + 1, m):
                acc -= s[i] * s[2 * m - k - i]
            q, r = divmod(acc, two_lead)
            if r != 0:
                return None
            s[m - k] = q
        cand = ZPoly(tuple(s))
        if (cand * cand).coeffs == self.coeffs:
            return cand
        return None

    def primitive(self):
        c = self.content()
        if c in (0, 1):
            return self
        return self.divexact_const(c)

    def divexact(self, other):
        """Exact polynomial division (raises if inexact)."""
        if other.is_zero:
            raise ZeroDivisionError("division by zero polynomial")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            if self.is_zero:
                return ZPoly.zero()
            raise DegenerateInputError("inexact integer polynomial division")
        quo = [mpz(0)] * (dq + 1)
        ocs = other.coeffs
        olc = other.lc()
        for k in range(dq, -1, -1):
            top = rem[k + len(ocs) - 1]
            q, r = divmod(top, olc)
            if r != 0:
                raise DegenerateInputError("inexact integer polynomial division")
            quo[k] = q
            if q != 0:
                for j, oc in enumerate(ocs):
                    rem[k + j] -= q * oc
        if any(c != 0 for c in rem):
            raise DegenerateInputError("inexact integer polynomial division")
        return ZPoly(quo)

    def ord_at_zero(self):
        """Multiplicity of the root t = 0 (number of leading zero coefficients)."""
        if self.is_zero:
            raise DegenerateInputError("ord of zero polynomial")
        k = 0
        while self.coeffs[k] == 0:
            k += 1
        return k

    def shift_down(self, k):
        """Divide by t^k exactly."""
        if k == 0:
            return self
        assert all(c == 0 for c in self.coeffs[:k])
        return ZPoly(self.coeffs[k:])

    def reverse(self, length=None):
        """Coefficient reversal t^d * p(1/t); ``length`` pads the degree."""
        n = (length if length is not None else len(self.coeffs)) - 1
        out = [mpz(0)] * (n + 1)
        for i, c in enumerate(self.coeffs):
            out[n - i] = c
        return ZPoly(out)

    def mod_small_prime(self, p):
        """Reduce to an int64 numpy vector mod p (p < ~2^21 for safe products)."""
        return np.array([int(c % p) for c in self.coeffs], dtype=np.int64)


def _pack_split(coeffs, B):
    """Pack positive and negative parts of a coefficient list at base 2^B."""
    pos = mpz(0)
    neg = mpz(0)
    for i in range(len(coeffs) - 1, -1, -1):
        pos <<= B
        neg <<= B
        c = coeffs[i]
        if c > 0:
            pos += c
        elif c < 0:
            neg -= c
    return pos, neg


def _unpack_diff(pos, neg, B, n):
    """Unpack pos - neg into n base-2^B digits, allowing negative digits.

    Digits of the true product are bounded by 2^(B-1) in absolute value, so
    unpacking pos and neg separately and subtracting digitwise is exact.
    """
    mask = (mpz(1) << B) - 1
    out = []
    for _ in range(n):
        out.append((pos & mask) - (neg & mask))
        pos >>= B
        neg >>= B
    return out


# ---------------------------------------------------------------------------
# mod-p dense polynomial helpers (numpy int64 vectors, lowest degree first)
# ---------------------------------------------------------------------------

# a prime near 2^20: products of two reduced values stay far below 2^63 even
# after length-4096 convolution sums (4096 * p^2 < 2^63 needs p < 2^25.5)
DEFAULT_CERT_PRIME = 1048573


def modp_trim(a, p):
    a = np.mod(a, p)
    nz = np.nonzero(a)[0]
    if len(nz) == 0:
        return np.zeros(0, dtype=np.int64)
    return a[: nz[-1] + 1].astype(np.int64)


def modp_mul(a, b, p):
    if len(a) == 0 or len(b) == 0:
        return np.zeros(0, dtype=np.int64)
    prod = np.convolve(a, b)
    return modp_trim(prod % p, p)


def modp_add(a, b, p):
    if len(a) < len(b):
        a, b = b, a
    out = a.copy()
    out[: len(b)] += b
    return modp_trim(out, p)


def modp_scal(c, a, p):
    return modp_trim((a * (c % p)) % p, p)


def modp_divmod(a, b, p):
    if len(b) == 0:
        raise ZeroDivisionError("mod-p division by zero polynomial")
    a = a.astype(np.int64).copy()
    db = len(b) - 1
    inv_lc = pow(int(b[-1]), p - 2, p)
    if len(a) - 1 < db:
        return np.zeros(0, dtype=np.int64), modp_trim(a, p)
    quo = np.zeros(len(a) - db, dtype=np.int64)
    for k in range(len(a) - 1, db - 1, -1):
        c = a[k] % p
        if c:
            q = c * inv_lc % p
            quo[k - db] = q
            a[k - db : k + 1] = (a[k - db : k + 1] - q * b) % p
    return modp_trim(quo, p), modp_trim(a[:db], p)


def modp_gcd(a, b, p):
    """Monic gcd mod p."""
    a, b = modp_trim(a, p), modp_trim(b, p)
    while len(b):
        _, r = modp_divmod(a, b, p)
        a, b = b, r
    if len(a) == 0:
        raise DegenerateInputError("gcd(0,0) mod p")
    inv = pow(int(a[-1]), p - 2, p)
    return modp_trim(a * inv % p, p)
