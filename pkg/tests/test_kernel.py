"""Exact polynomial/rational kernel: arithmetic, gcd, resultants, roots."""

import math
import random
from fractions import Fraction

import pytest

from hauteur.errors import DegenerateInputError
from hauteur.kernel import (
    AlgebraicElement,
    PlaceQ,
    Poly,
    RatFunc,
    complex_roots,
    poly_gcd,
    rational_roots,
    resultant,
    vp,
)


def P(*coeffs):
    return Poly([Fraction(c) for c in coeffs])


class TestPoly:
    def test_ring_axioms_random(self):
        rng = random.Random(7)
        for _ in range(25):
            a = P(*[rng.randint(-9, 9) for _ in range(rng.randint(1, 6))])
            b = P(*[rng.randint(-9, 9) for _ in range(rng.randint(1, 6))])
            c = P(*[rng.randint(-9, 9) for _ in range(rng.randint(1, 6))])
            assert a * (b + c) == a * b + a * c
            assert (a * b) * c == a * (b * c)
            assert a + b == b + a

    def test_divmod_and_exact_division(self):
        a = P(-6, 11, -6, 1)        # (t-1)(t-2)(t-3)
        b = P(-1, 1)
        q, r = divmod(a, b)
        assert r.is_zero and q == P(6, -5, 1)
        assert a.divexact(b) == q
        with pytest.raises(DegenerateInputError):
            P(1, 1).divexact(P(0, 1))

    def test_eval_and_derivative(self):
        f = P(1, -3, 0, 2)
        assert f(Fraction(1, 2)) == Fraction(1) - Fraction(3, 2) + Fraction(1, 4)
        assert f.derivative() == P(-3, 0, 6)

    def test_gcd_detects_repeated_factor(self):
        f = P(-2, 1) * P(-2, 1) * P(3, 1)
        g = poly_gcd(f, f.derivative())
        assert g.monic() == P(-2, 1)

    def test_gcd_of_coprime_is_constant(self):
        assert poly_gcd(P(-1, 1), P(1, 1)).degree == 0

    def test_resultant_multiplicative(self):
        a, b, c = P(-1, 0, 1), P(-4, 0, 1), P(1, 1, 1)
        assert resultant(a * b, c) == resultant(a, c) * resultant(b, c)

    def test_resultant_vanishes_iff_common_root(self):
        assert resultant(P(-2, 1) * P(5, 1), P(-2, 1)) == 0
        assert resultant(P(-2, 1), P(-3, 1)) != 0


class TestRoots:
    def test_rational_roots_with_multiplicity(self):
        f = P(-2, 1) ** 2 * P(3, 1) * P(1, 0, 1)
        assert rational_roots(f) == [(Fraction(-3), 1), (Fraction(2), 2)]

    def test_rational_roots_fractional(self):
        f = P(-1, 3) * P(2, 5)
        assert rational_roots(f) == [(Fraction(-2, 5), 1), (Fraction(1, 3), 1)]

    def test_complex_roots_quartic(self):
        rts = complex_roots(P(-1, 0, 0, 0, 1))
        expect = [-1, -1j, 1j, 1]
        assert len(rts) == 4
        for r, e in zip(rts, expect):
            assert abs(r - e) < 1e-10

    def test_complex_roots_residuals_random(self):
        rng = random.Random(11)
        cs = [Fraction(rng.randint(-50, 50)) for _ in range(12)] + [Fraction(1)]
        f = Poly(cs)
        for r in complex_roots(f):
            val = sum(complex(c) * r ** k for k, c in enumerate(f.coeffs))
            assert abs(val) < 1e-6 * (1 + abs(r)) ** f.degree

    def test_complex_roots_count_matches_degree(self):
        f = P(-2, 1) ** 3 * P(1, 1, 1)
        assert len(complex_roots(f)) == 5


class TestScalars:
    def test_vp_signs(self):
        assert vp(Fraction(12, 5), 2) == 2
        assert vp(Fraction(12, 5), 5) == -1
        assert vp(Fraction(7), 3) == 0

    def test_place_constructors(self):
        assert PlaceQ.archimedean().is_archimedean
        assert PlaceQ.finite(7).p == 7
        with pytest.raises(DegenerateInputError):
            PlaceQ.finite(6)


class TestRatFunc:
    def test_reduction_and_eval(self):
        f = RatFunc(P(0, 1) * P(1, 1), P(1, 1))
        assert f == RatFunc(P(0, 1))
        assert f.eval(Fraction(3)) == 3

    def test_pole_detection(self):
        f = RatFunc(P(1), P(-2, 1))
        assert f.has_pole_at(Fraction(2))
        assert not f.has_pole_at(Fraction(1))
        assert f.eval(Fraction(3)) == 1

    def test_field_arithmetic(self):
        t = RatFunc.t()
        f = (t * t - 1) / (t - 1)
        assert f == t + 1


class TestAlgebraic:
    def test_sqrt2_arithmetic(self):
        a = AlgebraicElement.generator(P(-2, 0, 1))
        assert a * a == AlgebraicElement.from_rat(P(-2, 0, 1), Fraction(2))
        inv = 1 / a
        assert a * inv == AlgebraicElement.from_rat(P(-2, 0, 1), Fraction(1))

    def test_inverse_of_linear_combination(self):
        mp = P(-2, 0, 1)
        x = AlgebraicElement(mp, [Fraction(1), Fraction(1)])   # 1 + sqrt2
        y = x.inverse()
        assert x * y == AlgebraicElement.from_rat(mp, Fraction(1))
