"""Function-field heights: divisors, degrees, quasi-triviality."""

from fractions import Fraction

import pytest

from hauteur.errors import HauteurError
from hauteur.heights_ff import (
    cleared_section,
    divisor_DEP,
    ff_canonical_height,
    ff_escape_rate_ord,
    quasi_triviality_check,
)


class TestDivisor:
    def test_silverman_golden_divisor(self, silverman_curve):
        D = divisor_DEP(silverman_curve, Fraction(0))
        got = {str(e.point): Fraction(e.coefficient) for e in D.entries}
        assert got == {
            "-1": Fraction(1, 6),
            "-2/27": Fraction(1, 12),
            "0": Fraction(-11, 60),
        }
        assert D.degree == Fraction(1, 15)

    def test_silverman_degree_equals_height(self, silverman_curve):
        h = ff_canonical_height(silverman_curve, Fraction(0))
        assert h == Fraction(1, 15)
        assert divisor_DEP(silverman_curve, Fraction(0)).degree == h

    def test_legendre_x2_degree_equals_height(self, legendre, x2):
        D = divisor_DEP(legendre, x2)
        h = ff_canonical_height(legendre, x2)
        assert D.degree == h
        assert h > 0

    def test_legendre_x5_degree_equals_height(self, legendre, x5):
        D = divisor_DEP(legendre, x5)
        h = ff_canonical_height(legendre, x5)
        assert D.degree == h

    def test_legendre_support_in_singular_set(self, legendre, x2):
        # support contained in singular parameters {0, 1, infinity} plus the
        # locus where the section meets the zero section (x = 2 is 2-torsion
        # at t = 2)
        D = divisor_DEP(legendre, x2)
        allowed = {"0", "1", "inf", "2"}
        for e in D.entries:
            assert str(e.point) in allowed

    def test_local_coefficients_match_escape_rates(self, legendre, x2):
        cs = cleared_section(legendre, x2)
        D = divisor_DEP(legendre, x2)
        for e in D.entries:
            if e.point.kind != "rational":
                continue
            res = ff_escape_rate_ord(cs, e.point.gamma)
            assert res.exact


class TestQuasiTriviality:
    def test_good_primes_match_reference(self, legendre, x2):
        rep = quasi_triviality_check(legendre, x2, Fraction(3),
                                     primes=[5, 7, 11, 13, 17, 19, 23])
        bad = set(rep["candidate_bad_primes"])
        for p, r in rep["per_prime"].items():
            if p not in bad:
                assert r["equal"], f"prime {p} disagrees unexpectedly"

    def test_silverman_reference(self, silverman_curve):
        rep = quasi_triviality_check(silverman_curve, Fraction(0), Fraction(2),
                                     primes=[5, 11, 13, 17, 19, 23, 29])
        bad = set(rep["candidate_bad_primes"])
        failures = [p for p, r in rep["per_prime"].items()
                    if not r["equal"] and p not in bad]
        assert failures == []
