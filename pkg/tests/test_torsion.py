"""Torsion parameters: exact polynomials, root sets, common torsion."""

from fractions import Fraction

import pytest

from hauteur.errors import DegenerateInputError
from hauteur.heights_ff import cleared_section
from hauteur.torsion import (
    common_torsion,
    exact_order_at,
    exact_order_polynomial,
    iterate_x_map,
    rational_torsion_parameters,
    torsion_csv,
    torsion_parameters,
    torsion_parameters_all,
    torsion_polynomial,
)

EXPECTED_DEGREES = {1: 1, 2: 4, 3: 24, 4: 96, 5: 384}
EXPECTED_DISTINCT = {1: 1, 2: 2, 3: 12, 4: 48, 5: 192}


@pytest.fixture(scope="module")
def sets_to_5(legendre, x2):
    """Torsion sets for levels 1..5, computed once for the module."""
    return torsion_parameters_all(legendre, x2, 5)


class TestExactPolynomials:
    def test_iterate_nesting(self, legendre, x2):
        # B_{n-1} divides B_n after striking singular factors
        p3 = torsion_polynomial(legendre, x2, 3)
        p2 = torsion_polynomial(legendre, x2, 2)
        q = p3.divexact(p2)
        assert q.degree == p3.degree - p2.degree

    def test_exact_order_degrees(self, legendre, x2):
        for n, deg in EXPECTED_DEGREES.items():
            assert exact_order_polynomial(legendre, x2, n).degree == deg

    def test_levels_3_plus_are_squares(self, legendre, x2):
        for n in (3, 4, 5):
            e = exact_order_polynomial(legendre, x2, n)
            assert e.primitive().exact_sqrt() is not None

    def test_iterate_value_at_generic_t(self, legendre, x2):
        # A_n/B_n evaluated at a rational t equals the duplicated fiber point
        A, B = iterate_x_map(legendre, x2, 1)
        t0 = Fraction(3)
        E0 = legendre.specialize(t0)
        dup = E0.duplication_map()
        expect = dup.eval_phi(Fraction(2)) / dup.eval_psi(Fraction(2))
        num = sum(Fraction(int(c)) * t0 ** k for k, c in enumerate(A.coeffs))
        den = sum(Fraction(int(c)) * t0 ** k for k, c in enumerate(B.coeffs))
        assert num / den == expect


class TestTorsionSets:
    def test_counts_and_multiplicities(self, sets_to_5):
        for n, ts in enumerate(sets_to_5, start=1):
            assert ts.mode == "exact" and ts.complete
            assert ts.count_distinct == EXPECTED_DISTINCT[n]
            assert ts.count_with_multiplicity == EXPECTED_DEGREES[n]
            if n >= 2:
                assert set(ts.exact_order_multiplicities) == {2}

    def test_rational_parameters(self, sets_to_5):
        assert sets_to_5[0].rational_roots == (Fraction(2),)
        assert sets_to_5[1].rational_roots == (Fraction(4, 3), Fraction(4))
        for n in (3, 4, 5):
            assert sets_to_5[n - 1].rational_roots == ()

    def test_inherited_roots_accumulate(self, sets_to_5):
        ts = sets_to_5[2]
        assert len(ts.roots) == sum(EXPECTED_DISTINCT[k] for k in (1, 2, 3))

    def test_conjugation_symmetry(self, sets_to_5):
        for ts in sets_to_5[2:4]:
            pts = list(ts.exact_order_roots)
            for z in pts:
                partner = min(abs(w - z.conjugate()) / (1 + abs(z))
                              for w in pts)
                assert partner < 1e-8

    def test_rational_scan_matches_root_sets(self, legendre, x2):
        rat = rational_torsion_parameters(legendre, x2, 4)
        assert rat[1] == (Fraction(2),)
        assert rat[2] == (Fraction(4, 3), Fraction(4))
        assert rat[3] == () and rat[4] == ()

    def test_invalid_level(self, legendre, x2):
        with pytest.raises(DegenerateInputError):
            torsion_parameters(legendre, x2, 0)

    def test_csv_shape(self, legendre, x2):
        ts = torsion_parameters(legendre, x2, 2)
        lines = torsion_csv(ts).strip().split("\n")
        assert lines[0] == "n,re,im,exact_order_flag,multiplicity,rational_certified_flag"
        assert len(lines) == 1 + len(ts.roots)


class TestExactOrderAt:
    def test_known_orders(self, legendre, x2):
        cs = cleared_section(legendre, x2)
        assert exact_order_at(cs, Fraction(2), 3) == 1
        assert exact_order_at(cs, Fraction(4), 3) == 2
        assert exact_order_at(cs, Fraction(4, 3), 3) == 2

    def test_generic_t_is_not_torsion(self, legendre, x2):
        cs = cleared_section(legendre, x2)
        assert exact_order_at(cs, Fraction(3), 5) is None

    def test_singular_t_rejected(self, legendre, x2):
        cs = cleared_section(legendre, x2)
        assert exact_order_at(cs, Fraction(0), 3) is None
        assert exact_order_at(cs, Fraction(1), 3) is None


class TestCommonTorsion:
    def test_distinct_sections_share_nothing(self, legendre, x2, x5):
        assert common_torsion(legendre, x2, legendre, x5, 4) == []

    def test_self_comparison_is_total(self, legendre, x2):
        res = common_torsion(legendre, x2, legendre, x2, 3)
        assert len(res) == 3
        assert all(r["total"] for r in res)

    def test_gcd_degrees_match_torsion_polys(self, legendre, x2):
        res = common_torsion(legendre, x2, legendre, x2, 2)
        for r in res:
            assert r["gcd_degree"] == torsion_polynomial(legendre, x2, r["level"]).degree
