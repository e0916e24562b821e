"""Integer polynomial layer: Kronecker products, exact square roots, mod-p."""

import random

import numpy as np
import pytest

from hauteur.errors import DegenerateInputError
from hauteur.zpoly import (
    ZPoly,
    modp_divmod,
    modp_gcd,
    modp_mul,
    modp_trim,
)


def rand_zpoly(rng, deg, bound=10 ** 6):
    cs = [rng.randint(-bound, bound) for _ in range(deg)] + [rng.randint(1, bound)]
    return ZPoly(cs)


class TestArithmetic:
    def test_kronecker_matches_schoolbook(self):
        rng = random.Random(3)
        for _ in range(10):
            a = rand_zpoly(rng, rng.randint(0, 40), 10 ** 30)
            b = rand_zpoly(rng, rng.randint(0, 40), 10 ** 30)
            assert (a * b).coeffs == a._mul_schoolbook(b).coeffs

    def test_content_and_primitive(self):
        z = ZPoly([6, -12, 18])
        assert z.content() == 6
        assert z.primitive().coeffs == (1, -2, 3)

    def test_divexact_roundtrip(self):
        rng = random.Random(5)
        for _ in range(10):
            a = rand_zpoly(rng, 7)
            b = rand_zpoly(rng, 5)
            assert (a * b).divexact(b).coeffs == a.coeffs
        with pytest.raises(DegenerateInputError):
            ZPoly([1, 1]).divexact(ZPoly([0, 1]))

    def test_eval_matches_horner(self):
        z = ZPoly([3, -1, 0, 2])
        assert z(5) == 3 - 5 + 2 * 125


class TestExactSqrt:
    def test_random_perfect_squares(self):
        rng = random.Random(17)
        for _ in range(30):
            a = rand_zpoly(rng, rng.randint(1, 15), 10 ** 12)
            sq = (a * a).exact_sqrt()
            assert sq is not None
            assert (sq * sq).coeffs == (a * a).coeffs

    def test_non_squares_rejected(self):
        assert ZPoly([0, 1]).exact_sqrt() is None          # odd degree
        assert ZPoly([1, 1, 1]).exact_sqrt() is None        # not a square
        assert ZPoly([-1, 0, -1, 0, -1]).exact_sqrt() is None   # negative lead

    def test_constant_square(self):
        sq = ZPoly([49]).exact_sqrt()
        assert sq is not None and abs(int(sq.coeffs[0])) == 7


class TestModP:
    P = 1048573

    def test_mul_matches_exact(self):
        rng = random.Random(23)
        for _ in range(10):
            a = rand_zpoly(rng, 12)
            b = rand_zpoly(rng, 9)
            am = modp_trim(a.mod_small_prime(self.P), self.P)
            bm = modp_trim(b.mod_small_prime(self.P), self.P)
            prod = modp_mul(am, bm, self.P)
            exact = modp_trim((a * b).mod_small_prime(self.P), self.P)
            assert np.array_equal(prod, exact)

    def test_divmod_identity(self):
        rng = random.Random(29)
        a = rand_zpoly(rng, 14).mod_small_prime(self.P)
        b = rand_zpoly(rng, 6).mod_small_prime(self.P)
        a, b = modp_trim(a, self.P), modp_trim(b, self.P)
        q, r = modp_divmod(a, b, self.P)
        back = modp_mul(q, b, self.P)
        if len(r):
            pad = np.zeros(len(back), dtype=back.dtype)
            pad[: len(r)] = r
            back = (back + pad) % self.P
        assert np.array_equal(modp_trim(back, self.P), a)

    def test_gcd_finds_common_factor(self):
        rng = random.Random(31)
        g = rand_zpoly(rng, 4)
        a = (g * rand_zpoly(rng, 5))
        b = (g * rand_zpoly(rng, 6))
        am = modp_trim(a.mod_small_prime(self.P), self.P)
        bm = modp_trim(b.mod_small_prime(self.P), self.P)
        got = modp_gcd(am, bm, self.P)
        assert len(got) - 1 >= 4
