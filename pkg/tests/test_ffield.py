import math
import random

import pytest

from contactk.errors import DimensionError, ParameterError
from contactk.ffield import Fp, binom_mod_p, is_prime, unit_multi


def test_modulus_validation():
    for bad in (0, 1, 2, 3, 4, 6, 9, 15):
        with pytest.raises(ParameterError):
            Fp(bad)
    for good in (5, 7, 11, 101):
        assert Fp(good).p == good


def test_is_prime_small():
    primes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41}
    for n in range(2, 42):
        assert is_prime(n) == (n in primes)


@pytest.mark.parametrize("p", [5, 7])
def test_field_axioms_exhaustive(p):
    fp = Fp(p)
    for a in range(p):
        for b in range(p):
            assert fp.add(a, b) == (a + b) % p
            assert fp.mul(a, b) == (a * b) % p
            assert fp.sub(a, b) == (a - b) % p
            for c in range(p):
                assert fp.mul(a, fp.add(b, c)) == fp.add(fp.mul(a, b), fp.mul(a, c))
        assert fp.add(a, fp.neg(a)) == 0
        if a:
            assert fp.mul(a, fp.inv(a)) == 1
    with pytest.raises(ZeroDivisionError):
        fp.inv(0)


def test_binom_trivial_empty_product():
    fp = Fp(5)
    assert fp.multi_binom((0, 0, 0), (0, 0, 0)) == 1


def test_binom_direct_value():
    # C(4,2) = 6 = 1 mod 5
    fp = Fp(5)
    assert fp.multi_binom((4, 0, 0), (2, 0, 0)) == 1


def test_binom_rejects_length_mismatch():
    fp = Fp(5)
    with pytest.raises(DimensionError):
        fp.multi_binom((1, 2), (1, 2, 3))


def test_binom_overflowing_coordinate_vanishes():
    # with heights 1 the bound is p-1; alpha_i + beta_i >= p forces zero
    fp = Fp(5)
    for a in range(5):
        for b in range(5):
            if a + b >= 5:
                assert fp.binom(a + b, a) == 0


def test_binom_against_integer_oracle():
    rng = random.Random(0)
    fp = Fp(5)
    for _ in range(2000):
        n = rng.randrange(0, 60)
        k = rng.randrange(0, 60)
        assert fp.binom(n, k) == math.comb(n, k) % 5 if k <= n else fp.binom(n, k) == 0
    fp7 = Fp(7)
    for _ in range(2000):
        n = rng.randrange(0, 400)
        k = rng.randrange(0, 400)
        expect = math.comb(n, k) % 7 if k <= n else 0
        assert fp7.binom(n, k) == expect


def test_multi_binom_symmetry():
    rng = random.Random(1)
    fp = Fp(5)
    for _ in range(500):
        alpha = tuple(rng.randrange(0, 10) for _ in range(3))
        beta = tuple(rng.randrange(0, 10) for _ in range(3))
        ab = tuple(a + b for a, b in zip(alpha, beta))
        assert fp.multi_binom(ab, alpha) == fp.multi_binom(ab, beta)


def test_multi_binom_matches_product_oracle():
    rng = random.Random(2)
    fp = Fp(5)
    for _ in range(500):
        alpha = tuple(rng.randrange(0, 8) for _ in range(4))
        beta = tuple(rng.randrange(0, 8) for _ in range(4))
        expect = 1
        for a, b in zip(alpha, beta):
            expect = expect * (math.comb(a, b) if b <= a else 0) % 5
        assert binom_mod_p(fp, alpha, beta) == expect


def test_unit_multi():
    assert unit_multi(3, 1) == (1, 0, 0)
    assert unit_multi(3, 3) == (0, 0, 1)
    with pytest.raises(IndexError):
        unit_multi(3, 4)
