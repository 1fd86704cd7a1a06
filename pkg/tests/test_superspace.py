import itertools
import random

import pytest

from contactk.errors import ParameterError
from contactk.superspace import Element, Monomial, Space, elem_mul, partial


@pytest.fixture(scope="module")
def sp():
    return Space(3, 2, (1, 1, 1), 5)


@pytest.fixture(scope="module")
def basis(sp):
    return list(sp.basis())


def test_shape_validation():
    with pytest.raises(ParameterError):
        Space(4, 2, (1, 1, 1, 1), 5)
    with pytest.raises(ParameterError):
        Space(3, 3, (1, 1, 1), 5)
    with pytest.raises(ParameterError):
        Space(3, 2, (1, 1), 5)
    with pytest.raises(ParameterError):
        Space(3, 2, (1, 1, 1), 4)
    with pytest.raises(ParameterError):
        Space(1, 2, (1,), 5)


def test_dimensions(sp, basis):
    assert sp.dim == 500
    assert len(basis) == 500
    assert len(set(basis)) == 500
    # lexicographic in (alpha, umask)
    assert basis == sorted(basis)


def test_mono_mul_divided_power(sp):
    x1 = sp.variable(1)
    assert sp.mono_mul(x1, x1) == (2, Monomial((2, 0, 0), 0))


def test_mono_mul_anticommutes(sp):
    x4, x5 = sp.variable(4), sp.variable(5)
    c45 = sp.mono_mul(x4, x5)
    c54 = sp.mono_mul(x5, x4)
    assert c45 == (1, Monomial((0, 0, 0), 0b11))
    assert c54 == (4, Monomial((0, 0, 0), 0b11))
    assert sp.mono_mul(x4, x4) is None


def test_elem_mul_unit(sp, basis):
    one = Element.one(sp)
    for mono in basis[::37]:
        g = Element.from_monomial(sp, mono)
        assert elem_mul(one, g) == g


def test_elem_mul_odd_square_vanishes(sp):
    f = Element.from_monomial(sp, sp.variable(4)) + Element.from_monomial(sp, sp.variable(5))
    assert elem_mul(f, f).is_zero()


def test_elem_mul_mixed_sum(sp):
    f = Element.from_monomial(sp, sp.variable(1)) + Element.from_monomial(sp, sp.variable(2))
    g = Element.from_monomial(sp, sp.variable(1))
    out = elem_mul(f, g)
    assert out.terms == {
        Monomial((2, 0, 0), 0): 2,
        Monomial((1, 1, 0), 0): 1,
    }


def test_partial_examples(sp):
    d1 = partial(1, Element.from_monomial(sp, Monomial((2, 0, 0), 0)))
    assert d1.terms == {Monomial((1, 0, 0), 0): 1}
    x4x5 = Element.from_monomial(sp, Monomial((0, 0, 0), 0b11))
    assert partial(4, x4x5).terms == {Monomial((0, 0, 0), 0b10): 1}
    # x5*x4 = -x4x5, so its d4-derivative is -x5
    x5x4 = elem_mul(
        Element.from_monomial(sp, sp.variable(5)),
        Element.from_monomial(sp, sp.variable(4)),
    )
    assert partial(4, x5x4).terms == {Monomial((0, 0, 0), 0b10): 4}
    assert partial(5, Element.from_monomial(sp, sp.variable(1))).is_zero()
    with pytest.raises(IndexError):
        partial(6, x4x5)


def test_grade_examples(sp):
    g = sp.grade(sp.unit)
    assert (g.parity, g.k_degree) == (0, -2)
    g = sp.grade(sp.variable(4))
    assert (g.parity, g.k_degree) == (1, -1)
    g = sp.grade(sp.variable(3))
    assert (g.parity, g.k_degree) == (0, 0)


def _mul_dict(sp, a, b):
    hit = sp.mono_mul(a, b)
    return {} if hit is None else {hit[1]: hit[0]}


def test_associativity_exhaustive_small(sp):
    small = [
        mono
        for mono in sp.basis()
        if sum(mono.alpha) <= 2
    ]
    assert len(small) == 40
    for a, b, c in itertools.product(small, repeat=3):
        left = Element(sp, _mul_dict(sp, a, b)) * Element.from_monomial(sp, c)
        right = Element.from_monomial(sp, a) * Element(sp, _mul_dict(sp, b, c))
        assert left == right


def test_associativity_random_full(sp, basis):
    rng = random.Random(0)
    for _ in range(100_000):
        a, b, c = (basis[rng.randrange(500)] for _ in range(3))
        left = Element(sp, _mul_dict(sp, a, b)) * Element.from_monomial(sp, c)
        right = Element.from_monomial(sp, a) * Element(sp, _mul_dict(sp, b, c))
        assert left == right


def test_super_commutativity_exhaustive(sp, basis):
    for a in basis:
        pa = sp.parity(a)
        for b in basis:
            ab = _mul_dict(sp, a, b)
            ba = _mul_dict(sp, b, a)
            sign = -1 if pa and sp.parity(b) else 1
            assert ab == {m: sign * c % 5 for m, c in ba.items()}


def test_partials_super_commute(sp, basis):
    for i in range(1, 6):
        for j in range(1, 6):
            sign = -1 if i > 3 and j > 3 else 1
            for mono in basis:
                f = Element.from_monomial(sp, mono)
                lhs = partial(i, partial(j, f))
                rhs = partial(j, partial(i, f)).scaled(sign)
                assert lhs == rhs


def test_leibniz_exhaustive(sp, basis):
    # d_i(fg) = d_i(f) g + (-1)^{p(d_i)p(f)} f d_i(g) over all basis pairs
    for i in (1, 3, 4):
        odd_i = i > 3
        for a in basis:
            fa = Element.from_monomial(sp, a)
            da = partial(i, fa)
            sign = -1 if odd_i and sp.parity(a) else 1
            for b in basis:
                fb = Element.from_monomial(sp, b)
                lhs = partial(i, fa * fb)
                rhs = da * fb + (fa * partial(i, fb)).scaled(sign)
                assert lhs == rhs


def test_degree_additive_on_products(sp, basis):
    for a in basis[::7]:
        for b in basis[::11]:
            hit = sp.mono_mul(a, b)
            if hit is None:
                continue
            assert sp.k_degree(hit[1]) == sp.k_degree(a) + sp.k_degree(b) + 2
