import random
from fractions import Fraction

import pytest

from versalnf.expr.polynomial import (
    MultiPoly,
    RatFunc,
    fraction_sqrt,
    poly_divexact,
    poly_gcd,
    poly_sqrt,
)
from conftest import random_poly


def test_basic_arithmetic():
    x = MultiPoly.variable(2, 0)
    y = MultiPoly.variable(2, 1)
    p = (x + y) * (x - y)
    assert p == x * x - y * y
    assert (p - p).is_zero()
    assert (x + y) ** 2 == x * x + 2 * x * y + y * y


def test_grlex_leading():
    x = MultiPoly.variable(2, 0)
    y = MultiPoly.variable(2, 1)
    p = x * y + y ** 3 + x
    e, c = p.leading()
    assert e == (0, 3) and c == 1  # total degree wins


def test_divexact_and_failure():
    x = MultiPoly.variable(2, 0)
    y = MultiPoly.variable(2, 1)
    a = (x + y) * (x * x + MultiPoly.const(2, 3))
    assert poly_divexact(a, x + y) == x * x + MultiPoly.const(2, 3)
    with pytest.raises(ValueError):
        poly_divexact(x * x + MultiPoly.const(2, 1), x + y)


def test_gcd_randomized():
    rng = random.Random(5)
    for _ in range(40):
        nv = rng.choice([1, 2, 3])
        g = random_poly(rng, nv, max_deg=2, terms=2)
        if g.is_zero():
            g = MultiPoly.const(nv, 1)
        a = g * random_poly(rng, nv, max_deg=2, terms=2)
        b = g * random_poly(rng, nv, max_deg=2, terms=2)
        d = poly_gcd(a, b)
        if a.is_zero() and b.is_zero():
            assert d.is_zero()
            continue
        # d divides both and is divisible by g
        if not a.is_zero():
            poly_divexact(a, d)
        if not b.is_zero():
            poly_divexact(b, d)
        if not g.is_zero() and not d.is_zero():
            poly_divexact(d, poly_gcd(d, g))


def test_poly_sqrt():
    x = MultiPoly.variable(2, 0)
    y = MultiPoly.variable(2, 1)
    p = (x + 2 * y) ** 2
    s = poly_sqrt(p)
    assert s is not None and (s == x + 2 * y or s == -(x + 2 * y))
    assert poly_sqrt(x * y) is None
    assert fraction_sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert fraction_sqrt(Fraction(2)) is None


def test_ratfunc_canonical():
    x = MultiPoly.variable(1, 0)
    one = MultiPoly.const(1, 1)
    f = RatFunc(x * x - one, x - one)  # reduces to x + 1
    assert f.num == x + one and f.den == one
    g = RatFunc(x, x * 2)
    assert g.num == MultiPoly.const(1, Fraction(1, 2)) and g.den == one
    assert (f - f).is_zero()
    assert (f / f - RatFunc.const(1, 1)).is_zero()
