import random
from fractions import Fraction

import pytest

from versalnf.expr import MultiPoly, RatFunc, TowerScalar, build_context
from versalnf.pmatrix import ParamMatrix
from versalnf.pvf import PolyVectorField, monomials_of_degree


def random_poly(rng, nvars, max_deg=3, terms=4, coeff_range=6):
    out = {}
    for _ in range(terms):
        e = tuple(rng.randint(0, max_deg) for _ in range(nvars))
        if sum(e) > max_deg + 1:
            e = tuple(0 for _ in range(nvars))
        out[e] = Fraction(rng.randint(-coeff_range, coeff_range), rng.randint(1, 3))
    return MultiPoly(nvars, out)


def random_scalar(ctx, rng, with_radical=True):
    nv = ctx.nvars
    num = random_poly(rng, nv)
    den = random_poly(rng, nv, max_deg=1, terms=2)
    if den.is_zero():
        den = MultiPoly.const(nv, 1)
    coords = {0: RatFunc(num, den)}
    if with_radical and ctx.tower and rng.random() < 0.5:
        coords[1] = RatFunc(random_poly(rng, nv, max_deg=1, terms=2))
    return TowerScalar(ctx, coords)


def random_rational_matrix(ctx, rng, n, lo=-4, hi=4):
    ents = [TowerScalar.const(ctx, Fraction(rng.randint(lo, hi), rng.randint(1, 3)))
            for _ in range(n * n)]
    return ParamMatrix(ctx, n, n, ents)


def random_field(ctx, rng, dim, grades, density=0.4, coeff_range=4):
    f = PolyVectorField.zero(ctx, dim)
    for g in grades:
        for e in monomials_of_degree(dim, g + 1):
            for i in range(dim):
                if rng.random() < density:
                    f = f + PolyVectorField.single(
                        ctx, dim, e, i, Fraction(rng.randint(-coeff_range, coeff_range)))
    return f


@pytest.fixture(scope="session")
def plain_ctx():
    return build_context(params=[])


@pytest.fixture(scope="session")
def rng():
    return random.Random(987123)
