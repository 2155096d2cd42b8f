import random
from fractions import Fraction

import pytest

from versalnf.expr import (
    BranchPointError,
    TowerScalar,
    build_context,
    laurent_coeffs,
    parse_expression,
    series_expand,
)
from versalnf.expr.series import value_at_zero


@pytest.fixture(scope="module")
def l4_ctx():
    return build_context(params=["eps"], radicals=[
        ("sqrt2", "2"),
        ("alpha1", "-(3*eps-6+4*sqrt2)*(3*eps+6+4*sqrt2)"),
        ("alpha2", "4+2*alpha1"),
    ])


def test_constant_series():
    ctx = build_context(params=["eps"])
    c5 = TowerScalar.const(ctx, 5)
    ser = series_expand(c5, "eps", 3)
    assert (ser[0] - c5).is_zero()
    assert all(c.is_zero() for c in ser[1:])


def test_selected_root_expansions(l4_ctx):
    epsN = parse_expression("1/4 - alpha1/8", l4_ctx)
    ser = series_expand(epsN, "eps", 2)
    assert ser[0].is_zero()
    assert (ser[1] - parse_expression("3*sqrt2/4", l4_ctx)).is_zero()
    assert (ser[2] - parse_expression("81/32", l4_ctx)).is_zero()
    epsS = parse_expression("(sqrt2 - alpha2/2)/2", l4_ctx)
    ser = series_expand(epsS, "eps", 2)
    assert ser[0].is_zero()
    assert (ser[1] - parse_expression("3/4", l4_ctx)).is_zero()
    assert (ser[2] - parse_expression("99*sqrt2/64", l4_ctx)).is_zero()


def test_pole_and_branch_errors(l4_ctx):
    ctx = build_context(params=["eps"])
    with pytest.raises(BranchPointError):
        series_expand(parse_expression("1/eps", ctx), "eps", 2)
    vctx = build_context(params=["eps"], radicals=[("r", "eps")])
    with pytest.raises(BranchPointError):
        series_expand(parse_expression("r", vctx), "eps", 2)


def test_laurent_orders():
    ctx = build_context(params=["eps"])
    s = parse_expression("(1+eps)/(eps^2)", ctx)
    ser = laurent_coeffs(s, "eps", 1)
    assert (ser[-2] - TowerScalar.one(ctx)).is_zero()
    assert (ser[-1] - TowerScalar.one(ctx)).is_zero()
    assert 0 not in ser and 1 not in ser


def test_series_matches_numeric_evaluation(l4_ctx):
    rng = random.Random(3)
    exprs = [
        "1/4 - alpha1/8",
        "(sqrt2 - alpha2/2)/2",
        "(1+eps*sqrt2)/(2-eps) + alpha1*eps",
    ]
    order = 4
    for text in exprs:
        s = parse_expression(text, l4_ctx)
        coeffs = series_expand(s, "eps", order)
        for h in (1e-2, 1e-3):
            exact = s.eval_numeric({"eps": h})
            approx = sum(c.eval_numeric({}) * h ** k for k, c in enumerate(coeffs))
            assert abs(exact - approx) / h ** (order + 1) < 1e4


def test_value_at_zero_handles_coordinate_collapse(l4_ctx):
    # (alpha1 - 2)/eps is bounded at 0 although each tower coordinate
    # of the reduced fraction has a pole there
    s = parse_expression("(alpha1 - 2)/eps", l4_ctx)
    v = value_at_zero(s, "eps")
    assert (v - parse_expression("-6*sqrt2", l4_ctx)).is_zero()
