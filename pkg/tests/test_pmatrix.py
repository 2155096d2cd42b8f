import random
from fractions import Fraction

import pytest

from versalnf.expr import TowerScalar, build_context, parse_expression
from versalnf.pmatrix import (
    AffineSolutionFamily,
    LinearSolveError,
    ParamMatrix,
    charpoly,
    conjugacy_solve,
    det,
    inverse,
    matrix_eval,
    solve_linear,
)
from conftest import random_rational_matrix


def _cofactor_det(M):
    """Independent determinant oracle by Laplace expansion."""
    n = M.rows
    if n == 1:
        return M.at(0, 0)
    total = TowerScalar.zero(M.ctx)
    for j in range(n):
        sub = [[M.at(i, k) for k in range(n) if k != j] for i in range(1, n)]
        minor = ParamMatrix(M.ctx, n - 1, n - 1, [e for row in sub for e in row])
        term = M.at(0, j) * _cofactor_det(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def test_charpoly_zero_matrix():
    ctx = build_context(params=[])
    cp = charpoly(ParamMatrix.zero(ctx, 2, 2))
    assert cp.degree == 2
    assert all(d.is_zero() for d in cp.deltas)


def test_charpoly_2d_deformed():
    ctx = build_context(params=["eps", "m11", "m12", "m22"])
    X = ParamMatrix.from_rows(ctx, [["eps*m11", "eps*m12"], ["-1", "eps*m22"]])
    cp = charpoly(X)
    assert (cp.delta(1) - parse_expression("eps*(m11+m22)", ctx)).is_zero()
    assert (cp.delta(2) - parse_expression("eps^2*m22*m11 + eps*m12", ctx)).is_zero()


def test_charpoly_l4():
    ctx = build_context(params=["eps"], radicals=[("sqrt2", "2")])
    s0 = ParamMatrix.from_rows(ctx, [["0", "-sqrt2/2", "0", "0"], ["sqrt2/2", "0", "0", "0"],
                                     ["0", "0", "0", "-sqrt2/2"], ["0", "0", "sqrt2/2", "0"]])
    n0 = ParamMatrix.from_rows(ctx, [["0", "0", "0", "0"], ["0", "0", "0", "0"],
                                     ["-1", "0", "0", "0"], ["0", "-1", "0", "0"]])
    D = ParamMatrix.from_rows(ctx, [
        ["0", "3/4-3/8*sqrt2", "-3/2+3/4*sqrt2", "0"],
        ["-3/4-3/8*sqrt2", "0", "0", "3/2+3/4*sqrt2"],
        ["-3/8-3/16*sqrt2", "0", "0", "3/4+3/8*sqrt2"],
        ["0", "3/8-3/16*sqrt2", "-3/4+3/8*sqrt2", "0"]])
    X = s0 + n0 + D.scale(parse_expression("eps", ctx))
    cp = charpoly(X)
    assert cp.delta(1).is_zero() and cp.delta(3).is_zero()
    assert (cp.delta(2) - TowerScalar.one(X.ctx)).is_zero()
    tgt = parse_expression("-(3*eps-6+4*sqrt2)*(3*eps+6+4*sqrt2)/16", ctx)
    assert (cp.delta(4) - tgt).is_zero()


def test_charpoly_trace_det_and_conjugation_invariance():
    rng = random.Random(77)
    ctx = build_context(params=[])
    for _ in range(30):
        n = rng.choice([2, 3, 4])
        M = random_rational_matrix(ctx, rng, n)
        cp = charpoly(M)
        assert (cp.delta(1) - M.trace()).is_zero()
        assert (cp.deltas[-1] - _cofactor_det(M)).is_zero()
        while True:
            T = random_rational_matrix(ctx, rng, n, -2, 2)
            if not det(T).is_zero():
                break
        M2 = inverse(T) * M * T
        cp2 = charpoly(M2)
        assert all((a - b).is_zero() for a, b in zip(cp.deltas, cp2.deltas))


def test_cayley_hamilton():
    rng = random.Random(78)
    ctx = build_context(params=["t"])
    M = random_rational_matrix(ctx, rng, 3)
    M = M.with_entry(0, 1, parse_expression("t", ctx))
    cp = charpoly(M)
    assert cp.eval_matrix(M).is_zero()


def test_solve_identity():
    ctx = build_context(params=[])
    I = ParamMatrix.identity(ctx, 3)
    b = [TowerScalar.const(ctx, k) for k in (1, 2, 3)]
    fam = solve_linear(I.to_lists(), b, ctx)
    assert fam.num_free == 0
    assert all((x - y).is_zero() for x, y in zip(fam.particular, b))


def test_solve_residual_random_invertible():
    rng = random.Random(79)
    ctx = build_context(params=["eps"])
    for _ in range(5):
        n = 5
        A = [[parse_expression(f"{rng.randint(-4, 4)} + {rng.randint(0, 2)}*eps", ctx)
              for _ in range(n)] for _ in range(n)]
        b = [parse_expression(f"{rng.randint(-3, 3)}*eps + {rng.randint(-2, 2)}", ctx)
             for _ in range(n)]
        try:
            fam = solve_linear(A, b, ctx)
        except LinearSolveError:
            continue
        if fam.num_free:
            continue
        x = fam.particular
        for i in range(n):
            acc = TowerScalar.zero(ctx)
            for j in range(n):
                acc = acc + A[i][j] * x[j]
            assert (acc - b[i]).is_zero()


def test_solve_inconsistent_reports_row():
    ctx = build_context(params=[])
    A = [[TowerScalar.one(ctx), TowerScalar.one(ctx)],
         [TowerScalar.one(ctx), TowerScalar.one(ctx)]]
    b = [TowerScalar.const(ctx, 1), TowerScalar.const(ctx, 2)]
    with pytest.raises(LinearSolveError):
        solve_linear(A, b, ctx)


def test_family_members_solve_identically():
    ctx = build_context(params=["p"])
    # underdetermined: x + p*y = p
    A = [[TowerScalar.one(ctx), parse_expression("p", ctx)]]
    b = [parse_expression("p", ctx)]
    fam = solve_linear(A, b, ctx)
    assert fam.num_free == 1
    member = fam.member({fam.free_names[0]: parse_expression("1+p", ctx)})
    acc = member[0] + parse_expression("p", ctx) * member[1]
    assert (acc - b[0]).is_zero()


def test_conjugacy_identity():
    ctx = build_context(params=["a", "b"])
    X = ParamMatrix.from_rows(ctx, [["a", "1"], ["0", "b"]])
    fam = conjugacy_solve(X, X)
    n = 2
    found_identity = False
    # identity must be a member for some free assignment; check I solves
    I = ParamMatrix.identity(ctx, n)
    assert (X * I - I * X).is_zero()
    # and the family is nonempty with symbolic zero residual for the
    # zero-assignment member
    T = ParamMatrix(ctx, n, n, fam.member())
    assert (X * T - T * X).is_zero()


def test_matrix_eval_product_oracle():
    import numpy as np
    rng = random.Random(80)
    ctx = build_context(params=["x"])
    A = ParamMatrix.from_rows(ctx, [[f"{rng.randint(-3,3)}+x" for _ in range(3)] for _ in range(3)])
    B = ParamMatrix.from_rows(ctx, [[f"{rng.randint(-3,3)}*x" for _ in range(3)] for _ in range(3)])
    assign = {"x": 0.7}
    lhs = np.array(matrix_eval(A * B, assign))
    rhs = np.array(matrix_eval(A, assign)) @ np.array(matrix_eval(B, assign))
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_matrix_eval_pipe_center():
    ctx = build_context(params=["eps", "p1", "p2"], radicals=[("sqrt3", "3")])
    ctx = ctx.with_radical("rho", parse_expression("(4+eps*p1)*(3+4*eps*p2)/16", ctx))
    X = ParamMatrix.from_rows(ctx, [
        ["0", "rho", "1", "0"], ["-rho", "0", "0", "1"],
        ["eps*p1-rho^2+3", "0", "0", "rho"], ["0", "4*eps*p1-rho^2", "-rho", "0"]])
    vals = matrix_eval(X, {"eps": 0.0, "p1": 0.37, "p2": -1.2})
    r = 3 ** 0.5 / 2
    expect = [[0, r, 1, 0], [-r, 0, 0, 1], [9 / 4, 0, 0, r], [0, -3 / 4, -r, 0]]
    for i in range(4):
        for j in range(4):
            assert vals[i][j] == pytest.approx(expect[i][j], abs=1e-12)
