"""Rational sl2 machinery on matrices.

Jordan-Chevalley splitting via Newton iteration on the squarefree part
of the characteristic polynomial, the Jacobson-Morozov construction of
a triple around a nilpotent element inside the centralizer of the
semisimple part, kernel/image bases of adjoint operators, and the
transport of bilinear forms along transformations.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .expr import Context, ExprError, TowerScalar
from .expr.polynomial import MultiPoly
from .pmatrix import (
    LinearSolveError,
    ParamMatrix,
    charpoly,
    det,
    inverse,
    solve_linear,
)


class Sl2ConstructionError(ExprError):
    pass


@dataclass
class Sl2Triple:
    """(n0, h0, m0) with h0 = [m0, n0], [h0, m0] = 2 m0, [h0, n0] = -2 n0,
    plus the commuting semisimple part s0 of the organizing center."""
    s0: ParamMatrix
    n0: ParamMatrix
    h0: ParamMatrix
    m0: ParamMatrix

    @property
    def dim(self) -> int:
        return self.n0.rows

    @property
    def ctx(self) -> Context:
        return self.n0.ctx

    def relation_residuals(self) -> Dict[str, ParamMatrix]:
        s0, n0, h0, m0 = self.s0, self.n0, self.h0, self.m0
        return {
            "s_n_commute": s0.commutator(n0),
            "h_is_bracket": m0.commutator(n0) - h0,
            "h_m_relation": h0.commutator(m0) - m0.scale(2),
            "h_n_relation": h0.commutator(n0) + n0.scale(2),
            "n_nilpotent": n0.power(self.dim),
            "m_nilpotent": m0.power(self.dim),
        }

    def validate(self) -> None:
        for name, res in self.relation_residuals().items():
            if not res.is_zero():
                raise Sl2ConstructionError(f"sl2 relation violated: {name}")


@dataclass
class AdOperator:
    """Matrix of Y -> [base, Y] on n x n matrices in the unit basis (row-major)."""
    base: ParamMatrix
    matrix_rep: ParamMatrix


@dataclass
class SymplecticContext:
    omega: ParamMatrix

    def validate(self) -> None:
        if not (self.omega.transpose() + self.omega).is_zero():
            raise ExprError("form is not antisymmetric")
        if det(self.omega).is_zero():
            raise ExprError("form is degenerate")


def ad_matrix(base: ParamMatrix) -> ParamMatrix:
    """n^2 x n^2 matrix of the adjoint action on vectorized (row-major) matrices."""
    n = base.rows
    ctx = base.ctx
    zero = TowerScalar.zero(ctx)
    ents = [zero] * (n * n * n * n)
    N = n * n
    for i in range(n):
        for j in range(n):
            r = i * n + j
            for k in range(n):
                # [B, Y]_{ij} = sum_k B_{ik} Y_{kj} - Y_{ik} B_{kj}
                ents[r * N + (k * n + j)] = ents[r * N + (k * n + j)] + base.at(i, k)
                ents[r * N + (i * n + k)] = ents[r * N + (i * n + k)] - base.at(k, j)
    return ParamMatrix(ctx, N, N, ents)


def ad_operator(base: ParamMatrix) -> AdOperator:
    return AdOperator(base, ad_matrix(base))


def vec(M: ParamMatrix) -> List[TowerScalar]:
    return list(M.entries)


def unvec(ctx: Context, n: int, v: List[TowerScalar]) -> ParamMatrix:
    return ParamMatrix(ctx, n, n, v)


# ----------------------------------------------------------------------
# Jordan-Chevalley split
# ----------------------------------------------------------------------

def _charpoly_univar(M: ParamMatrix) -> List[TowerScalar]:
    """Coefficients [c0..cn] of chi(lambda), cn = 1."""
    cp = charpoly(M)
    n = cp.degree
    ctx = M.ctx
    coeffs = [TowerScalar.zero(ctx)] * (n + 1)
    coeffs[n] = TowerScalar.one(ctx)
    for k, d in enumerate(cp.deltas, start=1):
        coeffs[n - k] = d * Fraction((-1) ** k)
    return coeffs


def _poly_eval_matrix(coeffs: List[TowerScalar], M: ParamMatrix) -> ParamMatrix:
    out = ParamMatrix.zero(M.ctx, M.rows, M.cols)
    for c in reversed(coeffs):
        out = out * M + ParamMatrix.identity(M.ctx, M.rows).scale(c)
    return out


def _univar_derivative(coeffs: List[TowerScalar]) -> List[TowerScalar]:
    return [c * k for k, c in enumerate(coeffs)][1:]


def _univar_divmod(a: List[TowerScalar], b: List[TowerScalar], ctx: Context):
    a = list(a)
    def deg(p):
        d = len(p) - 1
        while d >= 0 and p[d].is_zero():
            d -= 1
        return d
    da, db = deg(a), deg(b)
    if db < 0:
        raise ZeroDivisionError("polynomial division by zero")
    q = [TowerScalar.zero(ctx)] * max(0, da - db + 1)
    inv_lead = b[db].inverse()
    while da >= db:
        f = a[da] * inv_lead
        q[da - db] = f
        for i in range(db + 1):
            a[da - db + i] = a[da - db + i] - f * b[i]
        a[da] = TowerScalar.zero(ctx)
        da = deg(a)
    return q, a[: db] if db > 0 else []


def _univar_gcd_ts(a: List[TowerScalar], b: List[TowerScalar], ctx: Context) -> List[TowerScalar]:
    def deg(p):
        d = len(p) - 1
        while d >= 0 and p[d].is_zero():
            d -= 1
        return d
    while deg(b) >= 0:
        _, r = _univar_divmod(a, b, ctx)
        a, b = b, r
    d = deg(a)
    if d < 0:
        return a
    inv = a[d].inverse()
    return [c * inv for c in a[: d + 1]]


def sn_split(X00: ParamMatrix) -> Tuple[ParamMatrix, ParamMatrix]:
    """X00 = s0 + n0 with s0 semisimple, n0 nilpotent, [s0, n0] = 0.

    Newton iteration on the squarefree part q of the characteristic
    polynomial: S <- S - q(S) q'(S)^{-1}.  Uses only the characteristic
    polynomial, never eigenvalues.
    """
    if X00.rows != X00.cols:
        raise ValueError("split of a non-square matrix")
    n = X00.rows
    ctx = X00.ctx
    p = _charpoly_univar(X00)
    dp = _univar_derivative(p)
    g = _univar_gcd_ts(p, dp, ctx)
    if len(g) <= 1:
        # already squarefree characteristic polynomial: semisimple
        return X00, ParamMatrix.zero(ctx, n, n)
    q, rem = _univar_divmod(p, g, ctx)
    S = X00
    iterations = max(1, n.bit_length() + 1)
    dq = _univar_derivative(q)
    for _ in range(iterations):
        qS = _poly_eval_matrix(q, S)
        if qS.is_zero():
            break
        dqS = _poly_eval_matrix(dq, S)
        S = S - qS * inverse(dqS)
    if not _poly_eval_matrix(q, S).is_zero():
        raise Sl2ConstructionError("Newton iteration for the semisimple part did not converge")
    return S, X00 - S


# ----------------------------------------------------------------------
# Jacobson-Morozov
# ----------------------------------------------------------------------

def _stack_systems(blocks: List[Tuple[ParamMatrix, List[TowerScalar]]], ctx: Context):
    rows: List[List[TowerScalar]] = []
    rhs: List[TowerScalar] = []
    for mat, b in blocks:
        for i in range(mat.rows):
            rows.append(mat.row(i))
            rhs.append(b[i])
    return rows, rhs


def symplectic_constraint_matrix(omega: ParamMatrix) -> ParamMatrix:
    """Rows of vec(X^t Omega + Omega X) over vec(X) (row-major)."""
    n = omega.rows
    ctx = omega.ctx
    zero = TowerScalar.zero(ctx)
    N = n * n
    ents = [zero] * (N * N)
    for i in range(n):
        for j in range(n):
            r = i * n + j
            for k in range(n):
                ents[r * N + (k * n + i)] = ents[r * N + (k * n + i)] + omega.at(k, j)
                ents[r * N + (k * n + j)] = ents[r * N + (k * n + j)] + omega.at(i, k)
    return ParamMatrix(ctx, N, N, ents)


def jacobson_morozov(s0: ParamMatrix, n0: ParamMatrix,
                     sympl: Optional["SymplecticContext"] = None) -> Sl2Triple:
    """Build an sl2 triple around a nonzero nilpotent n0 inside ker ad(s0)
    (and inside the symplectic algebra of ``sympl`` when supplied).

    First solve ad(n0)^2 z = n0 (with ad(s0) z = 0) and set a provisional
    h from m = -2z; then resolve z against [h, z] = 2z together with
    [n0, z] = h/2, zeroing the remaining free parameters.
    """
    ctx = n0.ctx
    n = n0.rows
    if n0.is_zero():
        raise Sl2ConstructionError("nilpotent part is zero; no triple exists")
    ad_s = ad_matrix(s0)
    ad_n = ad_matrix(n0)
    ad_n2 = ad_n * ad_n
    zero_vec = [TowerScalar.zero(ctx)] * (n * n)
    blocks = [(ad_s, zero_vec), (ad_n2, vec(n0))]
    if sympl is not None:
        omega = sympl.omega.lift_to(ctx) if sympl.omega.ctx != ctx else sympl.omega
        blocks.insert(0, (symplectic_constraint_matrix(omega), zero_vec))
    try:
        rows, rhs = _stack_systems(blocks, ctx)
        fam = solve_linear(rows, rhs, ctx)
    except LinearSolveError as exc:
        raise Sl2ConstructionError("no solution to the double-bracket equation") from exc
    z0 = unvec(ctx, n, fam.member())
    m_prov = z0.scale(-2)
    h_prov = m_prov.commutator(n0)

    # refine: [n0, z] = h/2 and [h, z] = 2z, staying inside ker ad(s0)
    ad_h = ad_matrix(h_prov)
    two_id = ParamMatrix.identity(ctx, n * n).scale(TowerScalar.const(ctx, 2))
    half_h = [e * Fraction(1, 2) for e in vec(h_prov)]
    blocks = [
        (ad_s, zero_vec),
        (ad_n, half_h),
        (ad_h - two_id, zero_vec),
    ]
    if sympl is not None:
        blocks.insert(0, (symplectic_constraint_matrix(omega), zero_vec))
    try:
        rows, rhs = _stack_systems(blocks, ctx)
        fam2 = solve_linear(rows, rhs, ctx)
    except LinearSolveError as exc:
        raise Sl2ConstructionError("no admissible partner for the nilpotent") from exc
    z1 = unvec(ctx, n, fam2.member())
    m0 = z1.scale(-2)
    h0 = m0.commutator(n0)
    triple = Sl2Triple(s0=s0, n0=n0, h0=h0, m0=m0)
    triple.validate()
    return triple


# ----------------------------------------------------------------------
# kernels, images, projections
# ----------------------------------------------------------------------

def nullspace(M: ParamMatrix) -> List[List[TowerScalar]]:
    """Echelon basis of ker M (column vectors)."""
    fam = solve_linear(M.to_lists(), [TowerScalar.zero(M.ctx)] * M.rows, M.ctx)
    return fam.basis


def column_space(M: ParamMatrix) -> List[List[TowerScalar]]:
    """Basis of the column space: the original columns at pivot positions."""
    cols = [[M.at(i, j) for i in range(M.rows)] for j in range(M.cols)]
    basis: List[List[TowerScalar]] = []
    # incremental rank test by re-solving; fine at these sizes
    ctx = M.ctx
    for c in cols:
        if all(x.is_zero() for x in c):
            continue
        if not basis:
            basis.append(c)
            continue
        A = [[basis[k][i] for k in range(len(basis))] for i in range(M.rows)]
        try:
            fam = solve_linear(A, c, ctx)
            dependent = True
        except LinearSolveError:
            dependent = False
        if not dependent:
            basis.append(c)
    return basis


def style_subspaces(triple: Sl2Triple) -> Dict[str, List[ParamMatrix]]:
    """Bases of the five adjoint kernels/images that define style and costyle."""
    ctx = triple.ctx
    n = triple.dim
    ad_m = ad_matrix(triple.m0)
    ad_n = ad_matrix(triple.n0)
    ad_s = ad_matrix(triple.s0)

    def mats(vectors: List[List[TowerScalar]]) -> List[ParamMatrix]:
        return [unvec(ctx, n, v) for v in vectors]

    return {
        "ker_ad_m0": mats(nullspace(ad_m)),
        "im_ad_n0": mats(column_space(ad_n)),
        "ker_ad_s0": mats(nullspace(ad_s)),
        "ker_ad_n0": mats(nullspace(ad_n)),
        "im_ad_m0": mats(column_space(ad_m)),
    }


# ----------------------------------------------------------------------
# symplectic transport
# ----------------------------------------------------------------------

def transport_form(ctx_form: SymplecticContext, T: ParamMatrix) -> SymplecticContext:
    """New form T^t Omega T induced by the transformation T."""
    omega = ctx_form.omega
    if T.rows != omega.rows or T.cols != omega.cols:
        raise ValueError("transformation size does not match the form")
    return SymplecticContext(T.transpose() * omega * T)


def is_symplectic(ctx_form: SymplecticContext, X: ParamMatrix) -> bool:
    """True iff X^t Omega + Omega X = 0 symbolically."""
    omega = ctx_form.omega
    if X.rows != omega.rows:
        raise ValueError("size mismatch")
    return (X.transpose() * omega + omega * X).is_zero()
