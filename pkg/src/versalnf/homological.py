"""Graded normal-form solver.

Per grade k the space of homogeneous vector fields is materialized in
the monomial basis; the pseudo-inverse of the nilpotent adjoint, the
nilpotent correction operators Q and Q-hat with their finite Neumann
inverses, the per-grade solution (t_k, xbar_k), the nonsemisimple
reduction, and resonance detection are all explicit matrices on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .expr import Context, ExprError, TowerScalar, lift
from .pmatrix import LinearSolveError, ParamMatrix, det, solve_linear
from .pvf import PolyVectorField, field_from_matrix, grade_basis_keys
from .sl2 import Sl2Triple


class HomologicalError(ExprError):
    pass


class ResonanceError(HomologicalError):
    """The reduction operator is not invertible."""


@dataclass
class GradeOperator:
    grade: int
    kind: str
    matrix_rep: ParamMatrix


@dataclass
class NormalFormStepResult:
    t_k: PolyVectorField
    xbar_k: PolyVectorField
    free_names: List[str] = field(default_factory=list)


def _vec_field(V: PolyVectorField, keys: List, ctx: Context) -> List[TowerScalar]:
    zero = TowerScalar.zero(ctx)
    return [lift(V.terms[k], ctx) if k in V.terms else zero for k in keys]


def _field_from_vec(ctx: Context, dim: int, keys: List, v: List[TowerScalar]) -> PolyVectorField:
    return PolyVectorField(ctx, dim, {k: c for k, c in zip(keys, v)})


def _matvec(M: ParamMatrix, v: List[TowerScalar]) -> List[TowerScalar]:
    out = []
    for i in range(M.rows):
        s = TowerScalar.zero(M.ctx)
        row = M.row(i)
        for a, b in zip(row, v):
            if not (a.is_zero() or b.is_zero()):
                s = s + a * b
        out.append(s)
    return out


class GradeWorkspace:
    """Bases, projections and the nilpotent pseudo-inverse on one grade."""

    def __init__(self, triple: Sl2Triple, grade: int):
        if grade < 0:
            raise ValueError("grade must be nonnegative")
        self.triple = triple
        self.grade = grade
        self.dim = triple.dim
        self.ctx = triple.ctx
        self.keys = grade_basis_keys(self.dim, grade)
        self.n = len(self.keys)
        self._build()

    # -- adjoint matrices -------------------------------------------------
    def ad_matrix_of(self, W: PolyVectorField) -> ParamMatrix:
        """Matrix of V -> [W, V] on the grade space (W of grade 0)."""
        cols = []
        ctx = W.ctx if W.ctx.extends(self.ctx) else self.ctx
        for key in self.keys:
            basis_field = PolyVectorField(ctx, self.dim, {key: TowerScalar.one(ctx)})
            img = W.bracket(basis_field)
            cols.append(_vec_field(img, self.keys, ctx))
        ents = [cols[j][i] for i in range(self.n) for j in range(self.n)]
        return ParamMatrix(ctx, self.n, self.n, ents)

    def _build(self) -> None:
        ctx = self.ctx
        tri = self.triple
        self.ad_n = self.ad_matrix_of(field_from_matrix(tri.n0))
        self.ad_m = self.ad_matrix_of(field_from_matrix(tri.m0))
        self.ad_s = self.ad_matrix_of(field_from_matrix(tri.s0))
        zero = TowerScalar.zero(ctx)

        # ker ad(m0) and im ad(n0) bases; V = ker + im (direct sum)
        kerm = solve_linear(self.ad_m.to_lists(), [zero] * self.n, ctx).basis
        im_n_cols = [[self.ad_n.at(i, j) for i in range(self.n)] for j in range(self.n)]
        ker_n = solve_linear(self.ad_n.to_lists(), [zero] * self.n, ctx)
        self.ker_m = kerm
        self.im_n = _independent(im_n_cols, ctx)
        self.ker_n = ker_n.basis
        im_m_cols = [[self.ad_m.at(i, j) for i in range(self.n)] for j in range(self.n)]
        self.im_m = _independent(im_m_cols, ctx)
        self.ker_s = solve_linear(self.ad_s.to_lists(), [zero] * self.n, ctx).basis
        im_s_cols = [[self.ad_s.at(i, j) for i in range(self.n)] for j in range(self.n)]
        self.im_s = _independent(im_s_cols, ctx)

        if len(self.ker_m) + len(self.im_n) != self.n:
            raise HomologicalError("style kernel and nilpotent image do not split the grade space")

        # projection onto ker ad(m0) along im ad(n0): solve [K | I] c = e_i
        KI = [[self.ker_m[j][i] for j in range(len(self.ker_m))]
              + [self.im_n[j][i] for j in range(len(self.im_n))]
              for i in range(self.n)]
        proj_cols = []
        nbar_cols = []
        one = TowerScalar.one(ctx)
        for i in range(self.n):
            e = [one if r == i else zero for r in range(self.n)]
            fam = solve_linear(KI, e, ctx)
            if fam.num_free:
                raise HomologicalError("splitting is degenerate")
            ker_part = [zero] * self.n
            for j in range(len(self.ker_m)):
                c = fam.particular[j]
                if not c.is_zero():
                    ker_part = [x + c * y for x, y in zip(ker_part, self.ker_m[j])]
            proj_cols.append(ker_part)
            # N-bar column: unique x in im ad(m0) with ad(n0) x = (1 - proj) e_i
            target = [a - b for a, b in zip(e, ker_part)]
            nbar_cols.append(self._nbar_solve(target))
        self.proj_ker_m = ParamMatrix(ctx, self.n, self.n,
                                      [proj_cols[j][i] for i in range(self.n) for j in range(self.n)])
        self.nbar_matrix = ParamMatrix(ctx, self.n, self.n,
                                       [nbar_cols[j][i] for i in range(self.n) for j in range(self.n)])

        # projection onto ker ad(s0) along im ad(s0) (ad(s0) is semisimple)
        if len(self.ker_s) + len(self.im_s) == self.n:
            KS = [[self.ker_s[j][i] for j in range(len(self.ker_s))]
                  + [self.im_s[j][i] for j in range(len(self.im_s))]
                  for i in range(self.n)]
            pcols = []
            for i in range(self.n):
                e = [one if r == i else zero for r in range(self.n)]
                fam = solve_linear(KS, e, ctx)
                ker_part = [zero] * self.n
                for j in range(len(self.ker_s)):
                    c = fam.particular[j]
                    if not c.is_zero():
                        ker_part = [x + c * y for x, y in zip(ker_part, self.ker_s[j])]
                pcols.append(ker_part)
            self.proj_ker_s = ParamMatrix(ctx, self.n, self.n,
                                          [pcols[j][i] for i in range(self.n) for j in range(self.n)])
        else:
            raise HomologicalError("semisimple adjoint does not split the grade space")

        # projection onto ker ad(n0) along im ad(m0)
        KN = [[self.ker_n[j][i] for j in range(len(self.ker_n))]
              + [self.im_m[j][i] for j in range(len(self.im_m))]
              for i in range(self.n)]
        pcols = []
        for i in range(self.n):
            e = [one if r == i else zero for r in range(self.n)]
            fam = solve_linear(KN, e, ctx)
            ker_part = [zero] * self.n
            for j in range(len(self.ker_n)):
                c = fam.particular[j]
                if not c.is_zero():
                    ker_part = [x + c * y for x, y in zip(ker_part, self.ker_n[j])]
            pcols.append(ker_part)
        self.proj_ker_n = ParamMatrix(ctx, self.n, self.n,
                                      [pcols[j][i] for i in range(self.n) for j in range(self.n)])

    def _nbar_solve(self, target: List[TowerScalar]) -> List[TowerScalar]:
        """Solve ad(n0) x = target with x in im ad(m0) (unique)."""
        ctx = self.ctx
        cols = [_matvec(self.ad_n, b) for b in self.im_m]
        A = [[cols[j][i] for j in range(len(cols))] for i in range(self.n)]
        fam = solve_linear(A, target, ctx)
        if fam.num_free:
            raise HomologicalError("pseudo-inverse is not unique on the costyle image")
        x = [TowerScalar.zero(ctx)] * self.n
        for j, c in enumerate(fam.particular):
            if not c.is_zero():
                x = [a + c * b for a, b in zip(x, self.im_m[j])]
        return x

    # -- membership helpers -----------------------------------------------
    def in_ker_m(self, V: PolyVectorField) -> bool:
        v = _vec_field(V, self.keys, V.ctx if V.ctx.extends(self.ctx) else self.ctx)
        ad_m = self.ad_m if self.ad_m.ctx == V.ctx else self.ad_m.lift_to(V.ctx)
        return all(x.is_zero() for x in _matvec(ad_m, v))

    def in_ker_s(self, V: PolyVectorField) -> bool:
        v = _vec_field(V, self.keys, V.ctx if V.ctx.extends(self.ctx) else self.ctx)
        ad_s = self.ad_s if self.ad_s.ctx == V.ctx else self.ad_s.lift_to(V.ctx)
        return all(x.is_zero() for x in _matvec(ad_s, v))


def _independent(cols: List[List[TowerScalar]], ctx: Context) -> List[List[TowerScalar]]:
    """Greedy extraction of a column basis using exact rank tests."""
    basis: List[List[TowerScalar]] = []
    for c in cols:
        if all(x.is_zero() for x in c):
            continue
        if basis:
            A = [[basis[k][i] for k in range(len(basis))] for i in range(len(c))]
            try:
                solve_linear(A, c, ctx)
                continue  # dependent
            except LinearSolveError:
                pass
        basis.append(c)
    return basis


# ----------------------------------------------------------------------
# public operations
# ----------------------------------------------------------------------

_ws_cache: Dict[Tuple[int, int], GradeWorkspace] = {}


def workspace(triple: Sl2Triple, grade: int) -> GradeWorkspace:
    key = (id(triple), grade)
    ws = _ws_cache.get(key)
    if ws is None:
        ws = GradeWorkspace(triple, grade)
        _ws_cache[key] = ws
    return ws


def nbar(triple: Sl2Triple, grade: int) -> GradeOperator:
    """Pseudo-inverse of the nilpotent adjoint on the grade space:
    ad(n0) Nbar = 1 - proj_{ker ad(m0)} and image(Nbar) in im ad(m0)."""
    ws = workspace(triple, grade)
    return GradeOperator(grade, "Nbar", ws.nbar_matrix)


def _vbar_checked(ws: GradeWorkspace, vbar: PolyVectorField) -> PolyVectorField:
    if vbar.is_zero():
        return vbar
    if not vbar.is_homogeneous(0):
        raise HomologicalError("deformation part must be a linear field")
    m0f = field_from_matrix(ws.triple.m0)
    s0f = field_from_matrix(ws.triple.s0)
    if not m0f.bracket(vbar).is_zero() or not s0f.bracket(vbar).is_zero():
        raise HomologicalError("deformation is not in the style kernel")
    return vbar


def build_q(triple: Sl2Triple, vbar: PolyVectorField, grade: int) -> Tuple[GradeOperator, GradeOperator, GradeOperator, GradeOperator]:
    """Q = ad(s0+vbar) Nbar and Qhat = Nbar ad(s0+vbar) with their finite
    Neumann inverses (1+Q)^-1, (1+Qhat)^-1."""
    ws = workspace(triple, grade)
    _vbar_checked(ws, vbar)
    ctx = vbar.ctx if vbar.ctx.extends(ws.ctx) else ws.ctx
    pert = field_from_matrix(triple.s0).lift_to(ctx) + vbar.lift_to(ctx)
    ad_p = ws.ad_matrix_of(pert)
    nbar_m = ws.nbar_matrix.lift_to(ad_p.ctx)
    Q = ad_p * nbar_m
    Qh = nbar_m * ad_p
    invQ = _neumann_inverse(Q)
    invQh = _neumann_inverse(Qh)
    g = grade
    return (
        GradeOperator(g, "Q", Q),
        GradeOperator(g, "Qhat", Qh),
        GradeOperator(g, "NeumannInvQ", invQ),
        GradeOperator(g, "NeumannInvQhat", invQh),
    )


def _neumann_inverse(Q: ParamMatrix) -> ParamMatrix:
    """(1+Q)^-1 = sum (-Q)^i, truncated at the first vanishing power."""
    n = Q.rows
    acc = ParamMatrix.identity(Q.ctx, n)
    power = ParamMatrix.identity(Q.ctx, n)
    for i in range(1, n + 2):
        power = power * Q.scale(-1)
        if power.is_zero():
            return acc
        acc = acc + power
    raise HomologicalError("operator is not nilpotent within the grade dimension")


def _neumann_apply(Q: ParamMatrix, v: List[TowerScalar]) -> List[TowerScalar]:
    acc = list(v)
    cur = v
    for i in range(1, Q.rows + 2):
        cur = [-x for x in _matvec(Q, cur)]
        if all(x.is_zero() for x in cur):
            return acc
        acc = [a + b for a, b in zip(acc, cur)]
    raise HomologicalError("operator is not nilpotent within the grade dimension")


def normal_form_step(
    triple: Sl2Triple,
    vbar: PolyVectorField,
    X_k: PolyVectorField,
    zero_coords: Optional[Sequence] = None,
) -> NormalFormStepResult:
    """One homological step: t_k = Nbar (1+Q)^-1 X_k and
    xbar_k = proj_{ker ad(m0)} (1+Q)^-1 X_k.

    The canonical generator lies in im ad(m0).  ``zero_coords`` instead
    re-gauges the generator by elements of ker ad(s0) n ker ad(n0) so the
    named monomial coordinates of t_k vanish; xbar_k shifts accordingly.
    Free directions are reported by name and default to zero.
    """
    grades = X_k.grades()
    if not grades:
        return NormalFormStepResult(PolyVectorField.zero(X_k.ctx, X_k.dim), X_k)
    if len(grades) != 1:
        raise HomologicalError("input is not homogeneous")
    k = grades[0]
    ws = workspace(triple, k)
    _vbar_checked(ws, vbar)
    ctx = vbar.ctx if vbar.ctx.extends(ws.ctx) else ws.ctx
    if X_k.ctx.extends(ctx):
        ctx = X_k.ctx
    pert = field_from_matrix(triple.s0).lift_to(ctx) + vbar.lift_to(ctx)
    ad_p = ws.ad_matrix_of(pert)
    nbar_m = ws.nbar_matrix.lift_to(ctx)
    proj = ws.proj_ker_m.lift_to(ctx)
    Q = ad_p * nbar_m
    x = _vec_field(X_k, ws.keys, ctx)
    y = _neumann_apply(Q, x)
    t_vec = _matvec(nbar_m, y)
    xbar_vec = _matvec(proj, y)
    t = _field_from_vec(ctx, ws.dim, ws.keys, t_vec)
    xbar = _field_from_vec(ctx, ws.dim, ws.keys, xbar_vec)

    # gauge freedom: generators whose adjoint image stays in the style
    # kernel (at the organizing center these are ker ad(s0) n ker ad(n0))
    free_dim = len(_ker_intersection(ws, ws.ker_s, ws.ker_n))
    names = [f"gauge{i}" for i in range(free_dim)]

    if zero_coords:
        xbar0f = (field_from_matrix(triple.s0) + field_from_matrix(triple.n0)).lift_to(ctx) + vbar.lift_to(ctx)
        t, xbar = _gauged_direct_solve(ws, ctx, xbar0f, X_k, zero_coords)
    return NormalFormStepResult(t, xbar, names)


def _ker_intersection(ws: GradeWorkspace, basis_a: List[List[TowerScalar]], basis_b: List[List[TowerScalar]]) -> List[List[TowerScalar]]:
    """Basis of span(basis_a) n span(basis_b)."""
    ctx = ws.ctx
    if not basis_a or not basis_b:
        return []
    # solve a-combination = b-combination
    cols = len(basis_a) + len(basis_b)
    rows = []
    for i in range(ws.n):
        row = [basis_a[j][i] for j in range(len(basis_a))]
        row += [-basis_b[j][i] for j in range(len(basis_b))]
        rows.append(row)
    fam = solve_linear(rows, [TowerScalar.zero(ctx)] * ws.n, ctx)
    out = []
    for v in fam.basis:
        vec = [TowerScalar.zero(ctx)] * ws.n
        for j in range(len(basis_a)):
            c = v[j]
            if not c.is_zero():
                vec = [x + c * y for x, y in zip(vec, basis_a[j])]
        if not all(x.is_zero() for x in vec):
            out.append(vec)
    return out


def _gauged_direct_solve(ws, ctx, xbar0_field, X_k, zero_coords):
    """Solve ad(m0)(ad(xbar0) t - X_k) = 0 directly with the requested
    coordinates of t placed last in elimination order, so they come out
    free and are set to zero.  This reproduces the coordinate gauges
    used in hand calculations; the canonical costyle does not need it.
    """
    key_index = {k: i for i, k in enumerate(ws.keys)}
    try:
        gauge_idx = [key_index[tuple(zc[0]), zc[1]] if not isinstance(zc, tuple) else key_index[zc]
                     for zc in zero_coords]
    except KeyError as exc:
        raise HomologicalError(f"unknown coordinate {exc} in gauge request") from None
    other_idx = [i for i in range(ws.n) if i not in gauge_idx]
    order = other_idx + list(gauge_idx)
    ad_x = ws.ad_matrix_of(xbar0_field)
    M = ws.ad_m.lift_to(ctx) * ad_x
    rhs = _matvec(ws.ad_m.lift_to(ctx), _vec_field(X_k, ws.keys, ctx))
    rows = [[M.at(i, j) for j in order] for i in range(ws.n)]
    fam = solve_linear(rows, rhs, ctx)
    expected_free = len(gauge_idx)
    if fam.num_free != expected_free:
        raise HomologicalError(
            f"gauge request expects {expected_free} free coordinates, elimination found {fam.num_free}"
        )
    sol = fam.member()
    t_vec = [TowerScalar.zero(ctx)] * ws.n
    for pos, col in enumerate(order):
        t_vec[col] = sol[pos]
    for g in gauge_idx:
        if not t_vec[g].is_zero():
            raise HomologicalError("requested gauge coordinate did not come out free")
    t = _field_from_vec(ctx, ws.dim, ws.keys, t_vec)
    xbar = X_k.lift_to(ctx) - xbar0_field.bracket(t)
    return t, xbar


def nonsemisimple_reduce(
    triple: Sl2Triple, vbar: PolyVectorField, xbar_k: PolyVectorField
) -> Tuple[PolyVectorField, PolyVectorField]:
    """Reduce a style normal form further into ker ad(m0) n ker ad(s0).

    Returns (further_reduced, generator) with
    ad(xbar0) generator = xbar_k - further_reduced.
    """
    grades = xbar_k.grades()
    if not grades:
        return xbar_k, PolyVectorField.zero(xbar_k.ctx, xbar_k.dim)
    if len(grades) != 1:
        raise HomologicalError("input is not homogeneous")
    k = grades[0]
    ws = workspace(triple, k)
    if not ws.in_ker_m(xbar_k):
        raise HomologicalError("input is not in the style kernel")
    ctx = vbar.ctx if vbar.ctx.extends(ws.ctx) else ws.ctx
    if xbar_k.ctx.extends(ctx):
        ctx = xbar_k.ctx

    khat, sub = _khat_restricted(triple, vbar, k, ctx)
    x = _vec_field(xbar_k, ws.keys, ctx)
    proj_s = ws.proj_ker_s.lift_to(ctx)
    x_ker = _matvec(proj_s, x)
    x_im = [a - b for a, b in zip(x, x_ker)]
    if all(v.is_zero() for v in x_im):
        return xbar_k, PolyVectorField.zero(ctx, ws.dim)
    # coordinates of x_im in the subspace basis
    A = [[sub[j][i] for j in range(len(sub))] for i in range(ws.n)]
    fam = solve_linear(A, x_im, ctx)
    target = fam.particular
    try:
        fam2 = solve_linear(khat.to_lists(), target, ctx)
        if fam2.num_free:
            raise ResonanceError("reduction operator has a kernel")
    except LinearSolveError as exc:
        raise ResonanceError("reduction operator is not invertible") from exc
    u = fam2.particular
    # generator tau = (1+Qhat)^-1 proj_ker_n  adinv(s0+n0) (sub u)
    w = [TowerScalar.zero(ctx)] * ws.n
    for j, c in enumerate(u):
        if not c.is_zero():
            w = [a + c * b for a, b in zip(w, sub[j])]
    tau_vec = _apply_reduction_chain(triple, vbar, k, ctx, w)
    tau = _field_from_vec(ctx, ws.dim, ws.keys, tau_vec)
    xbar0f = (field_from_matrix(triple.s0) + field_from_matrix(triple.n0)).lift_to(ctx) + vbar.lift_to(ctx)
    reduced = xbar_k.lift_to(ctx) - xbar0f.bracket(tau)
    return reduced, tau


def _subspace_ker_m_im_s(ws: GradeWorkspace) -> List[List[TowerScalar]]:
    return _ker_intersection(ws, ws.ker_m, ws.im_s)


def _adinv_s_plus_n(triple: Sl2Triple, k: int, ctx: Context, w: List[TowerScalar]) -> List[TowerScalar]:
    """Invert ad(s0+n0) on the subspace it preserves, applied to w."""
    ws = workspace(triple, k)
    ad_sn = ws.ad_matrix_of(field_from_matrix(triple.s0) + field_from_matrix(triple.n0)).lift_to(ctx)
    fam = solve_linear(ad_sn.to_lists(), w, ctx)
    return fam.particular


def _apply_reduction_chain(triple, vbar, k, ctx, w):
    ws = workspace(triple, k)
    y = _adinv_s_plus_n(triple, k, ctx, w)
    y = _matvec(ws.proj_ker_n.lift_to(ctx), y)
    pert = field_from_matrix(triple.s0).lift_to(ctx) + vbar.lift_to(ctx)
    ad_p = ws.ad_matrix_of(pert)
    Qh = ws.nbar_matrix.lift_to(ctx) * ad_p
    return _neumann_apply(Qh, y)


def _khat_restricted(triple: Sl2Triple, vbar: PolyVectorField, k: int, ctx: Context):
    """Matrix of proj_im_s K_k adinv(s0+n0) on ker ad(m0) n im ad(s0)."""
    ws = workspace(triple, k)
    sub = [[lift(x, ctx) for x in v] for v in _subspace_ker_m_im_s(ws)]
    if not sub:
        return ParamMatrix.identity(ctx, 0), sub
    xbar0f = (field_from_matrix(triple.s0) + field_from_matrix(triple.n0)).lift_to(ctx) + vbar.lift_to(ctx)
    ad_xbar0 = ws.ad_matrix_of(xbar0f)
    proj_s = ws.proj_ker_s.lift_to(ctx)
    cols = []
    for v in sub:
        y = _apply_reduction_chain(triple, vbar, k, ctx, v)
        img = _matvec(ad_xbar0, y)
        # component in im ad(s0): subtract the ker ad(s0) part, coordinates in sub
        img_im = [a - b for a, b in zip(img, _matvec(proj_s, img))]
        A = [[sub[j][i] for j in range(len(sub))] for i in range(ws.n)]
        fam = solve_linear(A, img_im, ctx)
        cols.append(fam.particular)
    m = len(sub)
    return ParamMatrix(ctx, m, m, [cols[j][i] for i in range(m) for j in range(m)]), sub


def reduction_operator(triple: Sl2Triple, vbar: PolyVectorField, grade: int) -> GradeOperator:
    """The restricted reduction operator K-hat on ker ad(m0) n im ad(s0)."""
    ws = workspace(triple, grade)
    ctx = vbar.ctx if vbar.ctx.extends(ws.ctx) else ws.ctx
    khat, _sub = _khat_restricted(triple, vbar, grade, ctx)
    return GradeOperator(grade, "Khat", khat)


def resonance_detect(khat: GradeOperator) -> TowerScalar:
    """det(K-hat) as an exact scalar; its zeros are the resonances."""
    if khat.matrix_rep.rows == 0:
        return TowerScalar.one(khat.matrix_rep.ctx)
    return det(khat.matrix_rep)


def find_resonances(det_ts: TowerScalar, var: str, lo: float, hi: float, samples: int, tol: float = 1e-9) -> List[float]:
    """Numeric root isolation of the resonance determinant on [lo, hi]
    at the given sample resolution (sign changes and near-zero minima)."""
    xs = [lo + (hi - lo) * i / samples for i in range(samples + 1)]
    vals = [det_ts.eval_numeric({var: x}) for x in xs]
    roots: List[float] = []

    def refine_sign(a, b, fa, fb):
        for _ in range(80):
            m = (a + b) / 2
            fm = det_ts.eval_numeric({var: m})
            if fa * fm <= 0:
                b, fb = m, fm
            else:
                a, fa = m, fm
        return (a + b) / 2

    def refine_min(a, b):
        phi = (5 ** 0.5 - 1) / 2
        x1, x2 = b - phi * (b - a), a + phi * (b - a)
        f1, f2 = abs(det_ts.eval_numeric({var: x1})), abs(det_ts.eval_numeric({var: x2}))
        for _ in range(120):
            if f1 < f2:
                b, x2, f2 = x2, x1, f1
                x1 = b - phi * (b - a)
                f1 = abs(det_ts.eval_numeric({var: x1}))
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + phi * (b - a)
                f2 = abs(det_ts.eval_numeric({var: x2}))
        m = (a + b) / 2
        return m if abs(det_ts.eval_numeric({var: m})) < tol else None

    for i in range(samples):
        if vals[i] == 0.0:
            roots.append(xs[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(refine_sign(xs[i], xs[i + 1], vals[i], vals[i + 1]))
        elif 0 < i and abs(vals[i]) < abs(vals[i - 1]) and abs(vals[i]) < abs(vals[i + 1]):
            r = refine_min(xs[i - 1], xs[i + 1])
            if r is not None:
                roots.append(r)
    # dedupe
    out: List[float] = []
    for r in sorted(roots):
        if not out or abs(r - out[-1]) > (hi - lo) / samples / 2:
            out.append(r)
    return out


def graded_normal_form(
    triple: Sl2Triple,
    xbar0: ParamMatrix,
    X: PolyVectorField,
    max_grade: int,
    zero_coords_by_grade: Optional[Dict[int, Sequence]] = None,
) -> List[NormalFormStepResult]:
    """Normalize grade by grade, pushing each transformation forward by
    the truncated exponential of its adjoint.

    ``xbar0`` is the linear part already in versal normal form; X holds
    the nonlinear grades (its linear part, if any, is ignored in favor
    of xbar0).
    """
    ctx = X.ctx if X.ctx.extends(xbar0.ctx) else xbar0.ctx
    xbar0f = field_from_matrix(xbar0).lift_to(ctx)
    vbar = xbar0f - field_from_matrix(triple.s0 + triple.n0).lift_to(ctx)
    current = xbar0f
    for g in X.grades():
        if g > 0:
            current = current + X.grade_part(g).lift_to(ctx)
    results: List[NormalFormStepResult] = []
    for k in range(1, max_grade + 1):
        Xk = current.grade_part(k)
        if Xk.is_zero():
            results.append(NormalFormStepResult(
                PolyVectorField.zero(ctx, X.dim), Xk))
            continue
        zero_coords = (zero_coords_by_grade or {}).get(k)
        step = normal_form_step(triple, vbar, Xk, zero_coords=zero_coords)
        results.append(step)
        # exp(ad t_k) moves grade j to grades j, j+k, j+2k, ...
        t = step.t_k
        new_field = PolyVectorField.zero(t.ctx, X.dim)
        for g in current.grades():
            if g > max_grade:
                continue
            term = current.grade_part(g).lift_to(t.ctx)
            acc = term
            factor = Fraction(1)
            power = term
            new_field = new_field + term
            i = 1
            while g + i * k <= max_grade:
                power = t.bracket(power)
                factor = factor / i
                if power.is_zero():
                    break
                new_field = new_field + power.scale(factor)
                i += 1
        current = new_field
    return results
