"""The linear versal-normal-form pipeline.

Build the deformation ansatz from the style kernel, match characteristic
polynomials to determine the versal parameters (adjoining discriminant
radicals and selecting branches where a step is quadratic), and compute
the near-identity transformation with a costyle normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .expr import Context, ExprError, ParameterDecl, TowerScalar, lift
from .expr.series import laurent_coeffs, value_at_zero
from .expr.tower import tower_sqrt
from .pmatrix import (
    AffineSolutionFamily,
    LinearSolveError,
    ParamMatrix,
    charpoly,
    conjugacy_solve,
    det,
    inverse,
    solve_linear,
)
from .sl2 import (Sl2Triple, SymplecticContext, ad_matrix, jacobson_morozov,
                  sn_split, symplectic_constraint_matrix)


class VnfError(ExprError):
    pass


class NonTriangularSystem(VnfError):
    """The parameter-matching system stalled; reports the stuck equations."""

    def __init__(self, message: str, stuck: List[TowerScalar]):
        super().__init__(message)
        self.stuck = stuck


@dataclass
class BranchRule:
    """Root selection for quadratic parameter solves.

    strategy "vanish_at_zero" picks the root that vanishes when the
    deformation parameter is set to zero; "leading_sign" picks by the
    sign of the first nonzero series coefficient at a sample assignment.
    """
    strategy: str = "vanish_at_zero"
    name: Optional[str] = None
    sign: int = 1
    sample: Optional[Dict[str, float]] = None


@dataclass
class VersalAnsatz:
    center: ParamMatrix
    directions: List[ParamMatrix]
    param_names: List[str]
    ctx: Context  # extended context containing the ansatz parameter names

    def instance(self) -> ParamMatrix:
        X = self.center.lift_to(self.ctx)
        for name, D in zip(self.param_names, self.directions):
            X = X + D.lift_to(self.ctx).scale(TowerScalar.param(self.ctx, name))
        return X


@dataclass
class VersalResult:
    ansatz: VersalAnsatz
    assignments: Dict[str, TowerScalar]
    xbar: ParamMatrix
    transformation: ParamMatrix
    residual_zero: bool
    det_T: TowerScalar
    triple: Optional[Sl2Triple] = None
    pre_transformation: Optional[ParamMatrix] = None


# ----------------------------------------------------------------------
# ansatz construction
# ----------------------------------------------------------------------



def _kernel_directions(triple: Sl2Triple, sympl: Optional[SymplecticContext]) -> List[ParamMatrix]:
    ctx = triple.ctx
    n = triple.dim
    rows: List[List[TowerScalar]] = []
    for M in (ad_matrix(triple.s0), ad_matrix(triple.m0)):
        rows.extend(M.to_lists())
    if sympl is not None:
        omega = sympl.omega.lift_to(ctx) if sympl.omega.ctx != ctx else sympl.omega
        rows.extend(symplectic_constraint_matrix(omega).to_lists())
    zero = TowerScalar.zero(ctx)
    fam = solve_linear(rows, [zero] * len(rows), ctx)
    basis = [ParamMatrix(ctx, n, n, v) for v in fam.basis]

    # canonical normalization: powers (-m0)^k / k! where they span the kernel
    candidates: List[ParamMatrix] = []
    fact = 1
    P = ParamMatrix.identity(ctx, n)
    for k in range(n):
        if k:
            fact *= k
        cand = P.scale(Fraction(1, fact))
        if not cand.is_zero() and _in_span(basis, cand):
            candidates.append(cand)
        P = P * triple.m0.scale(-1)
    if len(candidates) == len(basis) and candidates:
        return candidates
    return basis


def _in_span(basis: List[ParamMatrix], M: ParamMatrix) -> bool:
    if not basis:
        return M.is_zero()
    ctx = basis[0].ctx
    A = [[b.entries[i] for b in basis] for i in range(len(M.entries))]
    try:
        solve_linear(A, list(M.lift_to(ctx).entries), ctx)
        return True
    except LinearSolveError:
        return False


def build_ansatz(
    X: ParamMatrix,
    triple: Sl2Triple,
    sympl: Optional[SymplecticContext] = None,
    directions: Optional[List[ParamMatrix]] = None,
    param_names: Optional[List[str]] = None,
    center: Optional[ParamMatrix] = None,
) -> VersalAnsatz:
    """Deformation ansatz: center + sum eps_i * D_i with the D_i spanning
    ker ad(s0) n ker ad(m0) (intersected with the symplectic algebra when
    a form is supplied), or explicitly supplied directions."""
    if center is None:
        center = triple.s0 + triple.n0
    if directions is None:
        directions = _kernel_directions(triple, sympl)
    else:
        # explicit directions may realize other styles (e.g. deformation
        # along the nilpotent itself); only the semisimple part must act
        # trivially on them
        for D in directions:
            if not triple.s0.commutator(D.lift_to(triple.ctx)).is_zero():
                raise VnfError("supplied direction does not commute with the semisimple part")
    if param_names is None:
        suffix = "abcdefgh"
        param_names = [f"eps_{suffix[i]}" if i < len(suffix) else f"eps_{i}" for i in range(len(directions))]
    base_ctx = X.ctx
    new = [ParameterDecl(nm) for nm in param_names if not base_ctx.has_param(nm)]
    ctx = base_ctx.with_params(new) if new else base_ctx
    return VersalAnsatz(center=center, directions=directions, param_names=list(param_names), ctx=ctx)


# ----------------------------------------------------------------------
# polynomial view of scalars in the ansatz parameters
# ----------------------------------------------------------------------

def _as_poly_in(ts: TowerScalar, names: Sequence[str]) -> Dict[Tuple[int, ...], TowerScalar]:
    """View a scalar as a polynomial in the named parameters.

    Denominators and radicands must not involve the names."""
    ctx = ts.ctx
    idxs = [ctx.param_index(n) for n in names]
    for b, rf in ts.coords.items():
        for i in idxs:
            if rf.den.involves(i):
                raise VnfError("denominator involves an undetermined parameter")
    for name in names:
        for rad in ctx.tower:
            if lift(rad.radicand, ctx).involves_param(name):
                raise VnfError("radicand involves an undetermined parameter")
    out: Dict[Tuple[int, ...], TowerScalar] = {}
    from .expr.polynomial import MultiPoly, RatFunc

    for b, rf in ts.coords.items():
        buckets: Dict[Tuple[int, ...], Dict[Tuple[int, ...], object]] = {}
        for e, c in rf.num.terms.items():
            key = tuple(e[i] for i in idxs)
            e0 = list(e)
            for i in idxs:
                e0[i] = 0
            buckets.setdefault(key, {})[tuple(e0)] = c
        for key, terms in buckets.items():
            piece = TowerScalar(ctx, {b: RatFunc(MultiPoly(ctx.nvars, terms), rf.den)})
            cur = out.get(key)
            out[key] = piece if cur is None else cur + piece
    return {k: v for k, v in out.items() if not v.is_zero()}


def _poly_degree_in(p: Dict[Tuple[int, ...], TowerScalar], pos: int) -> int:
    return max((k[pos] for k in p), default=-1) if p else -1


def _poly_names_present(p: Dict[Tuple[int, ...], TowerScalar]) -> List[int]:
    present = set()
    for k in p:
        for i, e in enumerate(k):
            if e:
                present.add(i)
    return sorted(present)


def _poly_to_scalar(p: Dict[Tuple[int, ...], TowerScalar], names: Sequence[str], ctx: Context) -> TowerScalar:
    out = TowerScalar.zero(ctx)
    for k, c in p.items():
        term = lift(c, ctx) if c.ctx != ctx else c
        for name, e in zip(names, k):
            if e:
                term = term * TowerScalar.param(ctx, name) ** e
        out = out + term
    return out


# ----------------------------------------------------------------------
# parameter matching
# ----------------------------------------------------------------------

def match_charpoly(
    X: ParamMatrix,
    ansatz: VersalAnsatz,
    rules: Optional[List[BranchRule]] = None,
    deformation: Optional[str] = None,
) -> Dict[str, TowerScalar]:
    """Solve chi(X) = chi(ansatz) for the ansatz parameters.

    Steps are solved one unknown at a time, in degree <= 2; when no
    equation involves a single unknown, an equation of low degree in
    some unknown rewrites the others (polynomial reduction) until one
    does.  Quadratic steps adjoin a discriminant radical when needed and
    select the root by the branch rules (default: the root vanishing at
    the organizing center)."""
    names = ansatz.param_names
    inst = ansatz.instance()
    ctx = inst.ctx
    cpX = charpoly(X.lift_to(ctx))
    cpA = charpoly(inst)
    if cpX.degree != cpA.degree:
        raise VnfError("characteristic polynomial degrees differ")
    equations = []
    for dA, dX in zip(cpA.deltas, cpX.deltas):
        eq = dA - dX
        if not eq.is_zero():
            equations.append(eq)
    rules = rules or [BranchRule()]
    assignments: Dict[str, TowerScalar] = {}
    unsolved = list(names)

    max_rounds = 4 * (len(equations) + 1) * (len(names) + 1)
    rounds = 0
    while unsolved and equations:
        rounds += 1
        if rounds > max_rounds:
            raise NonTriangularSystem("parameter matching did not terminate", equations)
        # re-polynomialize against current context (it can grow radicals)
        ctx = equations[0].ctx
        for eq in equations:
            if eq.ctx.extends(ctx) and eq.ctx != ctx:
                ctx = eq.ctx
        equations = [lift(e, ctx) if e.ctx != ctx else e for e in equations]
        polys = [_as_poly_in(e, names) for e in equations]
        # drop satisfied equations
        keep = [i for i, p in enumerate(polys) if p]
        if len(keep) != len(equations):
            equations = [equations[i] for i in keep]
            polys = [polys[i] for i in keep]
            if not equations:
                break

        name_pos = {n: i for i, n in enumerate(names)}
        unsolved_pos = [name_pos[n] for n in unsolved]

        # 1) an equation in exactly one unsolved unknown
        solved_this_round = False
        for i, p in enumerate(polys):
            present = [q for q in _poly_names_present(p) if q in unsolved_pos]
            if len(present) != 1:
                continue
            pos = present[0]
            deg = _poly_degree_in(p, pos)
            if deg > 2:
                continue
            value, ctx = _solve_single(p, pos, names, ctx, rules, deformation)
            nm = names[pos]
            assignments[nm] = value
            unsolved.remove(nm)
            equations = [lift(e, ctx).substitute(nm, value) for e in equations]
            solved_this_round = True
            break
        if solved_this_round:
            continue

        # 2) reduce other equations by a low-degree pivot equation
        reduced = False
        for i, p in enumerate(polys):
            if reduced:
                break
            for pos in unsolved_pos:
                deg = _poly_degree_in(p, pos)
                if deg < 1 or deg > 2:
                    continue
                lead = {k[:pos] + (0,) + k[pos + 1:]: v for k, v in p.items() if k[pos] == deg}
                if any(any(kk[q] for q in unsolved_pos) for kk in lead):
                    continue  # leading coefficient must be unknown-free
                changed = False
                for j in range(len(polys)):
                    if j == i:
                        continue
                    newp = _reduce_mod(polys[j], p, pos, deg)
                    if newp is not None:
                        polys[j] = newp
                        equations[j] = _poly_to_scalar(newp, names, ctx)
                        changed = True
                if changed:
                    reduced = True
                    break
        if not reduced:
            raise NonTriangularSystem(
                "no equation isolates a single parameter", equations
            )

    if unsolved:
        raise NonTriangularSystem(f"parameters left undetermined: {unsolved}", equations)
    # verify all invariants match under the assignments
    final_ctx = ctx
    for v in assignments.values():
        if v.ctx.extends(final_ctx) and v.ctx != final_ctx:
            final_ctx = v.ctx
    inst2 = inst.lift_to(final_ctx)
    for nm, v in assignments.items():
        inst2 = inst2.substitute(nm, lift(v, final_ctx) if v.ctx != final_ctx else v)
    cpX2 = charpoly(X.lift_to(inst2.ctx))
    cpA2 = charpoly(inst2)
    for dA, dX in zip(cpA2.deltas, cpX2.deltas):
        if not (dA - dX).is_zero():
            raise VnfError("parameter assignments fail to match the invariants")
    return assignments


def _reduce_mod(target, pivot, pos, deg):
    """Polynomial remainder of target modulo pivot w.r.t. the unknown at pos.
    Returns None if nothing changed."""
    if _poly_degree_in(target, pos) < deg:
        return None
    lead_inv = None
    lead = {k: v for k, v in pivot.items() if k[pos] == deg}
    # leading coefficient as scalar (unknown-free in the other entries' slots)
    (k0, c0), = [(k, v) for k, v in lead.items()] if len(lead) == 1 else [(None, None)]
    if k0 is None:
        # sum of several monomials in the other unknowns: not supported
        return None
    out = dict(target)
    changed = False
    guard = 0
    while True:
        d = _poly_degree_in(out, pos)
        if d < deg:
            break
        guard += 1
        if guard > 200:
            return None
        top = {k: v for k, v in out.items() if k[pos] == d}
        for k, v in top.items():
            shift = list(k)
            shift[pos] = d - deg
            factor = v / c0
            for kk, vv in pivot.items():
                e = tuple(a + b for a, b in zip(shift, kk))
                cur = out.get(e, None)
                term = factor * vv
                s = -term if cur is None else cur - term
                if s.is_zero():
                    out.pop(e, None)
                else:
                    out[e] = s
        changed = True
    return out if changed else None


def _solve_single(p, pos, names, ctx, rules, deformation):
    """Solve a degree <= 2 equation in the unknown at position pos."""
    zero = TowerScalar.zero(ctx)
    a = zero
    b = zero
    c = zero
    for k, v in p.items():
        others = any(k[q] for q in range(len(k)) if q != pos)
        if others:
            raise VnfError("equation unexpectedly involves several parameters")
        v = lift(v, ctx) if v.ctx != ctx else v
        if k[pos] == 0:
            c = c + v
        elif k[pos] == 1:
            b = b + v
        elif k[pos] == 2:
            a = a + v
        else:
            raise VnfError("parameter equation has degree above two")
    if a.is_zero():
        if b.is_zero():
            raise VnfError("degenerate parameter equation")
        return -c / b, ctx
    disc = b * b - c * a * 4
    root = tower_sqrt(disc)
    if root is None:
        # adjoin a discriminant radical, avoiding name collisions
        i = 0
        while ctx.has_radical(f"disc{i}") or ctx.has_param(f"disc{i}"):
            i += 1
        new_ctx = ctx.with_radical(f"disc{i}", disc)
        root = TowerScalar.radical(new_ctx, f"disc{i}")
        ctx = new_ctx
        a, b, c = (lift(x, ctx) for x in (a, b, c))
    candidates = [(root - b) / (a * 2), (-root - b) / (a * 2)]
    return _select_branch(candidates, names[pos], rules, deformation), ctx


def _select_branch(candidates, name, rules, deformation):
    for rule in rules:
        if rule.strategy == "vanish_at_zero":
            if deformation is None:
                continue
            hits = []
            for cand in candidates:
                try:
                    if cand.substitute(deformation, TowerScalar.zero(cand.ctx)).is_zero():
                        hits.append(cand)
                except ExprError:
                    pass
            if len(hits) == 1:
                return hits[0]
        elif rule.strategy == "leading_sign":
            var = rule.name or deformation
            if var is None:
                continue
            from .expr.series import series_expand

            hits = []
            for cand in candidates:
                try:
                    coeffs = series_expand(cand, var, 3)
                except ExprError:
                    continue
                lead = next((cc for cc in coeffs if not cc.is_zero()), None)
                if lead is None:
                    continue
                sample = rule.sample or {}
                assign = {pp.name: sample.get(pp.name, 1.0) for pp in lead.ctx.params}
                try:
                    val = lead.eval_numeric(assign)
                except ExprError:
                    continue
                if val * rule.sign > 0:
                    hits.append(cand)
            if len(hits) == 1:
                return hits[0]
    raise VnfError(f"branch rules do not select a unique root for {name!r}")


# ----------------------------------------------------------------------
# transformation
# ----------------------------------------------------------------------

def solve_transformation(
    X: ParamMatrix,
    xbar: ParamMatrix,
    costyle: str = "diag",
    deformation: Optional[str] = None,
    constraints: Optional[Dict[Tuple[int, int], TowerScalar]] = None,
) -> ParamMatrix:
    """A transformation T with X T = T xbar and T = identity at the
    organizing center.

    costyle "diag" fixes the diagonal to one and zeroes remaining free
    names; "near_identity" writes T = I + eps*t, removes the negative
    deformation orders of t linearly in the free names, then zeroes the
    remaining ones."""
    X, xbar = X._coerced(xbar)
    ctx = X.ctx
    n = X.rows
    if costyle == "diag":
        normal: Dict[Tuple[int, int], TowerScalar] = {(i, i): TowerScalar.one(ctx) for i in range(n)}
        if constraints:
            normal.update(constraints)
        fam = conjugacy_solve(X, xbar, normalization=normal)
        T = ParamMatrix(ctx, n, n, fam.member())
        if det(T).is_zero():
            raise VnfError("no invertible member with a unit diagonal")
        return T
    if costyle != "near_identity":
        raise VnfError(f"unknown costyle {costyle!r}")
    if deformation is None:
        raise VnfError("near-identity costyle needs the deformation parameter")
    eps = TowerScalar.param(ctx, deformation)
    # eps (X t - t xbar) = xbar - X over the entries of t
    order = [(i, j) for i in range(n - 1, -1, -1) for j in range(n - 1, -1, -1)]
    col_of = {posn: kk for kk, posn in enumerate(order)}
    zero = TowerScalar.zero(ctx)
    rows = []
    rhs = []
    diff = xbar - X
    for i in range(n):
        for j in range(n):
            row = [zero] * (n * n)
            for k in range(n):
                row[col_of[(k, j)]] = row[col_of[(k, j)]] + eps * X.at(i, k)
            for l in range(n):
                row[col_of[(i, l)]] = row[col_of[(i, l)]] - eps * xbar.at(l, j)
            rows.append(row)
            rhs.append(diff.at(i, j))
    fam = solve_linear(rows, rhs, ctx)
    free_assign = _boundedness_fix(fam, ctx, deformation)
    sol = fam.member(free_assign)
    t_entries = [zero] * (n * n)
    for kk, (i, j) in enumerate(order):
        t_entries[i * n + j] = sol[kk]
    t = ParamMatrix(ctx, n, n, t_entries)
    T = ParamMatrix.identity(ctx, n) + t.scale(eps)
    return T


def _boundedness_fix(fam: AffineSolutionFamily, ctx: Context, deformation: str) -> Dict[str, TowerScalar]:
    """Impose vanishing of the negative deformation orders on the family,
    then zero the remaining free names in order."""
    if not fam.free_names:
        return {}
    neg_orders: Dict[int, Dict[int, List[TowerScalar]]] = {}
    npart: Dict[int, Dict[int, TowerScalar]] = {}
    m = len(fam.particular)
    r = len(fam.free_names)
    rows: List[List[TowerScalar]] = []
    rhs: List[TowerScalar] = []
    for i in range(m):
        series_p = {k: v for k, v in laurent_coeffs(fam.particular[i], deformation, -1).items() if k < 0}
        series_b = [
            {k: v for k, v in laurent_coeffs(fam.basis[j][i], deformation, -1).items() if k < 0}
            for j in range(r)
        ]
        orders = set(series_p)
        for s in series_b:
            orders.update(s)
        for k in sorted(orders):
            row = [s.get(k, TowerScalar.zero(ctx)) for s in series_b]
            rows.append(row)
            rhs.append(-series_p.get(k, TowerScalar.zero(ctx)))
    if not rows:
        return {}
    try:
        sub = solve_linear(rows, rhs, ctx, free_prefix="bd")
    except LinearSolveError as exc:
        raise VnfError("negative deformation orders cannot be removed") from exc
    values = sub.member()  # remaining boundedness frees zeroed
    return {name: v for name, v in zip(fam.free_names, values)}


# ----------------------------------------------------------------------
# pre-normalization rewrites
# ----------------------------------------------------------------------

def pre_normalize_dim2(X: ParamMatrix) -> Tuple[ParamMatrix, ParamMatrix]:
    """Scale away an invertible lower-left entry:
    T0 = diag(-u^{-1}, 1) takes [[eps a, eps b], [u, eps d]] to the
    companion-like form with lower-left -1.  Returns (T0, X')."""
    u = X.at(1, 0)
    if u.is_zero():
        raise VnfError("lower-left entry is zero")
    ctx = X.ctx
    T0 = ParamMatrix(ctx, 2, 2, [
        -u.inverse() if ctx.mode != "ring" else TowerScalar.one(ctx) / u * (-1),
        TowerScalar.zero(ctx),
        TowerScalar.zero(ctx),
        TowerScalar.one(ctx),
    ])
    Xp = inverse(T0) * X * T0
    return T0, Xp


def pre_normalize_dim3(X: ParamMatrix, deformation: str) -> Tuple[ParamMatrix, ParamMatrix]:
    """Two-step rewrite for the three-dimensional deformed nilpotent:
    lower-triangular T0 built from the invertible subdiagonal entries,
    with the (3,3) entry derived from the requirement that the middle
    subdiagonal entry become -2.  Returns (T0, X')."""
    ctx = X.ctx
    zero = TowerScalar.zero(ctx)
    u21 = X.at(1, 0)
    u32 = X.at(2, 1)
    if u21.is_zero() or u32.is_zero():
        raise VnfError("subdiagonal entries must be invertible")
    a = u21
    b = -(u21 * u21)
    c = -(X.at(2, 0) * u21)
    # d from the (3,2)-entry requirement: [T0^{-1} X T0]_{32} = -2
    num = X.at(2, 1) * b + X.at(2, 2) * c - (c / b) * (X.at(1, 1) * b + X.at(1, 2) * c)
    d = num * Fraction(-1, 2)
    T0 = ParamMatrix(ctx, 3, 3, [a, zero, zero, zero, b, zero, zero, c, d])
    if det(T0).is_zero():
        raise VnfError("pre-normalization is singular")
    Xp = inverse(T0) * X * T0
    return T0, Xp


# ----------------------------------------------------------------------
# the pipeline
# ----------------------------------------------------------------------

@dataclass
class PipelineOptions:
    deformation: str = "eps"
    symplectic: Optional[SymplecticContext] = None
    directions: Optional[List[ParamMatrix]] = None
    param_names: Optional[List[str]] = None
    branch_rules: Optional[List[BranchRule]] = None
    costyle: str = "auto"  # auto | diag | near_identity
    pre_normalize: bool = False


def matrix_at_zero(M: ParamMatrix, var: str) -> ParamMatrix:
    """Entrywise limit at var=0 (series-based)."""
    return ParamMatrix(M.ctx, M.rows, M.cols, [value_at_zero(e, var) for e in M.entries])


def versal_pipeline(X: ParamMatrix, options: Optional[PipelineOptions] = None) -> VersalResult:
    """End-to-end linear stage: split the organizing center, build the
    triple and the ansatz, match invariants, and solve for the
    near-identity transformation."""
    opts = options or PipelineOptions()
    ctx = X.ctx
    if not ctx.has_param(opts.deformation):
        raise VnfError(f"unknown deformation parameter {opts.deformation!r}")
    pre_T: Optional[ParamMatrix] = None
    work = X
    if opts.pre_normalize:
        if X.rows == 2:
            pre_T, work = pre_normalize_dim2(X)
        elif X.rows == 3:
            pre_T, work = pre_normalize_dim3(X, opts.deformation)
        else:
            raise VnfError("pre-normalization is only provided for dimensions 2 and 3")
    center = work.substitute(opts.deformation, TowerScalar.zero(ctx))
    s0, n0 = sn_split(center)
    if n0.is_zero():
        triple = Sl2Triple(s0=s0, n0=n0, h0=ParamMatrix.zero(ctx, X.rows, X.rows),
                           m0=ParamMatrix.zero(ctx, X.rows, X.rows))
    else:
        try:
            triple = jacobson_morozov(s0, n0, sympl=opts.symplectic)
        except Exception:
            triple = jacobson_morozov(s0, n0)
    ansatz = build_ansatz(work, triple, sympl=opts.symplectic,
                          directions=opts.directions, param_names=opts.param_names,
                          center=center)
    assignments = match_charpoly(work, ansatz, rules=opts.branch_rules,
                                 deformation=opts.deformation)
    wide = ansatz.ctx
    for v in assignments.values():
        if v.ctx.extends(wide) and v.ctx != wide:
            wide = v.ctx
    xbar = ansatz.instance().lift_to(wide)
    for nm in ansatz.param_names:
        v = assignments[nm]
        xbar = xbar.substitute(nm, lift(v, xbar.ctx) if v.ctx != xbar.ctx else v)
    workw = work.lift_to(xbar.ctx)

    T: Optional[ParamMatrix] = None
    if opts.costyle in ("auto", "diag"):
        try:
            T = solve_transformation(workw, xbar, costyle="diag")
            T0 = matrix_at_zero(T, opts.deformation)
            if not (T0 - ParamMatrix.identity(T0.ctx, T0.rows)).is_zero():
                if opts.costyle == "diag":
                    raise VnfError("unit-diagonal member is not the identity at the center")
                T = None
        except (VnfError, LinearSolveError):
            if opts.costyle == "diag":
                raise
            T = None
    if T is None:
        T = solve_transformation(workw, xbar, costyle="near_identity",
                                 deformation=opts.deformation)
    residual = workw.lift_to(T.ctx) * T - T * xbar.lift_to(T.ctx)
    result = VersalResult(
        ansatz=ansatz,
        assignments=assignments,
        xbar=xbar,
        transformation=T,
        residual_zero=residual.is_zero(),
        det_T=det(T),
        triple=triple,
        pre_transformation=pre_T,
    )
    return result
