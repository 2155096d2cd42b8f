"""Self-contained drivers that rebuild the four worked examples end to
end and certify every reproducible identity.

Checks are driven by the defining equations; displayed formulas are
compared as secondary spot-checks, and single-token corrections forced
by the defining equations are applied where a display is internally
inconsistent (each such correction is labeled ``*_corrected``).
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .expr import (
    Context,
    ParameterDecl,
    TowerScalar,
    build_context,
    lift,
    parse_expression,
    series_expand,
)
from .expr.series import laurent_coeffs, value_at_zero
from .homological import normal_form_step, workspace
from .pmatrix import ParamMatrix, det, solve_linear
from .pvf import (
    GradedBasisElement2D,
    PolyVectorField,
    field_from_matrix,
    linear_basis_3d,
    nf_basis_3d,
    to_monomial_2d,
    from_span_2d,
    bracket_structure_2d,
)
from .sl2 import Sl2Triple, SymplecticContext, is_symplectic, jacobson_morozov, sn_split, transport_form
from .vnf import (
    build_ansatz,
    match_charpoly,
    matrix_at_zero,
    pre_normalize_dim2,
    pre_normalize_dim3,
    solve_transformation,
)


@dataclass
class CaseCheck:
    label: str
    kind: str  # symbolic_zero | numeric_residual | series_match | membership
    status: str  # pass | fail
    residual_bound: float = 0.0

    def as_dict(self) -> Dict:
        return {
            "label": self.label,
            "kind": self.kind,
            "status": self.status,
            "residual_bound": self.residual_bound,
        }


@dataclass
class CaseReport:
    case_name: str
    checks: List[CaseCheck] = field(default_factory=list)
    elapsed_seconds: float = 0.0

    def record(self, label: str, kind: str, ok: bool, residual: float = 0.0) -> None:
        self.checks.append(CaseCheck(label, kind, "pass" if ok else "fail", residual))

    @property
    def all_pass(self) -> bool:
        return all(c.status == "pass" for c in self.checks)

    def as_dict(self) -> Dict:
        return {
            "case": self.case_name,
            "status": "pass" if self.all_pass else "fail",
            "elapsed_seconds": round(self.elapsed_seconds, 3),
            "checks": [c.as_dict() for c in self.checks],
        }


# ----------------------------------------------------------------------
# two-dimensional nilpotent
# ----------------------------------------------------------------------

def dim2_problem(ctx: Optional[Context] = None):
    ctx = ctx or build_context(params=["eps", "m11", "m12", "m22"])
    X = ParamMatrix.from_rows(ctx, [["eps*m11", "eps*m12"], ["-1", "eps*m22"]])
    return ctx, X


def case_dim2(seed: int = 20240, samples: int = 20, tolerance: float = 1e-9) -> CaseReport:
    t_start = time.time()
    rep = CaseReport("dim2")
    ctx, X = dim2_problem()
    eps = parse_expression("eps", ctx)

    # organizing-center split and triple
    center = X.substitute("eps", TowerScalar.zero(ctx))
    s0, n0 = sn_split(center)
    rep.record("center_split_nilpotent", "symbolic_zero", s0.is_zero() and (n0 - center).is_zero())
    triple = jacobson_morozov(s0, n0)
    rep.record("sl2_relations", "symbolic_zero",
               all(r.is_zero() for r in triple.relation_residuals().values()))

    # pre-normalization of the tilde system with an invertible lower-left unit
    tctx = build_context(params=[ParameterDecl("eps"), ParameterDecl("tm11"),
                                 ParameterDecl("tm12"), ParameterDecl("tm21", is_unit=True),
                                 ParameterDecl("tm22")])
    Xt = ParamMatrix.from_rows(tctx, [["eps*tm11", "eps*tm12"], ["tm21", "eps*tm22"]])
    T0, Xp = pre_normalize_dim2(Xt)
    ok_shape = (Xp.at(1, 0) + TowerScalar.one(tctx)).is_zero() and \
        (Xp.at(0, 0) - parse_expression("eps*tm11", tctx)).is_zero() and \
        (Xp.at(0, 1) - parse_expression("-eps*tm12*tm21", tctx)).is_zero() and \
        (Xp.at(1, 1) - parse_expression("eps*tm22", tctx)).is_zero()
    rep.record("pre_transformation_shape", "symbolic_zero", ok_shape)

    # versal parameters
    ansatz = build_ansatz(X, triple, center=center)
    assignments = match_charpoly(X, ansatz, deformation="eps")
    ea = parse_expression("eps*(m11+m22)/2", ctx)
    eb = parse_expression("eps*m12 + eps^2*m11*m22 - eps^2*(m11+m22)^2/4", ctx)
    rep.record("eps_a_is_half_trace", "symbolic_zero", (assignments["eps_a"] - ea).is_zero())
    rep.record("eps_b_is_det_minus_quarter_trace_sq", "symbolic_zero",
               (assignments["eps_b"] - eb).is_zero())

    xbar = ansatz.instance()
    for nm in ansatz.param_names:
        xbar = xbar.substitute(nm, lift(assignments[nm], xbar.ctx))
    T = solve_transformation(X.lift_to(xbar.ctx), xbar, costyle="diag")
    rep.record("transformation_residual", "symbolic_zero",
               (X.lift_to(T.ctx) * T - T * xbar.lift_to(T.ctx)).is_zero())
    w = parse_expression("eps*(m22-m11)/2", ctx)
    # displayed entry value; the defining equation places it above the diagonal
    expect = ParamMatrix.from_rows(ctx, [["1", "0"], ["0", "1"]]).lift_to(T.ctx)
    expect = expect.with_entry(0, 1, lift(w, T.ctx))
    rep.record("transformation_entries_corrected", "symbolic_zero", (T - expect).is_zero())
    rep.record("transformation_identity_when_symmetric", "symbolic_zero",
               (matrix_at_zero(T.substitute("m22", parse_expression("m11", T.ctx)), "eps")
                - ParamMatrix.identity(T.ctx, 2)).is_zero()
               and (T.substitute("m22", parse_expression("m11", T.ctx))
                    - ParamMatrix.identity(T.ctx, 2)).is_zero())

    # eps_b spot value
    val = assignments["eps_b"].eval_numeric({"eps": 1.0, "m11": 0.0, "m22": 0.0, "m12": 1.0})
    rep.record("eps_b_unit_sample", "numeric_residual", abs(val - 1.0) < tolerance, abs(val - 1.0))

    # grade-1 universal normal form in trace/determinant form
    rep.checks.extend(_dim2_grade1_checks(tolerance))

    # bracket-table suite
    rng = random.Random(seed)
    bctx = build_context(params=[])
    ok_tables = True
    for _ in range(samples):
        fam1 = rng.choice(["A", "B"])
        fam2 = rng.choice(["A", "B"])
        k = rng.randint(0, 4)
        m = rng.randint(0, 4)
        e1 = GradedBasisElement2D(fam1, k, rng.randint(0, k) if fam1 == "A" else rng.randint(-1, k + 1))
        e2 = GradedBasisElement2D(fam2, m, rng.randint(0, m) if fam2 == "A" else rng.randint(-1, m + 1))
        lhs = to_monomial_2d(bctx, e1).bracket(to_monomial_2d(bctx, e2))
        rhs = PolyVectorField.zero(bctx, 2)
        for c, e in bracket_structure_2d(e1, e2):
            rhs = rhs + to_monomial_2d(bctx, e).scale(c)
        if not (lhs - rhs).is_zero():
            ok_tables = False
    rep.record("bracket_table_suite", "symbolic_zero", ok_tables)

    rep.elapsed_seconds = time.time() - t_start
    return rep


def dim2_universal_coefficients(ctx: Context) -> Dict[str, TowerScalar]:
    """The grade-1 normal-form coefficients computed from the defining
    equation, over parameters (ea, eb, a0, a1, bm1, b0, b1, b2)."""
    n0 = ParamMatrix.from_rows(ctx, [["0", "0"], ["-1", "0"]])
    triple = jacobson_morozov(ParamMatrix.zero(ctx, 2, 2), n0)
    ea = parse_expression("ea", ctx)
    eb = parse_expression("eb", ctx)
    vbar = field_from_matrix(ParamMatrix.identity(ctx, 2)).scale(ea) + \
        field_from_matrix(ParamMatrix.from_rows(ctx, [["0", "1"], ["0", "0"]])).scale(eb)
    X1 = PolyVectorField.zero(ctx, 2)
    for nm, fam, u in (("a0", "A", 0), ("a1", "A", 1), ("bm1", "B", -1),
                       ("b0", "B", 0), ("b1", "B", 1), ("b2", "B", 2)):
        X1 = X1 + to_monomial_2d(ctx, GradedBasisElement2D(fam, 1, u)).scale(parse_expression(nm, ctx))
    step = normal_form_step(triple, vbar, X1)
    coeffs = from_span_2d(step.xbar_k, 1)
    out = {"A0": coeffs[("A", 0)], "Bm1": coeffs[("B", -1)]}
    out["_step"] = step  # noqa: for reuse by the acceptance tests
    out["_triple"] = triple
    out["_vbar"] = vbar
    out["_X1"] = X1
    return out


def _dim2_grade1_checks(tolerance: float) -> List[CaseCheck]:
    checks: List[CaseCheck] = []
    ctx = build_context(params=["ea", "eb", "a0", "a1", "bm1", "b0", "b1", "b2"])
    data = dim2_universal_coefficients(ctx)
    step = data["_step"]
    triple = data["_triple"]
    vbar = data["_vbar"]
    X1 = data["_X1"]
    xbar0 = field_from_matrix(triple.s0 + triple.n0) + vbar
    ok_def = (xbar0.bracket(step.t_k) - (X1 - step.xbar_k)).is_zero()
    checks.append(CaseCheck("grade1_step_defining_identity", "symbolic_zero",
                            "pass" if ok_def else "fail"))
    ws = workspace(triple, 1)
    checks.append(CaseCheck("grade1_step_style_membership", "membership",
                            "pass" if ws.in_ker_m(step.xbar_k) else "fail"))
    # trace/determinant form: Tr = 2 ea, Det = ea^2 + eb
    expect_A = parse_expression("a0 + ea*a1", ctx)
    expect_B = parse_expression(
        "bm1 + (1/3)*ea*b0 + ((1/6)*ea^2 + (1/2)*eb)*b1 + ((1/6)*ea^3 + (7/6)*ea*eb)*b2", ctx)
    ok_A = (data["A0"] - expect_A).is_zero()
    ok_B = (data["Bm1"] - expect_B).is_zero()
    checks.append(CaseCheck("grade1_coefficients_defining_equation", "symbolic_zero",
                            "pass" if (ok_A and ok_B) else "fail"))
    return checks


# ----------------------------------------------------------------------
# three-dimensional irreducible nilpotent
# ----------------------------------------------------------------------

def dim3_problem(ctx: Optional[Context] = None):
    ctx = ctx or build_context(params=["eps", "m11", "m12", "m13", "m22", "m23", "m33"])
    X = ParamMatrix.from_rows(ctx, [
        ["eps*m11", "eps*m12", "eps*m13"],
        ["-1", "eps*m22", "eps*m23"],
        ["0", "-2", "eps*m33"],
    ])
    return ctx, X


# the transformation-coefficient lines of the triple-zero appendix that are
# verified against the solved generator (t_appendix = -t_engine; both gauges
# zero the same four coordinates)
DIM3_APPENDIX_LINES = {
    # coordinate (exponents, axis) -> displayed value with the free
    # coordinates set to zero, as an expression over (ea, eb, ec, a-params)
    ((1, 1, 0), 2): "a3_200",
    ((2, 0, 0), 0): "-a2_200",
    ((1, 1, 0), 0): "a1_200 - a2_200*ea",
    ((1, 0, 1), 2): "(1/2)*a3_110 + (1/2)*a3_200*ea",
    ((0, 2, 0), 1): "(1/3)*(a3_101 + a1_200 + a2_110 - (1/2)*a3_020"
                    " + (-a2_200 + (1/2)*a3_110)*ea - a3_200*eb + (1/2)*a3_200*ea^2)",
}

DIM3_A_PARAMS = [f"a{c+1}_{i}{j}{k}" for c in range(3)
                 for (i, j, k) in [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]]

DIM3_GAUGE_COORDS = [((2, 0, 0), 2), ((2, 0, 0), 1), ((0, 2, 0), 2), ((1, 1, 0), 1)]


def dim3_quadratic_step(ctx: Context):
    n0 = ParamMatrix.from_rows(ctx, [["0", "0", "0"], ["-1", "0", "0"], ["0", "-2", "0"]])
    triple = jacobson_morozov(ParamMatrix.zero(ctx, 3, 3), n0)
    lin = linear_basis_3d(ctx)
    vbar = (field_from_matrix(lin["A0"]).scale(parse_expression("ea", ctx))
            + field_from_matrix(lin["Bm1"]).scale(parse_expression("eb", ctx))
            + field_from_matrix(lin["Cm2"]).scale(parse_expression("ec", ctx)))
    X1 = PolyVectorField.zero(ctx, 3)
    for c in range(3):
        for e in [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]:
            X1 = X1 + PolyVectorField.single(ctx, 3, e, c,
                                             parse_expression(f"a{c+1}_{e[0]}{e[1]}{e[2]}", ctx))
    step = normal_form_step(triple, vbar, X1, zero_coords=DIM3_GAUGE_COORDS)
    return triple, vbar, X1, step


def case_dim3(seed: int = 20340, samples: int = 20, tolerance: float = 1e-9) -> CaseReport:
    t_start = time.time()
    rep = CaseReport("dim3")
    ctx, X = dim3_problem()

    # pre-normalization from the tilde system, with the scale entry derived
    tnames = [ParameterDecl("eps")] + [
        ParameterDecl(f"tm{i}{j}", is_unit=(i, j) in ((2, 1), (3, 2)))
        for i in range(1, 4) for j in range(1, 4)
    ]
    tctx = build_context(params=tnames)
    Xt = ParamMatrix.from_rows(tctx, [
        ["eps*tm11", "eps*tm12", "eps*tm13"],
        ["tm21", "eps*tm22", "eps*tm23"],
        ["eps*tm31", "tm32", "eps*tm33"],
    ])
    T0, Xp = pre_normalize_dim3(Xt, "eps")
    ok = (Xp.at(1, 0) + TowerScalar.one(tctx)).is_zero() and \
        (Xp.at(2, 1) + TowerScalar.const(tctx, 2)).is_zero() and \
        Xp.at(2, 0).is_zero()
    for (i, j) in ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)):
        # remaining entries carry the deformation factor
        q = Xp.at(i, j)
        ok = ok and (q.is_zero() or value_at_zero(q, "eps").is_zero())
    rep.record("pre_transformation_shape", "symbolic_zero", ok)

    center = X.substitute("eps", TowerScalar.zero(ctx))
    s0, n0 = sn_split(center)
    triple = jacobson_morozov(s0, n0)
    rep.record("sl2_relations", "symbolic_zero",
               all(r.is_zero() for r in triple.relation_residuals().values()))

    ansatz = build_ansatz(X, triple, center=center)
    assignments = match_charpoly(X, ansatz, deformation="eps")
    d1 = "(eps*(m11+m22+m33))"
    d2 = "(eps*(eps*m11*m22+eps*m11*m33+eps*m22*m33+m12+2*m23))"
    d3 = "(eps*(eps^2*m11*m22*m33+2*eps*m11*m23+eps*m12*m33+2*m13))"
    rep.record("eps_a_identity", "symbolic_zero",
               (assignments["eps_a"] - parse_expression(f"{d1}/3", ctx)).is_zero())
    rep.record("eps_b_identity", "symbolic_zero",
               (assignments["eps_b"] - parse_expression(f"{d2}/4 - {d1}^2/12", ctx)).is_zero())
    rep.record("eps_c_identity", "symbolic_zero",
               (assignments["eps_c"] - parse_expression(
                   f"{d3}/2 - {d1}*{d2}/6 + {d1}^3/27", ctx)).is_zero())
    ec_sample = assignments["eps_c"].eval_numeric(
        {"eps": 1.0, "m11": 0.0, "m12": 0.0, "m13": 1.0, "m22": 0.0, "m23": 0.0, "m33": 0.0})
    rep.record("eps_c_leading_sample", "numeric_residual",
               abs(ec_sample - 1.0) < tolerance, abs(ec_sample - 1.0))

    xbar = ansatz.instance()
    for nm in ansatz.param_names:
        xbar = xbar.substitute(nm, lift(assignments[nm], xbar.ctx))
    T = solve_transformation(X.lift_to(xbar.ctx), xbar, costyle="diag")
    rep.record("transformation_residual", "symbolic_zero",
               (X.lift_to(T.ctx) * T - T * xbar.lift_to(T.ctx)).is_zero())
    t1 = "eps*(m33+m22-2*m11)/3"
    t2 = ("5/36*eps^2*m11*(m11-m22-m33) - 1/36*eps^2*m22*(m22-7*m33) - 1/36*eps^2*m33^2"
          " + eps*m23/2 - eps*m12/4")
    t3 = "eps*(m33 - m22/2 - m11/2)/3"
    expect = ParamMatrix.from_rows(ctx, [["1", t1, t2], ["0", "1", t3], ["0", "0", "1"]])
    rep.record("transformation_entries", "symbolic_zero", (T - expect.lift_to(T.ctx)).is_zero())

    Tz = T
    for nm in ("m11", "m12", "m13", "m22", "m23", "m33"):
        Tz = Tz.substitute(nm, TowerScalar.zero(Tz.ctx))
    rep.record("transformation_identity_all_zero", "symbolic_zero",
               (Tz - ParamMatrix.identity(Tz.ctx, 3)).is_zero())

    # quadratic normal form
    qctx = build_context(params=["ea", "eb", "ec"] + DIM3_A_PARAMS)
    triple_q, vbar_q, X1, step = dim3_quadratic_step(qctx)
    xbar0 = field_from_matrix(triple_q.s0 + triple_q.n0) + vbar_q
    rep.record("quadratic_defining_identity", "symbolic_zero",
               (xbar0.bracket(step.t_k) - (X1 - step.xbar_k)).is_zero())
    ws = workspace(triple_q, 1)
    rep.record("quadratic_style_membership", "membership", ws.in_ker_m(step.xbar_k))
    nf = nf_basis_3d(qctx)
    names = list(nf)
    from .homological import _vec_field
    vecs = {n: _vec_field(nf[n], ws.keys, qctx) for n in names}
    xv = _vec_field(step.xbar_k, ws.keys, qctx)
    A = [[vecs[n][i] for n in names] for i in range(ws.n)]
    try:
        fam = solve_linear(A, xv, qctx)
        rep.record("quadratic_span_membership", "membership", fam.num_free == 0)
    except Exception:
        rep.record("quadratic_span_membership", "membership", False)

    # appendix transformation-coefficient lines: displayed values equal the
    # negated engine generator (their generator solves ad(xbar0) t = xbar - X)
    rng = random.Random(seed)
    worst = 0.0
    ok_lines = True
    sym_ok = True
    for coord, txt in DIM3_APPENDIX_LINES.items():
        expect_ts = parse_expression(txt, qctx)
        actual = -step.t_k.terms.get(coord, TowerScalar.zero(qctx))
        if not (actual - expect_ts).is_zero():
            sym_ok = False
        for _ in range(samples):
            assign = {p.name: rng.uniform(-1, 1) for p in qctx.params}
            r = abs(actual.eval_numeric(assign) - expect_ts.eval_numeric(assign))
            worst = max(worst, r)
            if r >= tolerance:
                ok_lines = False
    rep.record("appendix_lines_numeric", "numeric_residual", ok_lines, worst)
    rep.record("appendix_lines_symbolic", "symbolic_zero", sym_ok)

    rep.elapsed_seconds = time.time() - t_start
    return rep


# ----------------------------------------------------------------------
# sp(4): supported elastic pipe
# ----------------------------------------------------------------------

PIPE_T_POLYS = {
    1: "320*(29*p1+48*p2)+(1079*p1^2+11296*p1*p2-2304*p2^2)*eps"
       "+8*p1*p2*(233*p1-144*p2)*eps^2-144*eps^3*p2^2*p1^2",
    2: "1920*(3*p1+16*p2)+(1079*p1^2+15136*p1*p2-2304*p2^2)*eps"
       "+8*p1*p2*(233*p1-144*p2)*eps^2-144*eps^3*p2^2*p1^2",
    3: "12800*p1+(6519*p1^2+2336*p1*p2-2304*p2^2)*eps"
       "+8*p1*p2*(73*p1-144*p2)*eps^2-144*eps^3*p2^2*p1^2",
    4: "960*(17*p1-16*p2)-(6519*p1^2+6176*p1*p2-2304*p2^2)*eps"
       "-8*p1*p2*(73*p1-144*p2)*eps^2+144*eps^3*p2^2*p1^2",
    5: "320*(17*p1-16*p2)-(331*p1^2+12704*p1*p2-5376*p2^2)*eps"
       "-168*p1*p2*(17*p1-16*p2)*eps^2+336*eps^3*p2^2*p1^2",
    6: "960*(3*p1+16*p2)+(331*p1^2+15264*p1*p2-5376*p2^2)*eps"
       "+168*p1*p2*(17*p1-16*p2)*eps^2-336*eps^3*p2^2*p1^2",
}


def pipe_problem():
    ctx = build_context(params=["eps", "p1", "p2"], radicals=[("sqrt3", "3")])
    ctx = ctx.with_radical("rho", parse_expression("(4+eps*p1)*(3+4*eps*p2)/16", ctx))
    X = ParamMatrix.from_rows(ctx, [
        ["0", "rho", "1", "0"],
        ["-rho", "0", "0", "1"],
        ["eps*p1-rho^2+3", "0", "0", "rho"],
        ["0", "4*eps*p1-rho^2", "-rho", "0"],
    ])
    r = "sqrt3/2"
    n0 = ParamMatrix.from_rows(ctx, [
        ["0", r, "1", "0"], ["-" + r, "0", "0", "1"],
        ["9/4", "0", "0", r], ["0", "-3/4", "-" + r, "0"]])
    m0 = ParamMatrix.from_rows(ctx, [
        ["0", "-" + r, "1", "0"], [r, "0", "0", "-1/3"],
        ["9/4", "0", "0", "-" + r], ["0", "9/4", r, "0"]])
    return ctx, X, n0, m0


def case_pipe(seed: int = 20550, samples: int = 50, tolerance: float = 1e-10) -> CaseReport:
    t_start = time.time()
    rep = CaseReport("pipe")
    ctx, X, n0, m0 = pipe_problem()
    eps = parse_expression("eps", ctx)

    rep.record("nilpotency_fourth_power", "symbolic_zero",
               n0.power(4).is_zero() and m0.power(4).is_zero())
    rep.record("organizing_center_is_displayed_nilpotent", "symbolic_zero",
               (matrix_at_zero(X, "eps") - n0).is_zero())
    h0 = m0.commutator(n0)
    triple = Sl2Triple(s0=ParamMatrix.zero(ctx, 4, 4), n0=n0, h0=h0, m0=m0)
    rep.record("sl2_relations", "symbolic_zero",
               all(r.is_zero() for r in triple.relation_residuals().values()))

    # our own construction also yields a relation-true triple
    own = jacobson_morozov(ParamMatrix.zero(ctx, 4, 4), n0)
    rep.record("constructed_triple_relations", "symbolic_zero",
               all(r.is_zero() for r in own.relation_residuals().values()))

    V1 = m0.scale(-1)
    V2 = m0.power(3).scale(Fraction(-3, 2))  # displayed V2 with entry (4,2) = 81/8
    rep.record("nf_directions_in_style_kernel_corrected", "membership",
               m0.commutator(V1).is_zero() and m0.commutator(V2).is_zero())

    ansatz = build_ansatz(X, triple, directions=[V1, V2],
                          param_names=["eps_1", "eps_2"], center=n0)
    assignments = match_charpoly(X, ansatz, deformation="eps")
    e1d = parse_expression("1/5*eps*(2*p2 - 17/8*p1) + 1/10*p1*p2*eps^2", ctx)
    e2d = parse_expression(
        "1/86400*eps^2*(29*p1+48*p2)*(131*p1-48*p2)"
        " - 1/3600*eps*p1*(6*eps^3*p1*p2^2 - 51*eps^2*p1*p2 + 48*eps^2*p2^2 - 800)", ctx)
    rep.record("eps_1_identity", "symbolic_zero", (assignments["eps_1"] - e1d).is_zero())
    rep.record("eps_2_identity", "symbolic_zero", (assignments["eps_2"] - e2d).is_zero())
    p10 = assignments["eps_1"].substitute("p1", TowerScalar.zero(ctx))
    rep.record("eps_1_at_p1_zero", "symbolic_zero",
               (p10 - parse_expression("2/5*eps*p2", ctx)).is_zero())

    xbar = n0.lift_to(assignments["eps_1"].ctx)
    for nm, d in (("eps_1", V1), ("eps_2", V2)):
        xbar = xbar + d.scale(assignments[nm])
    wide = xbar.ctx

    # the displayed transformation; its two scaled diagonal entries read
    # rho(0)/rho where the display shows 1 (forced by the defining equation)
    ts = {k: parse_expression(v, ctx) for k, v in PIPE_T_POLYS.items()}
    s3 = parse_expression("sqrt3", ctx)
    rho = parse_expression("rho", ctx)
    inv_rho = rho.inverse()
    one = TowerScalar.one(ctx)
    zero = TowerScalar.zero(ctx)
    diag0 = s3 * inv_rho * Fraction(1, 2)
    T = ParamMatrix(ctx, 4, 4, [
        one, zero, zero, zero,
        zero, diag0 + s3 * inv_rho * eps * ts[1] * Fraction(1, 76800),
        -inv_rho * eps * ts[2] * Fraction(1, 115200), zero,
        zero, s3 * eps * ts[3] * Fraction(1, 76800),
        one + eps * ts[4] * Fraction(1, 115200), zero,
        inv_rho * eps * ts[5] * Fraction(1, 25600), zero, zero,
        diag0 + s3 * inv_rho * eps * ts[6] * Fraction(1, 115200),
    ]).lift_to(wide)
    res = X.lift_to(wide) * T - T * xbar
    rep.record("transformation_residual_corrected", "symbolic_zero", res.is_zero())
    rep.record("transformation_identity_at_center", "symbolic_zero",
               (matrix_at_zero(T, "eps") - ParamMatrix.identity(wide, 4)).is_zero())

    # organizing center: eps = 0 gives T = I, xbar = n0
    rep.record("xbar_is_center_at_zero", "symbolic_zero",
               (matrix_at_zero(xbar, "eps") - n0.lift_to(wide)).is_zero())

    # symplectic transport on this instance
    omega = ParamMatrix.from_rows(ctx, [
        ["0", "0", "1", "0"], ["0", "0", "0", "1"],
        ["-1", "0", "0", "0"], ["0", "-1", "0", "0"]]).lift_to(wide)
    sc = SymplecticContext(omega)
    rep.record("input_is_symplectic", "symbolic_zero", is_symplectic(sc, X.lift_to(wide)))
    sc2 = transport_form(sc, T)
    rep.record("transport_lemma_instance", "symbolic_zero", is_symplectic(sc2, xbar))

    # transport on random numeric pairs
    rng = random.Random(seed)
    nctx = build_context(params=[])
    on = ParamMatrix.from_rows(nctx, [
        ["0", "0", "1", "0"], ["0", "0", "0", "1"],
        ["-1", "0", "0", "0"], ["0", "-1", "0", "0"]])
    worst = 0.0
    okr = True
    for _ in range(samples):
        A = [[Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(2)] for _ in range(2)]
        B = [[Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(2)] for _ in range(2)]
        C = [[Fraction(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(2)] for _ in range(2)]
        B = [[B[0][0], B[0][1]], [B[0][1], B[1][1]]]
        C = [[C[0][0], C[0][1]], [C[0][1], C[1][1]]]
        ham = [[A[0][0], A[0][1], B[0][0], B[0][1]],
               [A[1][0], A[1][1], B[1][0], B[1][1]],
               [C[0][0], C[0][1], -A[0][0], -A[1][0]],
               [C[1][0], C[1][1], -A[0][1], -A[1][1]]]
        Xr = ParamMatrix.from_rows(nctx, ham)
        while True:
            Tr = ParamMatrix.from_rows(
                nctx, [[Fraction(rng.randint(-3, 3)) for _ in range(4)] for _ in range(4)])
            if not det(Tr).is_zero():
                break
        Xbr = inverse_times(Tr, Xr)
        oc = SymplecticContext(on)
        oc2 = transport_form(oc, Tr)
        lhs = Xbr.transpose() * oc2.omega + oc2.omega * Xbr
        m = max(abs(float(x.rational_value())) for x in lhs.entries) if not lhs.is_zero() else 0.0
        worst = max(worst, m)
        if m > tolerance:
            okr = False
    rep.record("transport_lemma_random", "numeric_residual", okr, worst)

    rep.elapsed_seconds = time.time() - t_start
    return rep


def inverse_times(T: ParamMatrix, X: ParamMatrix) -> ParamMatrix:
    from .pmatrix import inverse
    return inverse(T) * X * T


# ----------------------------------------------------------------------
# the L4 singularity
# ----------------------------------------------------------------------

def l4_problem(extra_params: Tuple[str, ...] = ()):
    ctx = build_context(params=["eps", *extra_params], radicals=[
        ("sqrt2", "2"),
        ("alpha1", "-(3*eps-6+4*sqrt2)*(3*eps+6+4*sqrt2)"),
        ("alpha2", "4+2*alpha1"),
    ])
    s0 = ParamMatrix.from_rows(ctx, [
        ["0", "-sqrt2/2", "0", "0"], ["sqrt2/2", "0", "0", "0"],
        ["0", "0", "0", "-sqrt2/2"], ["0", "0", "sqrt2/2", "0"]])
    n0 = ParamMatrix.from_rows(ctx, [
        ["0", "0", "0", "0"], ["0", "0", "0", "0"],
        ["-1", "0", "0", "0"], ["0", "-1", "0", "0"]])
    D = ParamMatrix.from_rows(ctx, [
        ["0", "3/4-3/8*sqrt2", "-3/2+3/4*sqrt2", "0"],
        ["-3/4-3/8*sqrt2", "0", "0", "3/2+3/4*sqrt2"],
        ["-3/8-3/16*sqrt2", "0", "0", "3/4+3/8*sqrt2"],
        ["0", "3/8-3/16*sqrt2", "-3/4+3/8*sqrt2", "0"]])
    X = s0 + n0 + D.scale(parse_expression("eps", ctx))
    return ctx, X, s0, n0, D


def _l4_family(ctx, X, xbar):
    """The near-identity generator family of the L4 problem, parametrized
    by the four top-left entries (times alpha1+6), solved from the
    defining equation."""
    if xbar.ctx.extends(ctx) and xbar.ctx != ctx:
        ctx = xbar.ctx
    X = X.lift_to(ctx)
    xbar = xbar.lift_to(ctx)
    eps = parse_expression("eps", ctx)
    zero = TowerScalar.zero(ctx)
    one = TowerScalar.one(ctx)
    n = 4
    order = [(i, j) for i in range(n - 1, -1, -1) for j in range(n - 1, -1, -1)]
    col_of = {p: k for k, p in enumerate(order)}
    base_rows = []
    base_rhs = []
    diff = xbar - X
    for i in range(n):
        for j in range(n):
            row = [zero] * (n * n)
            for k in range(n):
                row[col_of[(k, j)]] = row[col_of[(k, j)]] + eps * X.at(i, k)
            for l in range(n):
                row[col_of[(i, l)]] = row[col_of[(i, l)]] - eps * xbar.at(l, j)
            base_rows.append(row)
            base_rhs.append(diff.at(i, j))
    pins = [(0, 0), (0, 1), (1, 0), (1, 1)]

    def pinned(rhs_main, pin_vals):
        rows = [list(r) for r in base_rows]
        rhs = list(rhs_main)
        for pos, v in zip(pins, pin_vals):
            row = [zero] * (n * n)
            row[col_of[pos]] = one
            rows.append(row)
            rhs.append(v)
        fam = solve_linear(rows, rhs, ctx)
        if fam.num_free:
            raise RuntimeError("family gauge did not pin the freedom")
        sol = fam.member()
        return ParamMatrix(ctx, 4, 4, [sol[col_of[(i, j)]] for i in range(4) for j in range(4)])

    t_base = pinned(base_rhs, [zero] * 4)
    dirs = [pinned([zero] * len(base_rhs),
                   [one if i == k else zero for i in range(4)]) for k in range(4)]
    return t_base, dirs


def case_l4(seed: int = 20660, samples: int = 20, tolerance: float = 1e-6) -> CaseReport:
    t_start = time.time()
    rep = CaseReport("l4")
    ctx, X, s0, n0, D = l4_problem()
    eps = parse_expression("eps", ctx)

    # bifurcation-point substitution: (4 sqrt2 - 3 delta) at delta = 4 sqrt2/3 + eps
    # reproduces the deformed system (gamma only enters through its square)
    g2 = parse_expression("1-sqrt2/2", ctx)
    inv_g2 = g2.inverse()
    M = ParamMatrix(ctx, 4, 4, [
        TowerScalar.zero(ctx), -g2 * Fraction(1, 4), g2 * Fraction(1, 2), TowerScalar.zero(ctx),
        inv_g2 * Fraction(1, 8), TowerScalar.zero(ctx), TowerScalar.zero(ctx), -inv_g2 * Fraction(1, 4),
        inv_g2 * Fraction(1, 16), TowerScalar.zero(ctx), TowerScalar.zero(ctx), -inv_g2 * Fraction(1, 8),
        TowerScalar.zero(ctx), -g2 * Fraction(1, 8), g2 * Fraction(1, 4), TowerScalar.zero(ctx),
    ])
    X_from_delta = s0 + n0 + M.scale(eps * Fraction(-3))
    rep.record("bifurcation_point_substitution", "symbolic_zero", (X_from_delta - X).is_zero())

    center = s0 + n0
    s0c, n0c = sn_split(center)
    rep.record("center_split_matches_display", "symbolic_zero",
               (s0c - s0).is_zero() and (n0c - n0).is_zero())
    triple = jacobson_morozov(s0c, n0c)
    rep.record("sl2_relations", "symbolic_zero",
               all(r.is_zero() for r in triple.relation_residuals().values()))

    # style-kernel deformation directions (the nilpotent-direction display is
    # inconsistent with the matched characteristic polynomial; the kernel
    # direction, the raising block, is forced)
    DN = ParamMatrix.from_rows(ctx, [
        ["0", "0", "1", "0"], ["0", "0", "0", "1"],
        ["0", "0", "0", "0"], ["0", "0", "0", "0"]])
    DS = s0.scale(parse_expression("-sqrt2", ctx))
    rep.record("nf_directions_in_style_kernel", "membership",
               triple.m0.commutator(DN).is_zero() and triple.m0.commutator(DS).is_zero()
               and triple.s0.commutator(DN).is_zero())

    ansatz = build_ansatz(X, triple, directions=[DS, DN],
                          param_names=["eps_s", "eps_n"], center=center)
    assignments = match_charpoly(X, ansatz, deformation="eps")
    en, es = assignments["eps_n"], assignments["eps_s"]
    rep.record("eps_n_closed_form", "symbolic_zero",
               (en - parse_expression("1/4 - alpha1/8", ctx)).is_zero())
    rep.record("eps_s_closed_form", "symbolic_zero",
               (es - parse_expression("(sqrt2 - alpha2/2)/2", ctx)).is_zero())
    r2 = parse_expression("sqrt2", ctx)
    rep.record("root_equation_coupling", "symbolic_zero",
               (es * (r2 - es) * 2 - en * 2).is_zero())
    rep.record("root_equation_radical", "symbolic_zero",
               ((en * 4 - 1) ** 2
                - parse_expression("-(3*eps-6+4*sqrt2)*(3*eps+6+4*sqrt2)/4", ctx)).is_zero())
    rep.record("roots_vanish_at_center", "symbolic_zero",
               en.substitute("eps", TowerScalar.zero(ctx)).is_zero()
               and es.substitute("eps", TowerScalar.zero(ctx)).is_zero())

    # series expansions
    ser_n = series_expand(en, "eps", 2)
    ser_s = series_expand(es, "eps", 2)
    okn = ser_n[0].is_zero() and \
        (ser_n[1] - parse_expression("3*sqrt2/4", ctx)).is_zero() and \
        (ser_n[2] - parse_expression("81/32", ctx)).is_zero()
    oks = ser_s[0].is_zero() and \
        (ser_s[1] - parse_expression("3/4", ctx)).is_zero() and \
        (ser_s[2] - parse_expression("99*sqrt2/64", ctx)).is_zero()
    rep.record("epsN_series_order2", "series_match", okn)
    rep.record("epsS_series_order2", "series_match", oks)

    # reality interval endpoints
    lo = parse_expression("(-6-4*sqrt2)/3", ctx).eval_numeric({"eps": 0.0})
    hi = parse_expression("(6-4*sqrt2)/3", ctx).eval_numeric({"eps": 0.0})
    ok_lo = abs(lo + 3.885618082) < tolerance
    ok_hi = abs(hi - 0.114381918) < tolerance
    rep.record("reality_interval_endpoints", "numeric_residual", ok_lo and ok_hi,
               max(abs(lo + 3.885618082), abs(hi - 0.114381918)))

    # the transformation family with the four free top-left entries
    xbar = center.lift_to(es.ctx) + DS.scale(es) + DN.scale(en)
    t_base, dirs = _l4_family(ctx, X, xbar)
    wide = t_base.ctx
    xbar = xbar.lift_to(wide)
    Xw = X.lift_to(wide)
    I4 = ParamMatrix.identity(wide, 4)

    # negative deformation orders vanish exactly on t2 = -t5 and
    # t1 = t6 + 18/(alpha1+6) for the raw entries u_i = t_i/(alpha1+6);
    # the shift collapses to 9/4 at the organizing center
    pref = parse_expression("alpha1+6", wide)
    constraint_vectors = []
    sdirs = [d.scale(pref.inverse()) for d in dirs]  # per unit of the constant t_i
    for i in range(16):
        base_neg = {k: v for k, v in laurent_coeffs(t_base.entries[i], "eps", -1).items() if k < 0}
        dir_negs = [{k: v for k, v in laurent_coeffs(d.entries[i], "eps", -1).items() if k < 0}
                    for d in sdirs]
        orders = set(base_neg)
        for sd in dir_negs:
            orders.update(sd)
        for k in sorted(orders):
            row = [sd.get(k, TowerScalar.zero(wide)) for sd in dir_negs]
            rhs = -base_neg.get(k, TowerScalar.zero(wide))
            constraint_vectors.append((row, rhs))
    rows = [r for r, _ in constraint_vectors]
    rhs = [b for _, b in constraint_vectors]
    fam = solve_linear(rows, rhs, wide, free_prefix="c")
    # bounded members satisfy t2 = -t5 and t1 = t6 + 18 exactly
    ok_constraints = fam.num_free == 2
    if ok_constraints:
        for assign in ([TowerScalar.zero(wide), TowerScalar.zero(wide)],
                       [TowerScalar.one(wide), TowerScalar.const(wide, 2)]):
            member = fam.member(dict(zip(fam.free_names, assign)))
            t1v, t2v, t5v, t6v = member
            if not (t2v + t5v).is_zero() or not (t1v - t6v - 18).is_zero():
                ok_constraints = False
    rep.record("boundedness_constraints", "symbolic_zero", ok_constraints)
    # the affine shift collapses to the displayed 9/4 at the center:
    # raw entries differ by 18/(alpha1+6) -> 9/4
    shift0 = value_at_zero(pref.inverse() * 18, "eps")
    rep.record("boundedness_shift_collapses_to_displayed", "symbolic_zero",
               (shift0 - TowerScalar.const(wide, Fraction(9, 4))).is_zero())

    # final free-costyle gauge: zero the free entries u1, u2, hence
    # u5 = 0 and u6 = -18/(alpha1+6) (raw entry limit -9/4)
    u = [TowerScalar.zero(wide), TowerScalar.zero(wide), TowerScalar.zero(wide),
         pref.inverse() * (-18)]
    t0m = t_base
    for uk, d in zip(u, dirs):
        if not uk.is_zero():
            t0m = t0m + d.scale(uk)
    T = I4 + t0m.scale(parse_expression("eps", wide))
    rep.record("final_transformation_residual", "symbolic_zero",
               (Xw * T - T * xbar).is_zero())
    rep.record("final_transformation_near_identity", "symbolic_zero",
               (matrix_at_zero(T, "eps") - I4).is_zero())
    # negative orders of the generator vanish after the constraints
    neg_all = True
    for e in t0m.entries:
        if any(k < 0 and not v.is_zero()
               for k, v in laurent_coeffs(e, "eps", -1).items()):
            neg_all = False
    rep.record("generator_bounded_after_constraints", "symbolic_zero", neg_all)
    # the pinned block of the generator tends to a single entry -9/4
    lim = matrix_at_zero(t0m, "eps")
    block_ok = lim.at(0, 0).is_zero() and lim.at(0, 1).is_zero() and lim.at(1, 0).is_zero() \
        and (lim.at(1, 1) - TowerScalar.const(wide, Fraction(-9, 4))).is_zero()
    rep.record("generator_limit_block_single_entry", "symbolic_zero", block_ok)

    rep.elapsed_seconds = time.time() - t_start
    return rep


CASES = {
    "dim2": case_dim2,
    "dim3": case_dim3,
    "pipe": case_pipe,
    "l4": case_l4,
}


def run_cases(names: List[str], **kwargs) -> List[CaseReport]:
    return [CASES[n](**kwargs) for n in names]
