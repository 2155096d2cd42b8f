"""Command-line front end.

Subcommands:
  analyze  PROBLEM.json   full pipeline, JSON report
  verify   [case|all]     run the built-in example drivers
  series   PROBLEM.json   series expansion of the versal parameters

Exit codes: 0 success, 1 failed verification checks, 2 input/parse
errors, 3 pipeline errors, 4 resonance detected at the requested probe.
Set VNF_COLOR=0 to disable ANSI colors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Dict, List, Optional

from .cases import CASES
from .expr import (
    Context,
    ExprError,
    ParameterDecl,
    ParseError,
    build_context,
    lift,
    parse_expression,
    series_expand,
)
from .homological import (
    HomologicalError,
    ResonanceError,
    find_resonances,
    graded_normal_form,
    reduction_operator,
    resonance_detect,
)
from .pmatrix import ParamMatrix
from .pvf import PolyVectorField, field_from_matrix, pullback_linear
from .sl2 import SymplecticContext
from .vnf import BranchRule, PipelineOptions, VnfError, versal_pipeline

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_INPUT = 2
EXIT_PIPELINE = 3
EXIT_RESONANCE = 4


class InputError(Exception):
    pass


def _color(text: str, code: str) -> str:
    if os.environ.get("VNF_COLOR", "1") == "0" or not sys.stdout.isatty():
        return text
    return f"\x1b[{code}m{text}\x1b[0m"


# ----------------------------------------------------------------------
# problem ingestion
# ----------------------------------------------------------------------

def load_problem(path: str, mode_override: Optional[str] = None) -> Dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read problem file: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("problem document must be a JSON object")
    for key in ("dimension", "parameters", "deformation", "matrix"):
        if key not in doc:
            raise InputError(f"missing required field {key!r}")
    dim = doc["dimension"]
    matrix = doc["matrix"]
    if not (isinstance(matrix, list) and len(matrix) == dim
            and all(isinstance(r, list) and len(r) == dim for r in matrix)):
        raise InputError("matrix must be dimension x dimension")
    params = []
    for p in doc["parameters"]:
        if isinstance(p, str):
            params.append(ParameterDecl(p))
        else:
            params.append(ParameterDecl(p["name"], bool(p.get("is_unit", False))))
    mode = mode_override or doc.get("mode", "field")
    try:
        ctx = build_context(params=params,
                            radicals=[(r["name"], r["radicand"]) for r in doc.get("radicals", [])],
                            mode=mode)
    except ExprError as exc:
        raise InputError(f"bad context declaration: {exc}") from exc
    if not ctx.has_param(doc["deformation"]):
        raise InputError(f"deformation parameter {doc['deformation']!r} is not declared")
    try:
        X = ParamMatrix.from_rows(ctx, matrix)
        ctx = X.ctx
        sympl = None
        if doc.get("symplectic_form"):
            omega = ParamMatrix.from_rows(ctx, doc["symplectic_form"])
            ctx = omega.ctx
            sympl = SymplecticContext(omega)
        directions = None
        if doc.get("ansatz_directions"):
            directions = [ParamMatrix.from_rows(ctx, rows) for rows in doc["ansatz_directions"]]
            for d in directions:
                ctx = d.ctx if d.ctx.extends(ctx) else ctx
        nonlinear = []
        for term in doc.get("nonlinear", []):
            exps = tuple(term["exponents"])
            coord = int(term["coordinate"])
            if len(exps) != dim or not 0 <= coord < dim:
                raise InputError("malformed nonlinear term")
            nonlinear.append((exps, coord, parse_expression(term["expression"], ctx)))
    except ParseError as exc:
        raise InputError(f"expression error: {exc}") from exc
    rules = []
    for r in doc.get("branch_rules", []):
        rules.append(BranchRule(strategy=r.get("strategy", "vanish_at_zero"),
                                name=r.get("name"), sign=int(r.get("sign", 1)),
                                sample=r.get("sample")))
    return {
        "ctx": ctx,
        "dimension": dim,
        "deformation": doc["deformation"],
        "X": X.lift_to(ctx) if X.ctx != ctx else X,
        "sympl": sympl,
        "directions": directions,
        "ansatz_names": doc.get("ansatz_names"),
        "nonlinear": nonlinear,
        "truncation_grade": int(doc.get("truncation_grade", 0)),
        "branch_rules": rules or None,
        "costyle": doc.get("costyle", "auto"),
        "pre_normalize": bool(doc.get("pre_normalize", False)),
        "resonance_probe": doc.get("resonance_probe"),
    }


# ----------------------------------------------------------------------
# report serialization
# ----------------------------------------------------------------------

def _matrix_text(M: ParamMatrix) -> List[List[str]]:
    return [[M.at(i, j).to_text() for j in range(M.cols)] for i in range(M.rows)]


def _context_decl(ctx: Context) -> Dict:
    return {
        "parameters": [{"name": p.name, "is_unit": p.is_unit} for p in ctx.params],
        "radicals": [{"name": r.name, "radicand": lift(r.radicand, ctx).to_text()}
                     for r in ctx.tower],
    }


def cmd_analyze(args) -> int:
    try:
        prob = load_problem(args.problem, args.mode)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        opts = PipelineOptions(
            deformation=prob["deformation"],
            symplectic=prob["sympl"],
            directions=prob["directions"],
            param_names=prob["ansatz_names"],
            branch_rules=prob["branch_rules"],
            costyle=prob["costyle"],
            pre_normalize=prob["pre_normalize"],
        )
        result = versal_pipeline(prob["X"], opts)
        wide = result.transformation.ctx
        report = {
            "dimension": prob["dimension"],
            "deformation": prob["deformation"],
            "context": _context_decl(wide),
            "sl2": {
                "s0": _matrix_text(result.triple.s0),
                "n0": _matrix_text(result.triple.n0),
                "h0": _matrix_text(result.triple.h0),
                "m0": _matrix_text(result.triple.m0),
            },
            "ansatz_directions": [_matrix_text(d) for d in result.ansatz.directions],
            "assignments": {k: v.to_text() for k, v in result.assignments.items()},
            "xbar": _matrix_text(result.xbar),
            "transformation": _matrix_text(result.transformation),
            "det_T": result.det_T.to_text(),
            "residual_zero": result.residual_zero,
            "grades": [],
        }
        if result.pre_transformation is not None:
            report["pre_transformation"] = _matrix_text(result.pre_transformation)

        if prob["nonlinear"] and prob["truncation_grade"] >= 1:
            ctx = wide
            V = PolyVectorField.zero(ctx, prob["dimension"])
            for exps, coord, coeff in prob["nonlinear"]:
                V = V + PolyVectorField(ctx, prob["dimension"],
                                        {(exps, coord): lift(coeff, ctx)})
            V = pullback_linear(V, result.transformation)
            steps = graded_normal_form(result.triple, result.xbar, V,
                                       prob["truncation_grade"])
            for k, step in enumerate(steps, start=1):
                report["grades"].append({
                    "grade": k,
                    "normal_form": {
                        f"{key[0]}@{key[1]}": c.to_text()
                        for key, c in sorted(step.xbar_k.terms.items())
                    },
                    "generator": {
                        f"{key[0]}@{key[1]}": c.to_text()
                        for key, c in sorted(step.t_k.terms.items())
                    },
                })

        probe = prob["resonance_probe"]
        if probe:
            triple = result.triple
            vbar = field_from_matrix(result.xbar) - field_from_matrix(triple.s0 + triple.n0)
            roots_found = []
            for k in range(1, max(1, prob["truncation_grade"]) + 1):
                khat = reduction_operator(triple, vbar, k)
                dts = resonance_detect(khat)
                roots = find_resonances(dts, prob["deformation"],
                                        float(probe.get("lo", -1.0)),
                                        float(probe.get("hi", 1.0)),
                                        int(probe.get("samples", args.samples)),
                                        tol=args.tolerance)
                roots_found.extend((k, r) for r in roots)
            report["resonances"] = [{"grade": k, "value": r} for k, r in roots_found]
            if roots_found:
                _emit(report, args.out)
                print("resonance detected at the requested probe", file=sys.stderr)
                return EXIT_RESONANCE
        _emit(report, args.out)
        return EXIT_OK
    except ResonanceError as exc:
        print(f"resonance: {exc}", file=sys.stderr)
        return EXIT_RESONANCE
    except (VnfError, HomologicalError, ExprError) as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


def _emit(report: Dict, out: Optional[str]) -> None:
    payload = json.dumps(report, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)


def cmd_verify(args) -> int:
    names = list(CASES) if args.case == "all" else [args.case]
    if any(n not in CASES for n in names):
        print(f"unknown case {args.case!r}; choose from {', '.join(CASES)} or 'all'",
              file=sys.stderr)
        return EXIT_INPUT
    reports = []
    ok = True
    for n in names:
        # tolerances stay at each case's documented default
        rep = CASES[n](seed=args.seed, samples=args.samples)
        reports.append(rep.as_dict())
        status = _color("pass", "32") if rep.all_pass else _color("FAIL", "31")
        print(f"[{status}] {n} ({rep.elapsed_seconds:.1f}s)", file=sys.stderr)
        for c in rep.checks:
            if c.status != "pass":
                print(f"    failing check: {c.label}", file=sys.stderr)
        ok = ok and rep.all_pass
    _emit({"cases": reports}, args.out)
    return EXIT_OK if ok else EXIT_CHECKS_FAILED


def cmd_series(args) -> int:
    try:
        prob = load_problem(args.problem, args.mode)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        opts = PipelineOptions(
            deformation=prob["deformation"],
            symplectic=prob["sympl"],
            directions=prob["directions"],
            param_names=prob["ansatz_names"],
            branch_rules=prob["branch_rules"],
            costyle=prob["costyle"],
            pre_normalize=prob["pre_normalize"],
        )
        result = versal_pipeline(prob["X"], opts)
        var = args.var or prob["deformation"]
        out = {}
        for name, value in result.assignments.items():
            coeffs = series_expand(value, var, args.order)
            out[name] = [c.to_text() for c in coeffs]
            terms = []
            for k, c in enumerate(coeffs):
                if not c.is_zero():
                    piece = c.to_text()
                    if k == 0:
                        terms.append(piece)
                    elif k == 1:
                        terms.append(f"({piece})*{var}")
                    else:
                        terms.append(f"({piece})*{var}^{k}")
            expansion = " + ".join(terms) if terms else "0"
            print(f"{name} = {expansion} + O({var}^{args.order + 1})")
        if args.out:
            _emit(out, args.out)
        return EXIT_OK
    except (VnfError, HomologicalError, ExprError) as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--mode", choices=["field", "ring"], default=None,
                        help="scalar division discipline (default: problem file or field)")
    common.add_argument("--order", type=int, default=3, help="series truncation order")
    common.add_argument("--seed", type=int, default=20240, help="seed for randomized checks")
    common.add_argument("--samples", type=int, default=20, help="sample count for numeric checks")
    common.add_argument("--out", default=None, help="write the JSON report to this path")
    common.add_argument("--tolerance", type=float, default=1e-9, help="numeric tolerance")

    ap = argparse.ArgumentParser(prog="versalnf", parents=[common],
                                 description="Exact versal normal forms of parametric linear vector fields")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common],
                       help="run the full pipeline on a problem file")
    p.add_argument("problem")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", aliases=["verify-paper", "verify-cases"], parents=[common],
                       help="replay the built-in worked examples")
    p.add_argument("case", nargs="?", default="all")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("series", parents=[common],
                       help="series-expand the versal parameters")
    p.add_argument("problem")
    p.add_argument("--var", default=None)
    p.set_defaults(func=cmd_series)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
