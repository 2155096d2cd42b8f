"""Polynomial vector fields in the monomial representation.

The star product P_i d_i * P_j d_j = P_i (dP_j/dx_i) d_j generates the
Lie bracket; grading assigns degree |exponent| - 1 to a term.  The 2D
graded basis families and the 3D degree-2 coefficient dictionaries are
defined here, with the monomial representation as the authority for all
structure constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .expr import Context, ExprError, TowerScalar, lift
from .pmatrix import ParamMatrix, solve_linear

TermKey = Tuple[Tuple[int, ...], int]


class PolyVectorField:
    """dimension-d polynomial vector field: (exponents, coordinate) -> scalar."""

    __slots__ = ("ctx", "dim", "terms")

    def __init__(self, ctx: Context, dim: int, terms: Dict[TermKey, TowerScalar], *, _clean: bool = False):
        self.ctx = ctx
        self.dim = dim
        if _clean:
            self.terms = terms
        else:
            clean: Dict[TermKey, TowerScalar] = {}
            for (e, i), c in terms.items():
                if len(e) != dim or not 0 <= i < dim:
                    raise ValueError("malformed term key")
                c = lift(c, ctx) if c.ctx != ctx else c
                if not c.is_zero():
                    clean[(tuple(e), i)] = c
            self.terms = clean

    @classmethod
    def zero(cls, ctx: Context, dim: int) -> "PolyVectorField":
        return cls(ctx, dim, {}, _clean=True)

    @classmethod
    def single(cls, ctx: Context, dim: int, exps: Sequence[int], coord: int, coeff) -> "PolyVectorField":
        if not isinstance(coeff, TowerScalar):
            coeff = TowerScalar.const(ctx, Fraction(coeff))
        return cls(ctx, dim, {(tuple(exps), coord): coeff})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        return (self - other).is_zero()

    def _coerce(self, other: "PolyVectorField") -> Tuple["PolyVectorField", "PolyVectorField"]:
        if self.ctx == other.ctx:
            return self, other
        if self.ctx.extends(other.ctx):
            return self, other.lift_to(self.ctx)
        return self.lift_to(other.ctx), other

    def lift_to(self, ctx: Context) -> "PolyVectorField":
        return PolyVectorField(ctx, self.dim, {k: lift(c, ctx) for k, c in self.terms.items()}, _clean=True)

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        a, b = self._coerce(other)
        out = dict(a.terms)
        for k, c in b.terms.items():
            s = out.get(k)
            s = c if s is None else s + c
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return PolyVectorField(a.ctx, a.dim, out, _clean=True)

    def __neg__(self) -> "PolyVectorField":
        return PolyVectorField(self.ctx, self.dim, {k: -c for k, c in self.terms.items()}, _clean=True)

    def __sub__(self, other: "PolyVectorField") -> "PolyVectorField":
        return self + (-other)

    def scale(self, c) -> "PolyVectorField":
        if not isinstance(c, TowerScalar):
            c = TowerScalar.const(self.ctx, Fraction(c))
        ctx = c.ctx if c.ctx.extends(self.ctx) else self.ctx
        out = {}
        for k, v in self.terms.items():
            p = v * c
            if not p.is_zero():
                out[k] = p
        return PolyVectorField(ctx, self.dim, out, _clean=True)

    # -- grading ---------------------------------------------------------
    def grades(self) -> List[int]:
        return sorted({sum(e) - 1 for (e, _i) in self.terms})

    def grade_part(self, k: int) -> "PolyVectorField":
        return PolyVectorField(
            self.ctx, self.dim,
            {key: c for key, c in self.terms.items() if sum(key[0]) - 1 == k},
            _clean=True,
        )

    def is_homogeneous(self, k: int) -> bool:
        return all(sum(e) - 1 == k for (e, _i) in self.terms)

    # -- products ----------------------------------------------------------
    def star(self, other: "PolyVectorField") -> "PolyVectorField":
        """P_i d_i * Q_j d_j = P_i (dQ_j/dx_i) d_j."""
        a, b = self._coerce(other)
        if a.dim != b.dim:
            raise ValueError("dimension mismatch")
        out: Dict[TermKey, TowerScalar] = {}
        for (e1, i), c1 in a.terms.items():
            for (e2, j), c2 in b.terms.items():
                k = e2[i]
                if k == 0:
                    continue
                e = tuple(x + y for x, y in zip(e1, e2[:i] + (k - 1,) + e2[i + 1:]))
                coeff = c1 * c2 * k
                key = (e, j)
                s = out.get(key)
                s = coeff if s is None else s + coeff
                if s.is_zero():
                    out.pop(key, None)
                else:
                    out[key] = s
        return PolyVectorField(a.ctx, a.dim, out, _clean=True)

    def bracket(self, other: "PolyVectorField") -> "PolyVectorField":
        return self.star(other) - other.star(self)

    def __repr__(self):
        bits = []
        for (e, i), c in sorted(self.terms.items()):
            mono = "*".join(f"x{k+1}^{p}" if p > 1 else f"x{k+1}" for k, p in enumerate(e) if p)
            bits.append(f"({c.to_text()})*{mono or '1'}@d{i+1}")
        return f"<PVF dim={self.dim} {' + '.join(bits) or '0'}>"


def associator(u: PolyVectorField, v: PolyVectorField, w: PolyVectorField) -> PolyVectorField:
    return u.star(v).star(w) - u.star(v.star(w))


# ----------------------------------------------------------------------
# linear fields <-> matrices
# ----------------------------------------------------------------------

def field_from_matrix(M: ParamMatrix) -> PolyVectorField:
    """xdot = M x as the vector field sum_i (M x)_i d_i."""
    dim = M.rows
    terms: Dict[TermKey, TowerScalar] = {}
    for i in range(dim):
        for l in range(dim):
            c = M.at(i, l)
            if not c.is_zero():
                e = [0] * dim
                e[l] = 1
                terms[(tuple(e), i)] = c
    return PolyVectorField(M.ctx, dim, terms, _clean=True)


def pullback_linear(V: PolyVectorField, T: ParamMatrix, T_inv: Optional[ParamMatrix] = None) -> PolyVectorField:
    """Transform a field through the linear change of coordinates x = T y:
    the new field is T^{-1} V(T y)."""
    from .pmatrix import inverse as _inverse

    if T_inv is None:
        T_inv = _inverse(T)
    ctx = T.ctx
    dim = V.dim
    V = V.lift_to(ctx) if V.ctx != ctx else V
    # rows of T as scalar polynomials in the new coordinates
    def row_poly(j: int) -> Dict[Tuple[int, ...], TowerScalar]:
        out: Dict[Tuple[int, ...], TowerScalar] = {}
        for k in range(dim):
            c = T.at(j, k)
            if not c.is_zero():
                e = [0] * dim
                e[k] = 1
                out[tuple(e)] = c
        return out

    def poly_mul(a, b):
        out: Dict[Tuple[int, ...], TowerScalar] = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                s = out.get(e)
                p = c1 * c2
                s = p if s is None else s + p
                if s.is_zero():
                    out.pop(e, None)
                else:
                    out[e] = s
        return out

    rows = [row_poly(j) for j in range(dim)]
    result = PolyVectorField.zero(ctx, dim)
    one = TowerScalar.one(ctx)
    for (e, i), c in V.terms.items():
        mono: Dict[Tuple[int, ...], TowerScalar] = {tuple([0] * dim): c}
        for j, p in enumerate(e):
            for _ in range(p):
                mono = poly_mul(mono, rows[j])
        for l in range(dim):
            f = T_inv.at(l, i)
            if f.is_zero():
                continue
            terms = {(ee, l): cc * f for ee, cc in mono.items()}
            result = result + PolyVectorField(ctx, dim, terms)
    return result


def matrix_from_field(V: PolyVectorField) -> ParamMatrix:
    if not V.is_homogeneous(0):
        raise ValueError("field is not linear")
    ctx = V.ctx
    dim = V.dim
    ents = [TowerScalar.zero(ctx)] * (dim * dim)
    for (e, i), c in V.terms.items():
        l = next(k for k, p in enumerate(e) if p)
        ents[i * dim + l] = c
    return ParamMatrix(ctx, dim, dim, ents)


# ----------------------------------------------------------------------
# grade bases (monomial enumeration)
# ----------------------------------------------------------------------

def monomials_of_degree(dim: int, degree: int) -> List[Tuple[int, ...]]:
    """Deterministic (lex-descending) enumeration of exponent tuples."""
    if dim == 1:
        return [(degree,)]
    out = []
    for first in range(degree, -1, -1):
        for rest in monomials_of_degree(dim - 1, degree - first):
            out.append((first,) + rest)
    return out


def grade_basis_keys(dim: int, grade: int) -> List[TermKey]:
    """Basis of the grade-k component: monomials of degree k+1 per coordinate."""
    return [(e, i) for e in monomials_of_degree(dim, grade + 1) for i in range(dim)]


# ----------------------------------------------------------------------
# 2D graded families
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class GradedBasisElement2D:
    """A(m, n): x^n y^(m-n) Euler, 0 <= n <= m.
    B(k, l): x^l y^(k-l)/(k+2) ((k-l+1) x dx - (l+1) y dy), -1 <= l <= k+1."""
    family: str
    lower: int
    upper: int

    def __post_init__(self):
        if self.family == "A":
            if not 0 <= self.upper <= self.lower:
                raise ValueError("A-element index out of range")
        elif self.family == "B":
            if not -1 <= self.upper <= self.lower + 1:
                raise ValueError("B-element index out of range")
        else:
            raise ValueError("family must be 'A' or 'B'")


def to_monomial_2d(ctx: Context, e: GradedBasisElement2D) -> PolyVectorField:
    m, n = e.lower, e.upper
    if e.family == "A":
        # x^n y^(m-n) (x dx + y dy)
        return (
            PolyVectorField.single(ctx, 2, (n + 1, m - n), 0, 1)
            + PolyVectorField.single(ctx, 2, (n, m - n + 1), 1, 1)
        )
    k, l = m, n
    c = Fraction(1, k + 2)
    out = PolyVectorField.zero(ctx, 2)
    # (k-l+1)/(k+2) x^(l+1) y^(k-l) dx
    if k - l + 1:
        out = out + PolyVectorField.single(ctx, 2, (l + 1, k - l), 0, c * (k - l + 1))
    # -(l+1)/(k+2) x^l y^(k-l+1) dy
    if l + 1:
        out = out + PolyVectorField.single(ctx, 2, (l, k - l + 1), 1, -c * (l + 1))
    return out


def span_basis_2d(ctx: Context, s: int) -> List[Tuple[GradedBasisElement2D, PolyVectorField]]:
    basis = [GradedBasisElement2D("A", s, n) for n in range(s + 1)]
    basis += [GradedBasisElement2D("B", s, l) for l in range(-1, s + 2)]
    return [(b, to_monomial_2d(ctx, b)) for b in basis]


def from_span_2d(V: PolyVectorField, s: int) -> Dict[Tuple[str, int], TowerScalar]:
    """Expand a homogeneous grade-s 2D field over the A/B families.

    Returns {("A", n): a_n, ("B", l): b_l}.  The family spans all of the
    grade space, so failure indicates a bug, not bad input.
    """
    if not V.is_homogeneous(s):
        raise ValueError("field is not homogeneous of the requested grade")
    ctx = V.ctx
    keys = grade_basis_keys(2, s)
    pairs = span_basis_2d(ctx, s)
    cols = []
    for _b, f in pairs:
        cols.append([f.terms.get(k, TowerScalar.zero(ctx)) for k in keys])
    rhs = [V.terms.get(k, TowerScalar.zero(ctx)) for k in keys]
    rows = [[cols[j][i] for j in range(len(cols))] for i in range(len(keys))]
    fam = solve_linear(rows, rhs, ctx)
    if fam.num_free:
        raise ExprError("A/B expansion is not unique; basis is degenerate")
    out: Dict[Tuple[str, int], TowerScalar] = {}
    for (b, _f), c in zip(pairs, fam.particular):
        out[(b.family, b.upper)] = c
    return out


def bracket_structure_2d(e1: GradedBasisElement2D, e2: GradedBasisElement2D) -> List[Tuple[Fraction, GradedBasisElement2D]]:
    """Structure constants of the 2D families, normalized to the monomial
    representation of the family definitions (the monomial bracket is the
    authority; machine-fitted over all admissible index tuples k,m <= 6).

    [A(k,l), A(m,n)] = (m-k) A(k+m, l+n)
    [B(k,l), A(m,n)] = (m(m+2)/(m+k+2)) (n/m - (l+1)/(k+2)) A(k+m, l+n)
                       - k B(k+m, l+n)
    [B(k,l), B(m,n)] = (k+m+2) ((n+1)/(m+2) - (l+1)/(k+2)) B(k+m, l+n)
    """
    out: List[Tuple[Fraction, GradedBasisElement2D]] = []

    def emit(fam: str, lower: int, upper: int, coeff: Fraction):
        if coeff == 0:
            return
        if fam == "A" and not 0 <= upper <= lower:
            return
        if fam == "B" and not -1 <= upper <= lower + 1:
            return
        out.append((coeff, GradedBasisElement2D(fam, lower, upper)))

    if e1.family == "A" and e2.family == "A":
        k, l, m, n = e1.lower, e1.upper, e2.lower, e2.upper
        emit("A", k + m, l + n, Fraction(m - k))
    elif e1.family == "B" and e2.family == "A":
        k, l, m, n = e1.lower, e1.upper, e2.lower, e2.upper
        # written multiplied out so that m = 0 needs no special case
        coeff = (Fraction((m + 2) * n) - Fraction(m * (m + 2) * (l + 1), k + 2)) / (m + k + 2)
        emit("A", k + m, l + n, coeff)
        emit("B", k + m, l + n, Fraction(-k))
    elif e1.family == "A" and e2.family == "B":
        for c, e in bracket_structure_2d(e2, e1):
            out.append((-c, e))
    else:
        k, l, m, n = e1.lower, e1.upper, e2.lower, e2.upper
        emit("B", k + m, l + n, (k + m + 2) * (Fraction(n + 1, m + 2) - Fraction(l + 1, k + 2)))
    return out


# ----------------------------------------------------------------------
# 3D: linear correspondence and the degree-2 dictionaries
# ----------------------------------------------------------------------

def _mat3(ctx: Context, rows) -> ParamMatrix:
    return ParamMatrix.from_rows(ctx, rows)


def linear_basis_3d(ctx: Context) -> Dict[str, ParamMatrix]:
    """Frozen matrices of the grade-0 basis elements used by the
    3D normal form: the Euler element, the two kernel directions, and
    the remaining directions that appear in the deformation expansion."""
    return {
        "A0": ParamMatrix.identity(ctx, 3),
        "Bm1": _mat3(ctx, [[0, 2, 0], [0, 0, 1], [0, 0, 0]]),
        "B1": _mat3(ctx, [[0, 0, 0], [-1, 0, 0], [0, -2, 0]]),
        "Cm2": _mat3(ctx, [[0, 0, 1], [0, 0, 0], [0, 0, 0]]),
        "Cm1": _mat3(ctx, [[0, 1, 0], [0, 0, Fraction(-1, 2)], [0, 0, 0]]),
        "B0": _mat3(ctx, [[1, 0, 0], [0, 0, 0], [0, 0, -1]]),
    }


def nf_basis_3d(ctx: Context) -> Dict[str, PolyVectorField]:
    """Monomial form of the four grade-1 style-kernel elements of the
    triple-zero problem (the quadratic normal-form directions)."""
    one = Fraction(1)
    return {
        # x3 * Euler
        "A0_10": (
            PolyVectorField.single(ctx, 3, (1, 0, 1), 0, one)
            + PolyVectorField.single(ctx, 3, (0, 1, 1), 1, one)
            + PolyVectorField.single(ctx, 3, (0, 0, 2), 2, one)
        ),
        # 2 x2 x3 d1 + x3^2 d2
        "Bm1_10": (
            PolyVectorField.single(ctx, 3, (0, 1, 1), 0, Fraction(2))
            + PolyVectorField.single(ctx, 3, (0, 0, 2), 1, one)
        ),
        # x3^2 d1
        "Cm2_10": PolyVectorField.single(ctx, 3, (0, 0, 2), 0, one),
        # (x1 x3 - x2^2) d1
        "Cm2_m11": (
            PolyVectorField.single(ctx, 3, (1, 0, 1), 0, one)
            + PolyVectorField.single(ctx, 3, (0, 2, 0), 0, -one)
        ),
    }


# order of the label coordinates in the degree-2 dictionary
ABC_SOURCE_ORDER: List[str] = [
    "a0", "a1", "a2",
    "bm1", "b0", "b1", "b2", "b3",
    "c1_m2", "c1_m1", "c1_0",
    "c0_m2", "c0_m1", "c0_0", "c0_1", "c0_2", "c0_3", "c0_4",
]

MONO_TARGET_ORDER: List[Tuple[int, Tuple[int, int, int]]] = [
    (c, e)
    for c in range(3)
    for e in [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]
]


def _abc_rows() -> Dict[Tuple[int, Tuple[int, int, int]], Dict[str, Fraction]]:
    """The displayed linear dictionary a^(c)_{ijk} <- labeled coefficients."""
    F = Fraction
    return {
        (0, (0, 0, 2)): {"c1_m2": F(1)},
        (0, (2, 0, 0)): {"b2": F(1, 2), "c0_2": F(1), "a2": F(1)},
        (0, (0, 2, 0)): {"b0": F(1), "c1_m2": F(-1), "c0_0": F(2, 3)},
        (1, (0, 2, 0)): {"c1_m1": F(1), "c0_1": F(-1), "a1": F(1)},
        (1, (0, 0, 2)): {"bm1": F(1), "c0_m1": F(-1, 4)},
        (2, (2, 0, 0)): {"c0_4": F(30)},
        (2, (0, 0, 2)): {"b0": F(-1, 2), "c0_0": F(1, 6), "a0": F(1)},
        (0, (1, 1, 0)): {"b1": F(1), "c0_1": F(1), "a1": F(1)},
        (0, (1, 0, 1)): {"c0_0": F(1, 3), "b0": F(1, 2), "a0": F(1), "c0_m2": F(1)},
        (1, (1, 1, 0)): {"b2": F(-1, 2), "c0_2": F(-4), "a2": F(1)},
        (1, (1, 0, 1)): {"c0_1": F(-1, 2), "c1_m1": F(-1)},
        (1, (0, 1, 1)): {"c0_0": F(-2, 3), "b0": F(1, 2), "a0": F(1)},
        (2, (1, 1, 0)): {"b3": F(-2), "c0_3": F(20)},
        (2, (1, 0, 1)): {"b2": F(-1, 2), "c0_2": F(2), "a2": F(1), "c1_0": F(2)},
        (0, (0, 1, 1)): {"bm1": F(2), "c0_m1": F(1)},
        (2, (0, 1, 1)): {"b1": F(-1), "a1": F(1), "c0_1": F(1)},
        (2, (0, 2, 0)): {"b2": F(-1), "c1_0": F(-2), "c0_2": F(4)},
        (1, (2, 0, 0)): {"b3": F(-1), "c0_3": F(-5)},
    }


@dataclass
class Degree2Coeffs3D:
    """Degree-2 coefficients in the two coordinate systems.

    ``monomial`` maps (coordinate, (i,j,k)) to the coefficient of
    x1^i x2^j x3^k on that coordinate; ``abc`` maps labels from
    ABC_SOURCE_ORDER.  Exactly one of the two is populated by the
    translator at a time.
    """
    monomial: Optional[Dict[Tuple[int, Tuple[int, int, int]], TowerScalar]] = None
    abc: Optional[Dict[str, TowerScalar]] = None


_ABC_MATRIX: Optional[List[List[Fraction]]] = None


def _abc_matrix() -> List[List[Fraction]]:
    global _ABC_MATRIX
    if _ABC_MATRIX is None:
        rows = _abc_rows()
        _ABC_MATRIX = [
            [rows[target].get(src, Fraction(0)) for src in ABC_SOURCE_ORDER]
            for target in MONO_TARGET_ORDER
        ]
    return _ABC_MATRIX


def abc_translate_3d(ctx: Context, coeffs: Degree2Coeffs3D, direction: str) -> Degree2Coeffs3D:
    """Apply the degree-2 label dictionary ('to_monomial' or 'to_abc')."""
    M = _abc_matrix()
    zero = TowerScalar.zero(ctx)
    if direction == "to_monomial":
        if coeffs.abc is None:
            raise ValueError("abc coefficients required")
        for key in coeffs.abc:
            if key not in ABC_SOURCE_ORDER:
                raise ValueError(f"label {key!r} out of range")
        src = [coeffs.abc.get(name, zero) for name in ABC_SOURCE_ORDER]
        out: Dict[Tuple[int, Tuple[int, int, int]], TowerScalar] = {}
        for r, target in enumerate(MONO_TARGET_ORDER):
            s = zero
            for c, x in zip(M[r], src):
                if c:
                    s = s + x * c
            if not s.is_zero():
                out[target] = s
        return Degree2Coeffs3D(monomial=out)
    if direction == "to_abc":
        if coeffs.monomial is None:
            raise ValueError("monomial coefficients required")
        for key in coeffs.monomial:
            if key not in MONO_TARGET_ORDER:
                raise ValueError(f"monomial index {key!r} out of range")
        rhs = [coeffs.monomial.get(t, zero) for t in MONO_TARGET_ORDER]
        rows = [[TowerScalar.const(ctx, c) for c in row] for row in M]
        fam = solve_linear(rows, rhs, ctx)
        if fam.num_free:
            raise ExprError("degree-2 dictionary is singular")
        out2 = {name: v for name, v in zip(ABC_SOURCE_ORDER, fam.particular) if not v.is_zero()}
        return Degree2Coeffs3D(abc=out2)
    raise ValueError("direction must be 'to_monomial' or 'to_abc'")


def field_from_degree2(ctx: Context, coeffs: Degree2Coeffs3D) -> PolyVectorField:
    mono = coeffs.monomial
    if mono is None:
        mono = abc_translate_3d(ctx, coeffs, "to_monomial").monomial
    out = PolyVectorField.zero(ctx, 3)
    for (c, e), v in mono.items():
        out = out + PolyVectorField(ctx, 3, {(e, c): v})
    return out


def adB_action_3d(family: str, l: int, i: int, k: int) -> List[Tuple[Fraction, Tuple[str, int, int, int]]]:
    """Bracket of the grade-0 kernel generator with a labeled 3D element.

    Rules: [., B^l] = (l+1) B^(l-1);  [., A^l] = l A^(l-1);
    [., C^l] = (l+2)(2i+3-l)/(2i-l+1) C^(l-1) for l < 2i+1, annihilates
    l = 2i+1, and maps l = 2i+2 to (2i+4) C^(2i+1).
    """
    if family == "B":
        if not -1 <= l:
            raise ValueError("B upper index out of range")
        if l + 1 == 0:
            return []
        return [(Fraction(l + 1), ("B", l - 1, i, k))]
    if family == "A":
        if l < 0:
            raise ValueError("A upper index out of range")
        if l == 0:
            return []
        return [(Fraction(l), ("A", l - 1, i, k))]
    if family == "C":
        if l > 2 * i + 2:
            raise ValueError("C upper index out of range")
        if l == 2 * i + 1:
            return []
        if l == 2 * i + 2:
            return [(Fraction(2 * i + 4), ("C", 2 * i + 1, i, k))]
        return [(Fraction((l + 2) * (2 * i + 3 - l), 2 * i - l + 1), ("C", l - 1, i, k))]
    raise ValueError("family must be 'A', 'B' or 'C'")
