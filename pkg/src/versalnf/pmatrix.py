"""Dense matrices over tower scalars.

Provides exact arithmetic, division-free characteristic polynomials,
and parametric linear solves that return the full affine solution set
with named free directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .expr import Context, ExprError, TowerScalar, coerce, lift
from .expr.parser import parse_expression


class LinearSolveError(ExprError):
    """Raised for inconsistent systems (reports the violated row)."""

    def __init__(self, message: str, row: Optional[int] = None):
        super().__init__(message)
        self.row = row


class ParamMatrix:
    """Row-major dense matrix of TowerScalars sharing one context."""

    __slots__ = ("ctx", "rows", "cols", "entries")

    def __init__(self, ctx: Context, rows: int, cols: int, entries: Sequence[TowerScalar]):
        if len(entries) != rows * cols:
            raise ValueError("entry count does not match the shape")
        self.ctx = ctx
        self.rows = rows
        self.cols = cols
        self.entries = [lift(e, ctx) if e.ctx != ctx else e for e in entries]

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls, ctx: Context, rows: int, cols: int) -> "ParamMatrix":
        z = TowerScalar.zero(ctx)
        return cls(ctx, rows, cols, [z] * (rows * cols))

    @classmethod
    def identity(cls, ctx: Context, n: int) -> "ParamMatrix":
        z = TowerScalar.zero(ctx)
        o = TowerScalar.one(ctx)
        return cls(ctx, n, n, [o if i == j else z for i in range(n) for j in range(n)])

    @classmethod
    def from_rows(cls, ctx: Context, rows: Sequence[Sequence]) -> "ParamMatrix":
        r = len(rows)
        c = len(rows[0]) if r else 0
        flat: List[TowerScalar] = []
        for row in rows:
            if len(row) != c:
                raise ValueError("ragged rows")
            for x in row:
                if isinstance(x, TowerScalar):
                    flat.append(x)
                elif isinstance(x, str):
                    flat.append(parse_expression(x, ctx))
                else:
                    flat.append(TowerScalar.const(ctx, Fraction(x)))
        # expressions may extend the tower (auto sqrt2); use the widest ctx
        wide = ctx
        for x in flat:
            if x.ctx != wide and x.ctx.extends(wide):
                wide = x.ctx
        return cls(wide, r, c, flat)

    # -- access ------------------------------------------------------------
    def at(self, i: int, j: int) -> TowerScalar:
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> List[TowerScalar]:
        return self.entries[i * self.cols: (i + 1) * self.cols]

    def to_lists(self) -> List[List[TowerScalar]]:
        return [self.row(i) for i in range(self.rows)]

    def with_entry(self, i: int, j: int, value: TowerScalar) -> "ParamMatrix":
        ents = list(self.entries)
        ents[i * self.cols + j] = value
        return ParamMatrix(self.ctx, self.rows, self.cols, ents)

    # -- arithmetic -----------------------------------------------------------
    def _coerced(self, other: "ParamMatrix") -> Tuple["ParamMatrix", "ParamMatrix"]:
        if self.ctx == other.ctx:
            return self, other
        a0, b0 = coerce(self.entries[0] if self.entries else TowerScalar.zero(self.ctx),
                        other.entries[0] if other.entries else TowerScalar.zero(other.ctx))
        ctx = a0.ctx
        return (ParamMatrix(ctx, self.rows, self.cols, [lift(e, ctx) for e in self.entries]),
                ParamMatrix(ctx, other.rows, other.cols, [lift(e, ctx) for e in other.entries]))

    def __add__(self, other: "ParamMatrix") -> "ParamMatrix":
        a, b = self._coerced(other)
        if (a.rows, a.cols) != (b.rows, b.cols):
            raise ValueError("shape mismatch")
        return ParamMatrix(a.ctx, a.rows, a.cols, [x + y for x, y in zip(a.entries, b.entries)])

    def __sub__(self, other: "ParamMatrix") -> "ParamMatrix":
        a, b = self._coerced(other)
        if (a.rows, a.cols) != (b.rows, b.cols):
            raise ValueError("shape mismatch")
        return ParamMatrix(a.ctx, a.rows, a.cols, [x - y for x, y in zip(a.entries, b.entries)])

    def __neg__(self) -> "ParamMatrix":
        return ParamMatrix(self.ctx, self.rows, self.cols, [-x for x in self.entries])

    def __mul__(self, other):
        if isinstance(other, ParamMatrix):
            a, b = self._coerced(other)
            if a.cols != b.rows:
                raise ValueError("shape mismatch")
            out = []
            for i in range(a.rows):
                arow = a.row(i)
                for j in range(b.cols):
                    s = TowerScalar.zero(a.ctx)
                    for k in range(a.cols):
                        s = s + arow[k] * b.at(k, j)
                    out.append(s)
            return ParamMatrix(a.ctx, a.rows, b.cols, out)
        return self.scale(other)

    def scale(self, c) -> "ParamMatrix":
        if not isinstance(c, TowerScalar):
            c = TowerScalar.const(self.ctx, Fraction(c))
        ents = [e * c for e in self.entries]
        ctx = self.ctx
        for e in ents:
            if e.ctx != ctx and e.ctx.extends(ctx):
                ctx = e.ctx
        return ParamMatrix(ctx, self.rows, self.cols, ents)

    def transpose(self) -> "ParamMatrix":
        return ParamMatrix(self.ctx, self.cols, self.rows,
                           [self.at(j, i) for i in range(self.cols) for j in range(self.rows)])

    def trace(self) -> TowerScalar:
        s = TowerScalar.zero(self.ctx)
        for i in range(min(self.rows, self.cols)):
            s = s + self.at(i, i)
        return s

    def is_zero(self) -> bool:
        return all(e.is_zero() for e in self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParamMatrix):
            return NotImplemented
        if (self.rows, self.cols) != (other.rows, other.cols):
            return False
        a, b = self._coerced(other)
        return all(x == y for x, y in zip(a.entries, b.entries))

    def commutator(self, other: "ParamMatrix") -> "ParamMatrix":
        return self * other - other * self

    def substitute(self, name: str, value) -> "ParamMatrix":
        ents = [e.substitute(name, value) for e in self.entries]
        ctx = ents[0].ctx if ents else self.ctx
        return ParamMatrix(ctx, self.rows, self.cols, ents)

    def lift_to(self, ctx: Context) -> "ParamMatrix":
        return ParamMatrix(ctx, self.rows, self.cols, [lift(e, ctx) for e in self.entries])

    def power(self, k: int) -> "ParamMatrix":
        if self.rows != self.cols:
            raise ValueError("power of a non-square matrix")
        out = ParamMatrix.identity(self.ctx, self.rows)
        for _ in range(k):
            out = out * self
        return out

    def map_entries(self, f) -> "ParamMatrix":
        return ParamMatrix(self.ctx, self.rows, self.cols, [f(e) for e in self.entries])

    def __repr__(self):
        body = "; ".join(", ".join(e.to_text() for e in self.row(i)) for i in range(self.rows))
        return f"<ParamMatrix {self.rows}x{self.cols} [{body}]>"


@dataclass
class CharPoly:
    """chi(lambda) = lambda^n - D1 lambda^(n-1) + D2 lambda^(n-2) - ...

    ``deltas[k]`` is D_{k+1}; D1 is the trace and D_n the determinant.
    """
    degree: int
    deltas: List[TowerScalar]

    def delta(self, k: int) -> TowerScalar:
        return self.deltas[k - 1]

    def eval_matrix(self, M: ParamMatrix) -> ParamMatrix:
        """chi(M), for exactness checks (Cayley-Hamilton)."""
        coeffs = [TowerScalar.one(M.ctx)]
        for k, d in enumerate(self.deltas):
            coeffs.append(d * Fraction((-1) ** (k + 1)))
        result = ParamMatrix.zero(M.ctx, M.rows, M.cols)
        for c in coeffs:
            result = result * M + ParamMatrix.identity(M.ctx, M.rows).scale(c)
        return result


def charpoly(M: ParamMatrix) -> CharPoly:
    """Division-free characteristic polynomial (Faddeev-LeVerrier)."""
    if M.rows != M.cols:
        raise ValueError("characteristic polynomial of a non-square matrix")
    n = M.rows
    deltas: List[TowerScalar] = []
    Ak = M
    for k in range(1, n + 1):
        qk = Ak.trace() * Fraction(1, k)
        deltas.append(qk * Fraction((-1) ** (k + 1)))
        if k < n:
            Ak = M * (Ak - ParamMatrix.identity(M.ctx, n).scale(qk))
    return CharPoly(n, deltas)


def det(M: ParamMatrix) -> TowerScalar:
    if M.rows != M.cols:
        raise ValueError("determinant of a non-square matrix")
    if M.rows == 0:
        return TowerScalar.one(M.ctx)
    cp = charpoly(M)
    return cp.deltas[-1]


@dataclass
class AffineSolutionFamily:
    """particular + span(basis); member() substitutes the free names."""
    particular: List[TowerScalar]
    basis: List[List[TowerScalar]]
    free_names: List[str]

    def member(self, assignment: Optional[Dict[str, TowerScalar]] = None) -> List[TowerScalar]:
        out = list(self.particular)
        if assignment:
            for name, value in assignment.items():
                i = self.free_names.index(name)
                out = [p + b * value for p, b in zip(out, self.basis[i])]
        return out

    @property
    def num_free(self) -> int:
        return len(self.free_names)


def solve_linear(
    A: List[List[TowerScalar]],
    b: List[TowerScalar],
    ctx: Context,
    free_prefix: str = "fp",
) -> AffineSolutionFamily:
    """Full affine solution set of A x = b over the scalar field.

    Radical-free polynomial systems run through fraction-free (Bareiss)
    forward elimination with back substitution in the field, which keeps
    intermediate entries polynomial; other systems use plain reduced row
    echelon.  Pivots are rejected on the canonical zero test; free
    unknowns are named ``fp0, fp1, ...`` in column order.
    """
    fam = _bareiss_solve(A, b, ctx, free_prefix)
    if fam is not None:
        return fam
    return _rref_solve(A, b, ctx, free_prefix)


def _rref_solve(A, b, ctx, free_prefix) -> AffineSolutionFamily:
    rows = len(A)
    cols = len(A[0]) if rows else 0
    M = [list(row) + [b[i]] for i, row in enumerate(A)]
    zero = TowerScalar.zero(ctx)
    pivot_of_col: Dict[int, int] = {}
    r = 0
    for c in range(cols):
        pivot_row = None
        for i in range(r, rows):
            if not M[i][c].is_zero():
                pivot_row = i
                break
        if pivot_row is None:
            continue
        M[r], M[pivot_row] = M[pivot_row], M[r]
        inv = M[r][c].inverse()
        M[r] = [x * inv if not x.is_zero() else x for x in M[r]]
        for i in range(rows):
            if i != r and not M[i][c].is_zero():
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        pivot_of_col[c] = r
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if not M[i][cols].is_zero():
            raise LinearSolveError(f"inconsistent linear system at row {i}", row=i)
    free_cols = [c for c in range(cols) if c not in pivot_of_col]
    particular = [zero] * cols
    for c, pr in pivot_of_col.items():
        particular[c] = M[pr][cols]
    basis: List[List[TowerScalar]] = []
    names: List[str] = []
    for k, fc in enumerate(free_cols):
        v = [zero] * cols
        v[fc] = TowerScalar.one(ctx)
        for c, pr in pivot_of_col.items():
            v[c] = -M[pr][fc]
        basis.append(v)
        names.append(f"{free_prefix}{k}")
    return AffineSolutionFamily(particular, basis, names)


def _bareiss_solve(A, b, ctx, free_prefix) -> Optional[AffineSolutionFamily]:
    """Fraction-free elimination; returns None if entries are not
    radical-free polynomials."""
    from .expr.polynomial import MultiPoly, poly_divexact
    from .expr.polynomial import RatFunc

    rows = len(A)
    cols = len(A[0]) if rows else 0

    def as_poly(ts: TowerScalar) -> Optional[MultiPoly]:
        if ts.is_zero():
            return MultiPoly.zero(ctx.nvars)
        if set(ts.coords) != {0}:
            return None
        rf = ts.coords[0]
        if not rf.den.is_const():
            return None
        d = rf.den.const_value()
        return rf.num if d == 1 else rf.num * (1 / d)

    M: List[List[MultiPoly]] = []
    for i in range(rows):
        row = []
        for x in list(A[i]) + [b[i]]:
            p = as_poly(x)
            if p is None:
                return None
            row.append(p)
        M.append(row)

    width = cols + 1
    pivot_cols: List[int] = []
    pivot_rows: List[int] = []
    prev = MultiPoly.const(ctx.nvars, 1)
    r = 0
    for c in range(cols):
        pivot = None
        best = None
        for i in range(r, rows):
            if not M[i][c].is_zero():
                size = len(M[i][c].terms)
                if best is None or size < best:
                    pivot, best = i, size
                    if size == 1:
                        break
        if pivot is None:
            continue
        M[r], M[pivot] = M[pivot], M[r]
        pc = M[r][c]
        for i in range(r + 1, rows):
            ric = M[i][c]
            if ric.is_zero():
                for j in range(width):
                    if not M[i][j].is_zero():
                        M[i][j] = poly_divexact(pc * M[i][j], prev) if not prev.is_const() else pc * M[i][j] * (1 / prev.const_value())
                continue
            for j in range(width):
                num = pc * M[i][j] - ric * M[r][j]
                if num.is_zero():
                    M[i][j] = num
                elif prev.is_const():
                    M[i][j] = num * (1 / prev.const_value())
                else:
                    M[i][j] = poly_divexact(num, prev)
        prev = pc
        pivot_cols.append(c)
        pivot_rows.append(r)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if not M[i][cols].is_zero():
            raise LinearSolveError(f"inconsistent linear system at row {i}", row=i)

    zero = TowerScalar.zero(ctx)
    free_cols = [c for c in range(cols) if c not in pivot_cols]

    def scalar(p: MultiPoly) -> TowerScalar:
        return TowerScalar.from_ratfunc(ctx, RatFunc(p))

    def back_substitute(rhs_col: int, unit_free: Optional[int]) -> List[TowerScalar]:
        x = [zero] * cols
        if unit_free is not None:
            x[unit_free] = TowerScalar.one(ctx)
        for k in range(len(pivot_cols) - 1, -1, -1):
            rr, cc = pivot_rows[k], pivot_cols[k]
            acc = scalar(M[rr][rhs_col]) if rhs_col == cols else zero
            if rhs_col != cols and unit_free is not None:
                acc = -scalar(M[rr][unit_free])
            for j in range(cc + 1, cols):
                if j == unit_free or M[rr][j].is_zero() or x[j].is_zero():
                    continue
                acc = acc - scalar(M[rr][j]) * x[j]
            x[cc] = acc / scalar(M[rr][cc])
        return x

    particular = back_substitute(cols, None)
    basis = []
    names = []
    for k, fc in enumerate(free_cols):
        basis.append(back_substitute(fc, fc))
        names.append(f"{free_prefix}{k}")
    return AffineSolutionFamily(particular, basis, names)


def _sylvester_system(
    X: ParamMatrix, Xbar: ParamMatrix, unknown_order: List[Tuple[int, int]]
) -> Tuple[List[List[TowerScalar]], List[TowerScalar]]:
    """Rows of  X T - T Xbar = 0  as a scalar system over T's entries."""
    X, Xbar = X._coerced(Xbar)
    ctx = X.ctx
    n = X.rows
    zero = TowerScalar.zero(ctx)
    col_of = {pos: k for k, pos in enumerate(unknown_order)}
    rows: List[List[TowerScalar]] = []
    rhs: List[TowerScalar] = []
    for i in range(n):
        for j in range(n):
            row = [zero] * len(unknown_order)
            for k in range(n):
                c = col_of[(k, j)]
                row[c] = row[c] + X.at(i, k)
            for l in range(n):
                c = col_of[(i, l)]
                row[c] = row[c] - Xbar.at(l, j)
            rows.append(row)
            rhs.append(zero)
    return rows, rhs


def conjugacy_solve(
    X: ParamMatrix,
    Xbar: ParamMatrix,
    normalization: Optional[Dict[Tuple[int, int], TowerScalar]] = None,
) -> AffineSolutionFamily:
    """Solution family of X T = T Xbar, optionally with affine rows
    fixing selected entries of T (e.g. a unit diagonal).

    Unknowns are ordered reverse row-major so that free parameters fall
    on the top-left entries, matching the hand convention of writing the
    free block first.
    """
    if (X.rows, X.cols) != (Xbar.rows, Xbar.cols) or X.rows != X.cols:
        raise ValueError("conjugacy requires square matrices of equal size")
    n = X.rows
    order = [(i, j) for i in range(n - 1, -1, -1) for j in range(n - 1, -1, -1)]
    rows, rhs = _sylvester_system(X, Xbar, order)
    ctx = rows[0][0].ctx if rows else X.ctx
    if normalization:
        zero = TowerScalar.zero(ctx)
        col_of = {pos: k for k, pos in enumerate(order)}
        for (i, j), value in normalization.items():
            row = [zero] * len(order)
            row[col_of[(i, j)]] = TowerScalar.one(ctx)
            rows.append(row)
            rhs.append(lift(value, ctx) if value.ctx != ctx else value)
    family = solve_linear(rows, rhs, ctx)
    # repackage vectors as matrices in natural order
    def to_matrix(vec: List[TowerScalar]) -> List[TowerScalar]:
        ents = [TowerScalar.zero(ctx)] * (n * n)
        for k, (i, j) in enumerate(order):
            ents[i * n + j] = vec[k]
        return ents

    part = to_matrix(family.particular)
    basis = [to_matrix(v) for v in family.basis]
    return AffineSolutionFamily(part, basis, family.free_names)


def family_matrix(fam: AffineSolutionFamily, ctx: Context, n: int,
                  assignment: Optional[Dict[str, TowerScalar]] = None) -> ParamMatrix:
    return ParamMatrix(ctx, n, n, fam.member(assignment))


def matrix_eval(M: ParamMatrix, assignment: Dict[str, float]) -> List[List[float]]:
    return [[M.at(i, j).eval_numeric(assignment) for j in range(M.cols)] for i in range(M.rows)]


def inverse(M: ParamMatrix) -> ParamMatrix:
    """Exact inverse via columnwise solves; raises on singular input."""
    if M.rows != M.cols:
        raise ValueError("inverse of a non-square matrix")
    n = M.rows
    A = M.to_lists()
    cols: List[List[TowerScalar]] = []
    for j in range(n):
        e = [TowerScalar.one(M.ctx) if i == j else TowerScalar.zero(M.ctx) for i in range(n)]
        fam = solve_linear(A, e, M.ctx)
        if fam.num_free:
            raise LinearSolveError("matrix is singular")
        cols.append(fam.particular)
    return ParamMatrix(M.ctx, n, n, [cols[j][i] for i in range(n) for j in range(n)])
