"""Sparse multivariate polynomials over Q and reduced rational functions.

Monomial order is graded lexicographic with the variable declared first
being most significant.  Canonical forms (gcd-reduced fractions with a
monic denominator) make the zero test decidable, which everything else
in the engine relies on.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Tuple

Exponents = Tuple[int, ...]


def grlex_key(exps: Exponents) -> Tuple[int, Exponents]:
    return (sum(exps), exps)


class MultiPoly:
    """Polynomial in ``nvars`` variables with Fraction coefficients.

    ``terms`` maps exponent tuples to nonzero coefficients; the zero
    polynomial has an empty map.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Dict[Exponents, Fraction], *, _clean: bool = False):
        self.nvars = nvars
        if _clean:
            self.terms = terms
        else:
            clean: Dict[Exponents, Fraction] = {}
            for e, c in terms.items():
                if len(e) != nvars:
                    raise ValueError("exponent tuple has wrong length")
                c = Fraction(c)
                if c != 0:
                    clean[tuple(e)] = c
            self.terms = clean

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, nvars: int) -> "MultiPoly":
        return cls(nvars, {}, _clean=True)

    @classmethod
    def const(cls, nvars: int, value) -> "MultiPoly":
        v = Fraction(value)
        if v == 0:
            return cls.zero(nvars)
        return cls(nvars, {(0,) * nvars: v}, _clean=True)

    @classmethod
    def variable(cls, nvars: int, index: int) -> "MultiPoly":
        e = [0] * nvars
        e[index] = 1
        return cls(nvars, {tuple(e): Fraction(1)}, _clean=True)

    # -- predicates ----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return all(all(x == 0 for x in e) for e in self.terms)

    def const_value(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        if not self.is_const():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()))

    def __eq__(self, other) -> bool:
        return isinstance(other, MultiPoly) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, tuple(sorted(self.terms.items()))))

    # -- arithmetic ----------------------------------------------------
    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        if self.nvars != other.nvars:
            raise ValueError("variable count mismatch")
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, Fraction(0)) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        return MultiPoly(self.nvars, out, _clean=True)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.nvars, {e: -c for e, c in self.terms.items()}, _clean=True)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __mul__(self, other) -> "MultiPoly":
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            if f == 0:
                return MultiPoly.zero(self.nvars)
            return MultiPoly(self.nvars, {e: c * f for e, c in self.terms.items()}, _clean=True)
        if self.nvars != other.nvars:
            raise ValueError("variable count mismatch")
        out: Dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, Fraction(0)) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return MultiPoly(self.nvars, out, _clean=True)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.const(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    # -- structure -----------------------------------------------------
    def total_degree(self) -> int:
        if self.is_zero():
            return -1
        return max(sum(e) for e in self.terms)

    def degree_in(self, index: int) -> int:
        if self.is_zero():
            return -1
        return max(e[index] for e in self.terms)

    def valuation_in(self, index: int) -> int:
        """Lowest power of variable ``index``; -1 for the zero polynomial."""
        if self.is_zero():
            return -1
        return min(e[index] for e in self.terms)

    def involves(self, index: int) -> bool:
        return any(e[index] for e in self.terms)

    def active_vars(self) -> List[int]:
        return [i for i in range(self.nvars) if self.involves(i)]

    def leading(self) -> Tuple[Exponents, Fraction]:
        if self.is_zero():
            raise ValueError("zero polynomial has no leading term")
        e = max(self.terms, key=grlex_key)
        return e, self.terms[e]

    def monic(self) -> "MultiPoly":
        if self.is_zero():
            return self
        _, c = self.leading()
        return self * (1 / c)

    def content(self) -> Fraction:
        """gcd of the coefficients, positive; 0 for the zero polynomial."""
        if self.is_zero():
            return Fraction(0)
        num = 0
        den = 1
        for c in self.terms.values():
            num = math.gcd(num, abs(c.numerator))
            den = den * c.denominator // math.gcd(den, c.denominator)
        return Fraction(num, den)

    def coeffs_in(self, index: int) -> Dict[int, "MultiPoly"]:
        """View as a univariate polynomial in variable ``index``.

        Returns degree -> coefficient polynomial (with that variable's
        exponent zeroed out in the coefficient).
        """
        out: Dict[int, Dict[Exponents, Fraction]] = {}
        for e, c in self.terms.items():
            d = e[index]
            e0 = e[:index] + (0,) + e[index + 1:]
            out.setdefault(d, {})[e0] = c
        return {d: MultiPoly(self.nvars, t, _clean=True) for d, t in out.items()}

    def derivative(self, index: int) -> "MultiPoly":
        out: Dict[Exponents, Fraction] = {}
        for e, c in self.terms.items():
            k = e[index]
            if k == 0:
                continue
            e2 = e[:index] + (k - 1,) + e[index + 1:]
            out[e2] = out.get(e2, Fraction(0)) + c * k
        return MultiPoly(self.nvars, out)

    def subs_var(self, index: int, value: "MultiPoly") -> "MultiPoly":
        """Substitute a polynomial for one variable (Horner in that variable)."""
        coeffs = self.coeffs_in(index)
        if not coeffs:
            return MultiPoly.zero(self.nvars)
        degs = sorted(coeffs, reverse=True)
        result = coeffs[degs[0]]
        prev = degs[0]
        for d in degs[1:]:
            result = result * value ** (prev - d) + coeffs[d]
            prev = d
        result = result * value ** prev
        return result

    def extended(self, new_nvars: int, index_map: List[int]) -> "MultiPoly":
        """Re-embed into a context with more variables."""
        out: Dict[Exponents, Fraction] = {}
        for e, c in self.terms.items():
            e2 = [0] * new_nvars
            for old, new in enumerate(index_map):
                e2[new] = e[old]
            out[tuple(e2)] = c
        return MultiPoly(new_nvars, out, _clean=True)

    def eval_fraction(self, values: List[Fraction]) -> Fraction:
        total = Fraction(0)
        for e, c in self.terms.items():
            term = c
            for x, k in zip(values, e):
                if k:
                    term *= x ** k
            total += term
        return total

    def eval_float(self, values: List[float]) -> float:
        total = 0.0
        for e, c in self.terms.items():
            term = float(c)
            for x, k in zip(values, e):
                if k:
                    term *= x ** k
            total += term
        return total

    def __repr__(self):
        return f"MultiPoly({self.nvars}, {self.terms!r})"


# ----------------------------------------------------------------------
# division, gcd, square roots
# ----------------------------------------------------------------------

def poly_divexact(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """Exact division a / b; raises ValueError if not exact."""
    if b.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if a.is_zero():
        return a
    nv = a.nvars
    eb, cb = b.leading()
    q: Dict[Exponents, Fraction] = {}
    r = a
    guard = 0
    while not r.is_zero():
        guard += 1
        if guard > 10000 + 10 * len(a.terms) * max(1, len(b.terms)):
            raise ValueError("division is not exact")
        er, cr = r.leading()
        de = tuple(x - y for x, y in zip(er, eb))
        if any(x < 0 for x in de):
            raise ValueError("division is not exact")
        coeff = cr / cb
        q[de] = q.get(de, Fraction(0)) + coeff
        r = r - MultiPoly(nv, {de: coeff}, _clean=True) * b
    return MultiPoly(nv, q)


def _poly_normalize(p: MultiPoly) -> MultiPoly:
    """Primitive part with positive leading coefficient (deterministic gcd rep)."""
    if p.is_zero():
        return p
    c = p.content()
    p = p * (1 / c)
    _, lead = p.leading()
    if lead < 0:
        p = -p
    return p


def _univar_gcd(a: MultiPoly, b: MultiPoly, var: int) -> MultiPoly:
    """Euclid for polynomials effectively univariate in ``var``."""
    def to_list(p: MultiPoly) -> List[Fraction]:
        out = [Fraction(0)] * (p.degree_in(var) + 1)
        for e, c in p.terms.items():
            out[e[var]] += c
        return out

    fa, fb = to_list(a), to_list(b)

    def deg(f):
        d = len(f) - 1
        while d >= 0 and f[d] == 0:
            d -= 1
        return d

    da, db = deg(fa), deg(fb)
    while db >= 0:
        # remainder of fa by fb
        fa = fa[: da + 1]
        while da >= db:
            factor = fa[da] / fb[db]
            if factor != 0:
                for i in range(db + 1):
                    fa[da - db + i] -= factor * fb[i]
            fa[da] = Fraction(0)
            da = deg(fa)
        fa, fb = fb, fa[: da + 1] if da >= 0 else []
        da, db = deg(fa), deg(fb)
    nv = a.nvars
    terms: Dict[Exponents, Fraction] = {}
    for k, c in enumerate(fa):
        if c != 0:
            e = [0] * nv
            e[var] = k
            terms[tuple(e)] = c
    return _poly_normalize(MultiPoly(nv, terms, _clean=True))


def poly_gcd_many(polys: Iterable[MultiPoly], nvars: int) -> MultiPoly:
    g = MultiPoly.zero(nvars)
    for p in polys:
        g = poly_gcd(g, p)
        if g.is_const() and not g.is_zero():
            return MultiPoly.const(nvars, 1)
    return g


def _pseudo_rem(a: MultiPoly, b: MultiPoly, var: int) -> MultiPoly:
    ca = a.coeffs_in(var)
    cb = b.coeffs_in(var)
    db = max(cb)
    lcb = cb[db]
    r = a
    while not r.is_zero():
        cr = r.coeffs_in(var)
        dr = max(cr)
        if dr < db:
            break
        lcr = cr[dr]
        shift = MultiPoly.variable(a.nvars, var) ** (dr - db)
        r = r * lcb - b * shift * lcr
    return r


def poly_gcd(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    if a.nvars != b.nvars:
        raise ValueError("variable count mismatch")
    nv = a.nvars
    if a.is_zero():
        return _poly_normalize(b)
    if b.is_zero():
        return _poly_normalize(a)

    # factor out the common monomial part first
    def min_exps(p: MultiPoly) -> Exponents:
        its = iter(p.terms)
        m = list(next(its))
        for e in its:
            for i, x in enumerate(e):
                if x < m[i]:
                    m[i] = x
        return tuple(m)

    ma, mb = min_exps(a), min_exps(b)
    mc = tuple(min(x, y) for x, y in zip(ma, mb))

    def shift_down(p: MultiPoly, m: Exponents) -> MultiPoly:
        return MultiPoly(nv, {tuple(x - y for x, y in zip(e, m)): c for e, c in p.terms.items()}, _clean=True)

    if any(mc):
        a = shift_down(a, mc)
        b = shift_down(b, mc)

    active = sorted(set(a.active_vars()) | set(b.active_vars()))
    if not active or a.is_const() or b.is_const():
        g = MultiPoly.const(nv, 1)
    elif len(active) == 1:
        g = _univar_gcd(a, b, active[0])
    else:
        var = active[-1]
        ca = poly_gcd_many(a.coeffs_in(var).values(), nv)
        cb = poly_gcd_many(b.coeffs_in(var).values(), nv)
        cont = poly_gcd(ca, cb)
        pa = poly_divexact(a, ca)
        pb = poly_divexact(b, cb)
        if pa.degree_in(var) < pb.degree_in(var):
            pa, pb = pb, pa
        while not pb.is_zero():
            r = _pseudo_rem(pa, pb, var)
            if not r.is_zero():
                rc = poly_gcd_many(r.coeffs_in(var).values(), nv)
                r = poly_divexact(r, rc)
            pa, pb = pb, r
        g = _poly_normalize(cont * pa)

    if any(mc):
        g = g * MultiPoly(nv, {mc: Fraction(1)}, _clean=True)
    return _poly_normalize(g)


def fraction_sqrt(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    n = math.isqrt(q.numerator)
    d = math.isqrt(q.denominator)
    if n * n == q.numerator and d * d == q.denominator:
        return Fraction(n, d)
    return None


def poly_sqrt(p: MultiPoly) -> Optional[MultiPoly]:
    """Exact square root of a polynomial, or None."""
    if p.is_zero():
        return p
    if p.is_const():
        r = fraction_sqrt(p.const_value())
        return None if r is None else MultiPoly.const(p.nvars, r)
    e, c = p.leading()
    if any(x % 2 for x in e):
        return None
    c0 = fraction_sqrt(c)
    if c0 is None:
        return None
    half = tuple(x // 2 for x in e)
    s = MultiPoly(p.nvars, {half: c0}, _clean=True)
    lead2 = s * 2
    guard = 0
    while True:
        r = p - s * s
        if r.is_zero():
            return s
        guard += 1
        if guard > 4 * (len(p.terms) + 4):
            return None
        er, cr = r.leading()
        de = tuple(x - y for x, y in zip(er, half))
        if any(x < 0 for x in de):
            return None
        s = s + MultiPoly(p.nvars, {de: cr / (2 * c0)}, _clean=True)


# ----------------------------------------------------------------------
# rational functions
# ----------------------------------------------------------------------

class RatFunc:
    """Reduced fraction of MultiPoly with a grlex-monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: MultiPoly, den: Optional[MultiPoly] = None, *, _canonical: bool = False):
        if den is None:
            den = MultiPoly.const(num.nvars, 1)
        if _canonical:
            self.num = num
            self.den = den
            return
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            self.num = num
            self.den = MultiPoly.const(num.nvars, 1)
            return
        if den.is_const():
            d = den.const_value()
            self.num = num if d == 1 else num * (1 / d)
            self.den = MultiPoly.const(num.nvars, 1)
            return
        g = poly_gcd(num, den)
        if not (g.is_const() and g.const_value() == 1):
            num = poly_divexact(num, g)
            den = poly_divexact(den, g)
        _, lead = den.leading()
        if lead != 1:
            inv = 1 / lead
            num = num * inv
            den = den * inv
        self.num = num
        self.den = den

    @classmethod
    def const(cls, nvars: int, value) -> "RatFunc":
        return cls(MultiPoly.const(nvars, value))

    @classmethod
    def zero(cls, nvars: int) -> "RatFunc":
        return cls(MultiPoly.zero(nvars))

    @property
    def nvars(self) -> int:
        return self.num.nvars

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.is_const()

    def as_poly(self) -> MultiPoly:
        if not self.den.is_const():
            raise ValueError("rational function has a nontrivial denominator")
        return self.num * (1 / self.den.const_value())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RatFunc)
            and self.num == other.num
            and self.den == other.den
        )

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other: "RatFunc") -> "RatFunc":
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den, _canonical=True)

    def __sub__(self, other: "RatFunc") -> "RatFunc":
        return self + (-other)

    def __mul__(self, other) -> "RatFunc":
        if isinstance(other, (int, Fraction)):
            return RatFunc(self.num * Fraction(other), self.den)
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RatFunc":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return RatFunc(self.den, self.num)

    def __truediv__(self, other: "RatFunc") -> "RatFunc":
        return self * other.inverse()

    def extended(self, new_nvars: int, index_map: List[int]) -> "RatFunc":
        return RatFunc(self.num.extended(new_nvars, index_map), self.den.extended(new_nvars, index_map), _canonical=True)

    def eval_fraction(self, values: List[Fraction]) -> Fraction:
        d = self.den.eval_fraction(values)
        if d == 0:
            raise ZeroDivisionError("denominator vanishes at assignment")
        return self.num.eval_fraction(values) / d

    def eval_float(self, values: List[float]) -> float:
        d = self.den.eval_float(values)
        if d == 0.0:
            raise ZeroDivisionError("denominator vanishes at assignment")
        return self.num.eval_float(values) / d

    def sqrt(self) -> Optional["RatFunc"]:
        sn = poly_sqrt(self.num)
        if sn is None:
            return None
        sd = poly_sqrt(self.den)
        if sd is None:
            return None
        return RatFunc(sn, sd)

    def __repr__(self):
        return f"RatFunc({self.num!r}, {self.den!r})"
