"""Exact scalars in a tower of square-root extensions over Q(params).

A TowerScalar is a finite sum  sum_B  c_B * prod_{i in B} r_i  where B
runs over subsets of the declared radicals (encoded as bitmasks) and
each coordinate c_B is a reduced rational function.  Squares of
radicals rewrite through their radicands, so exponents stay 0/1 and
the zero test reduces to "all coordinates zero".
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .context import (
    BranchPointError,
    Context,
    DivisionByZeroScalar,
    ExprError,
    RingModeViolation,
)
from .polynomial import MultiPoly, RatFunc, grlex_key


class TowerScalar:
    __slots__ = ("ctx", "coords")

    def __init__(self, ctx: Context, coords: Dict[int, RatFunc], *, _clean: bool = False):
        self.ctx = ctx
        if _clean:
            self.coords = coords
        else:
            self.coords = {b: c for b, c in coords.items() if not c.is_zero()}

    # -- constructors --------------------------------------------------
    @classmethod
    def zero(cls, ctx: Context) -> "TowerScalar":
        return cls(ctx, {}, _clean=True)

    @classmethod
    def const(cls, ctx: Context, value) -> "TowerScalar":
        v = Fraction(value)
        if v == 0:
            return cls.zero(ctx)
        return cls(ctx, {0: RatFunc.const(ctx.nvars, v)}, _clean=True)

    @classmethod
    def one(cls, ctx: Context) -> "TowerScalar":
        return cls.const(ctx, 1)

    @classmethod
    def param(cls, ctx: Context, name: str) -> "TowerScalar":
        i = ctx.param_index(name)
        return cls(ctx, {0: RatFunc(MultiPoly.variable(ctx.nvars, i))}, _clean=True)

    @classmethod
    def radical(cls, ctx: Context, name: str) -> "TowerScalar":
        i = ctx.radical_index(name)
        return cls(ctx, {1 << i: RatFunc.const(ctx.nvars, 1)}, _clean=True)

    @classmethod
    def from_ratfunc(cls, ctx: Context, rf: RatFunc) -> "TowerScalar":
        if rf.nvars != ctx.nvars:
            raise ValueError("variable count mismatch")
        return cls(ctx, {0: rf})

    # -- predicates -----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.coords

    def is_rational(self) -> bool:
        if self.is_zero():
            return True
        if set(self.coords) != {0}:
            return False
        rf = self.coords[0]
        return rf.num.is_const() and rf.den.is_const()

    def rational_value(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        if not self.is_rational():
            raise ExprError("scalar is not a rational constant")
        rf = self.coords[0]
        return rf.num.const_value() / rf.den.const_value()

    def is_ratfunc(self) -> bool:
        return self.is_zero() or set(self.coords) == {0}

    def as_ratfunc(self) -> RatFunc:
        if self.is_zero():
            return RatFunc.zero(self.ctx.nvars)
        if not self.is_ratfunc():
            raise ExprError("scalar involves radicals")
        return self.coords[0]

    def involves_param(self, name: str) -> bool:
        i = self.ctx.param_index(name)
        for rf in self.coords.values():
            if rf.num.involves(i) or rf.den.involves(i):
                return True
        for b in self.coords:
            k = 0
            while b:
                if b & 1 and self._radicand(k).involves_param(name):
                    return True
                b >>= 1
                k += 1
        return False

    def __eq__(self, other) -> bool:
        if not isinstance(other, TowerScalar):
            return NotImplemented
        a, b = coerce(self, other)
        return a.coords == b.coords

    def __hash__(self):
        return hash(tuple(sorted((b, hash(c)) for b, c in self.coords.items())))

    # -- context helpers --------------------------------------------------
    def _radicand(self, i: int) -> "TowerScalar":
        rad = self.ctx.tower[i].radicand
        return lift(rad, self.ctx)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other) -> "TowerScalar":
        other = _as_scalar(self.ctx, other)
        a, b = coerce(self, other)
        out = dict(a.coords)
        for k, c in b.coords.items():
            s = out.get(k)
            s = c if s is None else s + c
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return TowerScalar(a.ctx, out, _clean=True)

    __radd__ = __add__

    def __neg__(self) -> "TowerScalar":
        return TowerScalar(self.ctx, {b: -c for b, c in self.coords.items()}, _clean=True)

    def __sub__(self, other) -> "TowerScalar":
        return self + (-_as_scalar(self.ctx, other))

    def __rsub__(self, other) -> "TowerScalar":
        return _as_scalar(self.ctx, other) - self

    def __mul__(self, other) -> "TowerScalar":
        if isinstance(other, (int, Fraction)):
            f = Fraction(other)
            if f == 0:
                return TowerScalar.zero(self.ctx)
            return TowerScalar(self.ctx, {b: c * f for b, c in self.coords.items()}, _clean=True)
        other = _as_scalar(self.ctx, other)
        a, b = coerce(self, other)
        acc = TowerScalar.zero(a.ctx)
        for b1, c1 in a.coords.items():
            for b2, c2 in b.coords.items():
                acc = acc + _basis_mul(a.ctx, b1, b2, c1 * c2)
        return acc

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "TowerScalar":
        if n < 0:
            return self.inverse() ** (-n)
        result = TowerScalar.one(self.ctx)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def inverse(self) -> "TowerScalar":
        if self.is_zero():
            raise DivisionByZeroScalar("division by the zero scalar")
        if self.is_ratfunc():
            return TowerScalar(self.ctx, {0: self.coords[0].inverse()}, _clean=True)
        h = max(b.bit_length() for b in self.coords) - 1
        mask = 1 << h
        u = TowerScalar(self.ctx, {b: c for b, c in self.coords.items() if not b & mask}, _clean=True)
        v = TowerScalar(self.ctx, {b ^ mask: c for b, c in self.coords.items() if b & mask}, _clean=True)
        # (u + v r)(u - v r) = u^2 - v^2 rad(r), which lives strictly lower
        norm = u * u - v * v * self._radicand(h)
        if norm.is_zero():
            raise ExprError(
                f"tower is degenerate: norm against radical {self.ctx.tower[h].name!r} vanishes"
            )
        conj = u - v * TowerScalar.radical(self.ctx, self.ctx.tower[h].name)
        return conj * norm.inverse()

    def _check_unit_divisor(self) -> None:
        """Ring discipline: the divisor must be built from units and rationals."""
        for b, rf in self.coords.items():
            if len(rf.den.terms) != 1:
                raise RingModeViolation("division by a non-unit denominator")
            for e in rf.den.terms:
                for i, k in enumerate(e):
                    if k and not self.ctx.is_unit_param(i):
                        raise RingModeViolation(
                            f"division by non-unit parameter {self.ctx.params[i].name!r}"
                        )
        if len(self.coords) != 1:
            raise RingModeViolation("division by a sum is not unit-composed")
        (b, rf), = self.coords.items()
        if len(rf.num.terms) != 1:
            raise RingModeViolation("division by a sum is not unit-composed")
        for e in rf.num.terms:
            for i, k in enumerate(e):
                if k and not self.ctx.is_unit_param(i):
                    raise RingModeViolation(
                        f"division by non-unit parameter {self.ctx.params[i].name!r}"
                    )

    def __truediv__(self, other) -> "TowerScalar":
        other = _as_scalar(self.ctx, other)
        a, b = coerce(self, other)
        if b.is_zero():
            raise DivisionByZeroScalar("division by the zero scalar")
        if a.ctx.mode == "ring":
            b._check_unit_divisor()
        return a * b.inverse()

    def __rtruediv__(self, other) -> "TowerScalar":
        return _as_scalar(self.ctx, other) / self

    # -- substitution and evaluation ---------------------------------------
    def substitute(self, name: str, value) -> "TowerScalar":
        """Substitute a scalar for a parameter.

        Radicals whose radicand involves the parameter are re-derived
        bottom-up: each substituted radicand must have a square root
        expressible in the unaffected part of the tower.
        """
        ctx = self.ctx
        value = _as_scalar(ctx, value)
        if value.ctx != ctx:
            value, _ = coerce(value, TowerScalar.zero(ctx))
        idx = ctx.param_index(name)
        ntower = len(ctx.tower)
        # radicals actually referenced (transitively through radicands)
        needed = 0
        for b in self.coords:
            needed |= b
        for i in range(ntower - 1, -1, -1):
            if needed >> i & 1:
                for b in lift(ctx.tower[i].radicand, ctx).coords:
                    needed |= b
        rad_image: List[Optional[TowerScalar]] = []
        affected: List[bool] = []
        allowed = 0
        for i, rad in enumerate(ctx.tower):
            radc = lift(rad.radicand, ctx)
            direct = any(rf.num.involves(idx) or rf.den.involves(idx) for rf in radc.coords.values())
            through = any(
                b >> k & 1 and affected[k]
                for b in radc.coords
                for k in range(i)
            )
            affected.append(direct or through)
            if not affected[i]:
                rad_image.append(None)
                allowed |= 1 << i
                continue
            if not needed >> i & 1:
                rad_image.append(None)  # never multiplied in; keep unusable
                continue
            sub = _apply_images(ctx, radc, idx, value, rad_image)
            w = tower_sqrt(sub, allowed_mask=allowed)
            if w is None:
                raise BranchPointError(
                    f"cannot express sqrt of substituted radicand for {rad.name!r} in the tower"
                )
            rad_image.append(w)
        return _apply_images(ctx, self, idx, value, rad_image)

    def eval_numeric(self, assignment: Dict[str, float]) -> float:
        ctx = self.ctx
        needed_rads = 0
        for b in self.coords:
            needed_rads |= b
        for i in range(len(ctx.tower) - 1, -1, -1):
            if needed_rads >> i & 1:
                for b in lift(ctx.tower[i].radicand, ctx).coords:
                    needed_rads |= b
        used_params = set()
        sources = list(self.coords.values())
        for i in range(len(ctx.tower)):
            if needed_rads >> i & 1:
                sources.extend(lift(ctx.tower[i].radicand, ctx).coords.values())
        for rf in sources:
            for k in range(ctx.nvars):
                if rf.num.involves(k) or rf.den.involves(k):
                    used_params.add(k)
        values = []
        for k, p in enumerate(ctx.params):
            if p.name in assignment:
                values.append(float(assignment[p.name]))
            elif k in used_params:
                raise ExprError(f"parameter {p.name!r} not assigned")
            else:
                values.append(0.0)
        rad_vals: List[float] = []
        for i, rad in enumerate(ctx.tower):
            if not needed_rads >> i & 1:
                rad_vals.append(0.0)
                continue
            rv = lift(rad.radicand, ctx)._eval_with(values, rad_vals)
            if rv < 0:
                raise BranchPointError(f"negative radicand for {rad.name!r}: {rv}")
            rad_vals.append(math.sqrt(rv))
        return self._eval_with(values, rad_vals)

    def _eval_with(self, values: List[float], rad_vals: List[float]) -> float:
        total = 0.0
        for b, rf in self.coords.items():
            x = rf.eval_float(values)
            k = 0
            bb = b
            while bb:
                if bb & 1:
                    x *= rad_vals[k]
                bb >>= 1
                k += 1
            total += x
        return total

    # -- printing -----------------------------------------------------------
    def to_text(self) -> str:
        if self.is_zero():
            return "0"
        pieces = []
        for b in sorted(self.coords):
            rf = self.coords[b]
            rads = [self.ctx.tower[i].name for i in range(len(self.ctx.tower)) if b >> i & 1]
            body = _rf_text(self.ctx, rf)
            if rads:
                if body == "1":
                    body = "*".join(rads)
                elif body == "-1":
                    body = "-" + "*".join(rads)
                else:
                    body = f"({body})*" + "*".join(rads)
            pieces.append(body)
        return " + ".join(f"({p})" for p in pieces) if len(pieces) > 1 else pieces[0]

    def __repr__(self):
        return f"<TowerScalar {self.to_text()}>"


# -- helpers ----------------------------------------------------------------

def _as_scalar(ctx: Context, value) -> TowerScalar:
    if isinstance(value, TowerScalar):
        return value
    if isinstance(value, (int, Fraction)):
        return TowerScalar.const(ctx, value)
    raise TypeError(f"cannot interpret {value!r} as a scalar")


def lift(ts: TowerScalar, ctx: Context) -> TowerScalar:
    """Re-embed a scalar into an extending context."""
    if ts.ctx == ctx:
        return ts
    if not ctx.extends(ts.ctx):
        raise ExprError("incompatible scalar contexts")
    pmap = [ctx.param_index(p.name) for p in ts.ctx.params]
    rmap = [ctx.radical_index(r.name) for r in ts.ctx.tower]
    out: Dict[int, RatFunc] = {}
    for b, rf in ts.coords.items():
        nb = 0
        k = 0
        bb = b
        while bb:
            if bb & 1:
                nb |= 1 << rmap[k]
            bb >>= 1
            k += 1
        out[nb] = rf.extended(ctx.nvars, pmap)
    return TowerScalar(ctx, out, _clean=True)


def coerce(a: TowerScalar, b: TowerScalar) -> Tuple[TowerScalar, TowerScalar]:
    if a.ctx == b.ctx:
        return a, b
    if a.ctx.extends(b.ctx):
        return a, lift(b, a.ctx)
    if b.ctx.extends(a.ctx):
        return lift(a, b.ctx), b
    raise ExprError("incompatible scalar contexts")


def _basis_mul(ctx: Context, b1: int, b2: int, coeff: RatFunc) -> TowerScalar:
    common = b1 & b2
    xor = b1 ^ b2
    out = TowerScalar(ctx, {xor: coeff}, _clean=True)
    k = 0
    while common:
        if common & 1:
            rad = ctx.tower[k].radicand
            out = out * lift(rad, ctx)
        common >>= 1
        k += 1
    return out


def _apply_images(ctx: Context, ts: TowerScalar, idx: int, value: TowerScalar,
                  rad_image: List[Optional[TowerScalar]]) -> TowerScalar:
    out = TowerScalar.zero(ctx)
    for b, rf in ts.coords.items():
        piece = _rf_substitute(ctx, rf, idx, value)
        k = 0
        bb = b
        while bb:
            if bb & 1:
                img = rad_image[k] if k < len(rad_image) else None
                piece = piece * (img if img is not None else TowerScalar.radical(ctx, ctx.tower[k].name))
            bb >>= 1
            k += 1
        out = out + piece
    return out


def _rf_substitute(ctx: Context, rf: RatFunc, idx: int, value: TowerScalar) -> TowerScalar:
    num = _poly_substitute(ctx, rf.num, idx, value)
    if rf.den.is_const():
        return num * TowerScalar.const(ctx, Fraction(1) / rf.den.const_value())
    den = _poly_substitute(ctx, rf.den, idx, value)
    if den.is_zero():
        raise BranchPointError("pole at substitution point")
    return num * den.inverse()


def _poly_substitute(ctx: Context, p: MultiPoly, idx: int, value: TowerScalar) -> TowerScalar:
    coeffs = p.coeffs_in(idx)
    if not coeffs:
        return TowerScalar.zero(ctx)
    degs = sorted(coeffs, reverse=True)
    acc = TowerScalar.from_ratfunc(ctx, RatFunc(coeffs[degs[0]]))
    prev = degs[0]
    for d in degs[1:]:
        acc = acc * value ** (prev - d) + TowerScalar.from_ratfunc(ctx, RatFunc(coeffs[d]))
        prev = d
    return acc * value ** prev


def tower_sqrt(c: TowerScalar, allowed_mask: Optional[int] = None) -> Optional[TowerScalar]:
    """Square root of a scalar inside the existing tower, if one exists
    in the simple form  (rational function) * (product of radicals).
    Returns the branch whose leading data is positive."""
    if c.is_zero():
        return c
    ctx = c.ctx
    n = len(ctx.tower)
    for bits in range(1 << n):
        if allowed_mask is not None and bits & ~allowed_mask:
            continue
        denom = TowerScalar.one(ctx)
        ok = True
        for i in range(n):
            if bits >> i & 1:
                denom = denom * lift(ctx.tower[i].radicand, ctx)
        if denom.is_zero():
            continue
        ratio = c * denom.inverse()
        if not ratio.is_ratfunc():
            continue
        root = ratio.as_ratfunc().sqrt()
        if root is None:
            continue
        out = TowerScalar.from_ratfunc(ctx, root)
        for i in range(n):
            if bits >> i & 1:
                out = out * TowerScalar.radical(ctx, ctx.tower[i].name)
        return out
    return None


# -- canonical text form ------------------------------------------------------

def _mono_text(ctx: Context, e, c: Fraction) -> str:
    parts = []
    if c.denominator == 1:
        coeff = str(c.numerator)
    else:
        coeff = f"{c.numerator}/{c.denominator}"
    vars_part = [
        ctx.params[i].name + (f"^{k}" if k > 1 else "")
        for i, k in enumerate(e)
        if k
    ]
    if not vars_part:
        return coeff
    if c == 1:
        return "*".join(vars_part)
    if c == -1:
        return "-" + "*".join(vars_part)
    return "*".join([coeff] + vars_part)


def _poly_text(ctx: Context, p: MultiPoly) -> str:
    if p.is_zero():
        return "0"
    terms = sorted(p.terms.items(), key=lambda kv: grlex_key(kv[0]), reverse=True)
    out = _mono_text(ctx, *terms[0])
    for e, c in terms[1:]:
        t = _mono_text(ctx, e, c)
        out += t if t.startswith("-") else "+" + t
    return out


def _rf_text(ctx: Context, rf: RatFunc) -> str:
    ns = _poly_text(ctx, rf.num)
    if rf.den.is_const() and rf.den.const_value() == 1:
        return ns
    ds = _poly_text(ctx, rf.den)
    return f"({ns})/({ds})"
