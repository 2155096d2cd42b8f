"""Truncated Taylor/Laurent expansion of tower scalars in one parameter.

Expansion is division-free in the Newton sense: fractions expand by a
linear recurrence against the denominator's lowest coefficient, and
square roots expand by the binomial series around the radicand's value
at the expansion point.  That value must itself possess a square root
inside the variable-free part of the tower.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Optional

from .context import BranchPointError, Context, ExprError
from .polynomial import MultiPoly, RatFunc
from .tower import TowerScalar, lift, tower_sqrt

Series = Dict[int, TowerScalar]


def _series_add(a: Series, b: Series) -> Series:
    out = dict(a)
    for k, v in b.items():
        s = out.get(k)
        s = v if s is None else s + v
        if s.is_zero():
            out.pop(k, None)
        else:
            out[k] = s
    return out


def _series_mul(a: Series, b: Series, hi: int) -> Series:
    out: Series = {}
    for k1, v1 in a.items():
        for k2, v2 in b.items():
            k = k1 + k2
            if k > hi:
                continue
            p = v1 * v2
            s = out.get(k)
            s = p if s is None else s + p
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
    return out


def _series_scale(a: Series, c: TowerScalar) -> Series:
    out: Series = {}
    for k, v in a.items():
        p = v * c
        if not p.is_zero():
            out[k] = p
    return out


def _rf_laurent(ctx: Context, rf: RatFunc, vi: int, hi: int) -> Series:
    if rf.is_zero():
        return {}
    num_c = rf.num.coeffs_in(vi)
    den_c = rf.den.coeffs_in(vi)
    vn = min(num_c)
    vd = min(den_c)
    shift = vn - vd
    length = hi - shift + 1
    if length <= 0:
        return {}
    d0 = RatFunc(den_c[vd])
    coeffs: List[RatFunc] = []
    for j in range(length):
        acc = RatFunc(num_c.get(vn + j, MultiPoly.zero(rf.nvars)))
        for i in range(1, j + 1):
            di = den_c.get(vd + i)
            if di is not None:
                acc = acc - RatFunc(di) * coeffs[j - i]
        coeffs.append(acc / d0)
    out: Series = {}
    for j, c in enumerate(coeffs):
        if not c.is_zero():
            out[shift + j] = TowerScalar.from_ratfunc(ctx, c)
    return out


def _min_shift(ts: TowerScalar, vi: int) -> int:
    m = 0
    for rf in ts.coords.values():
        num_c = rf.num.coeffs_in(vi)
        den_c = rf.den.coeffs_in(vi)
        if num_c:
            m = min(m, min(num_c) - min(den_c))
    return m


def _sqrt_series(radicand_series: Series, hi: int, var_free_mask: int, rad_name: str) -> Series:
    if not radicand_series:
        raise BranchPointError(f"radicand of {rad_name!r} is zero")
    v = min(radicand_series)
    if v < 0:
        raise BranchPointError(f"radicand of {rad_name!r} has a pole at the expansion point")
    if v > 0:
        raise BranchPointError(f"radicand of {rad_name!r} vanishes at the expansion point")
    c0 = radicand_series[0]
    w0 = tower_sqrt(c0, allowed_mask=var_free_mask)
    if w0 is None:
        raise BranchPointError(
            f"square root of the constant term of {rad_name!r} is not expressible in the tower"
        )
    inv_c0 = c0.inverse()
    u: Series = {k: v_ * inv_c0 for k, v_ in radicand_series.items() if k > 0}
    # binomial series sqrt(1+u) = sum binom(1/2, j) u^j
    result: Series = {0: TowerScalar.one(c0.ctx)}
    power: Series = {0: TowerScalar.one(c0.ctx)}
    binom = Fraction(1)
    for j in range(1, hi + 1):
        power = _series_mul(power, u, hi)
        if not power:
            break
        binom = binom * (Fraction(1, 2) - (j - 1)) / j
        result = _series_add(result, {k: v_ * binom for k, v_ in power.items()})
    return _series_scale(result, w0)


class _Expander:
    def __init__(self, ts: TowerScalar, var: str):
        self.ctx = ts.ctx
        self.vi = self.ctx.param_index(var)
        self.var = var
        self.ts = ts
        self.var_dep = []
        mask = 0
        for i, rad in enumerate(self.ctx.tower):
            dep = lift(rad.radicand, self.ctx).involves_param(var)
            self.var_dep.append(dep)
            if not dep:
                mask |= 1 << i
        self.var_free_mask = mask
        self.rad_series: List[Optional[Series]] = [None] * len(self.ctx.tower)

    def _ensure_radicals(self, hi: int) -> None:
        for i, rad in enumerate(self.ctx.tower):
            if not self.var_dep[i]:
                continue
            radicand = lift(rad.radicand, self.ctx)
            rs = self._ts_laurent(radicand, hi)
            self.rad_series[i] = _sqrt_series(rs, hi, self.var_free_mask, rad.name)

    def _ts_laurent(self, ts: TowerScalar, hi: int) -> Series:
        out: Series = {}
        for bits, rf in ts.coords.items():
            part = _rf_laurent(self.ctx, rf, self.vi, hi)
            for i in range(len(self.ctx.tower)):
                if not bits >> i & 1:
                    continue
                if self.var_dep[i]:
                    rs = self.rad_series[i]
                    if rs is None:
                        raise ExprError("internal: radical series not prepared")
                    part = _series_mul(part, rs, hi)
                else:
                    part = _series_scale(part, TowerScalar.radical(self.ctx, self.ctx.tower[i].name))
            out = _series_add(out, part)
        return out

    def laurent(self, hi: int) -> Series:
        pad = max(0, -_min_shift(self.ts, self.vi))
        # radicals are analytic; expanding them below order zero is vacuous
        self._ensure_radicals(max(hi + pad, 0))
        return self._ts_laurent(self.ts, hi)


def laurent_coeffs(ts: TowerScalar, var: str, hi: int) -> Series:
    """All Laurent coefficients of ``ts`` at var=0 up to order ``hi``."""
    return _Expander(ts, var).laurent(hi)


def series_expand(ts: TowerScalar, var: str, order: int) -> List[TowerScalar]:
    """Taylor coefficients c_0..c_order; raises on a pole at var=0."""
    ser = laurent_coeffs(ts, var, order)
    neg = [k for k in ser if k < 0]
    if neg:
        raise BranchPointError(f"pole of order {-min(neg)} at {var}=0")
    zero = TowerScalar.zero(ts.ctx)
    return [ser.get(k, zero) for k in range(order + 1)]


def value_at_zero(ts: TowerScalar, var: str) -> TowerScalar:
    """Limit at var=0 through the series (sound even where the radical
    basis degenerates and plain substitution would report a pole)."""
    return series_expand(ts, var, 0)[0]
