"""Recursive-descent parser for the scalar expression grammar.

Grammar (EBNF):

    expression := term {("+" | "-") term}
    term       := unary {("*" | "/") unary}
    unary      := ("+" | "-") unary | power
    power      := atom ["^" integer]
    atom       := integer | identifier | "(" expression ")"
                | "sqrt" "(" expression ")"

Identifiers name declared parameters or declared radicals.  ``sqrt(e)``
resolves against the declared radicals: the radicand must equal a
declared radicand, or differ from one by a square rational factor.
``sqrt(2)`` auto-declares a canonical radical named ``sqrt2`` when no
radical with radicand 2 exists.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple, Union

from .context import Context, ExprError, ParameterDecl
from .polynomial import fraction_sqrt
from .tower import TowerScalar, lift, tower_sqrt


class ParseError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_TOKEN_CHARS = set("+-*/^()")


def _tokenize(text: str) -> List[Tuple[str, Union[str, int], int]]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _TOKEN_CHARS:
            tokens.append(("op", ch, i))
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(("int", int(text[i:j]), i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(("name", text[i:j], i))
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", n))
    return tokens


class Parser:
    """Parses expressions against a context, which may grow a ``sqrt2`` radical."""

    def __init__(self, ctx: Context):
        self.ctx = ctx
        self._tokens: List[Tuple[str, Union[str, int], int]] = []
        self._pos = 0

    def parse(self, text: str) -> TowerScalar:
        self._tokens = _tokenize(text)
        self._pos = 0
        value = self._expression()
        kind, _, pos = self._peek()
        if kind != "end":
            raise ParseError("unexpected trailing input", pos)
        return value

    # -- token plumbing -------------------------------------------------
    def _peek(self):
        return self._tokens[self._pos]

    def _next(self):
        tok = self._tokens[self._pos]
        self._pos += 1
        return tok

    def _accept_op(self, *ops: str) -> Optional[str]:
        kind, val, _ = self._peek()
        if kind == "op" and val in ops:
            self._next()
            return val  # type: ignore[return-value]
        return None

    def _expect_op(self, op: str) -> None:
        kind, val, pos = self._peek()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", pos)
        self._next()

    # -- grammar ----------------------------------------------------------
    def _expression(self) -> TowerScalar:
        value = self._term()
        while True:
            op = self._accept_op("+", "-")
            if op is None:
                return value
            rhs = self._term()
            value = value + rhs if op == "+" else value - rhs

    def _term(self) -> TowerScalar:
        value = self._unary()
        while True:
            op = self._accept_op("*", "/")
            if op is None:
                return value
            rhs = self._unary()
            value = value * rhs if op == "*" else value / rhs

    def _unary(self) -> TowerScalar:
        op = self._accept_op("+", "-")
        if op is not None:
            v = self._unary()
            return v if op == "+" else -v
        return self._power()

    def _power(self) -> TowerScalar:
        base = self._atom()
        if self._accept_op("^"):
            kind, val, pos = self._peek()
            neg = False
            if kind == "op" and val == "-":
                self._next()
                neg = True
                kind, val, pos = self._peek()
            if kind != "int":
                raise ParseError("exponent must be an integer", pos)
            self._next()
            return base ** (-val if neg else val)  # type: ignore[operator]
        return base

    def _atom(self) -> TowerScalar:
        kind, val, pos = self._peek()
        if kind == "int":
            self._next()
            return TowerScalar.const(self.ctx, val)
        if kind == "op" and val == "(":
            self._next()
            inner = self._expression()
            self._expect_op(")")
            return inner
        if kind == "name":
            self._next()
            if val == "sqrt":
                self._expect_op("(")
                radicand = self._expression()
                self._expect_op(")")
                return self._resolve_sqrt(radicand, pos)
            name = str(val)
            if self.ctx.has_param(name):
                return TowerScalar.param(self.ctx, name)
            if self.ctx.has_radical(name):
                return TowerScalar.radical(self.ctx, name)
            raise ParseError(f"unknown identifier {name!r}", pos)
        raise ParseError("expected a value", pos)

    def _resolve_sqrt(self, radicand: TowerScalar, pos: int) -> TowerScalar:
        radicand = lift(radicand, self.ctx)
        if radicand.is_zero():
            return radicand
        # exact square inside the tower (covers sqrt(4), sqrt of declared
        # radicand times a square rational, nested products, ...)
        direct = tower_sqrt(radicand)
        if direct is not None:
            return direct
        for rad in self.ctx.tower:
            target = lift(rad.radicand, self.ctx)
            if target.is_zero():
                continue
            ratio = radicand * target.inverse()
            if ratio.is_rational():
                q = fraction_sqrt(ratio.rational_value())
                if q is not None:
                    return TowerScalar.radical(self.ctx, rad.name) * q
        if radicand.is_rational() and radicand.rational_value() == 2 and not self.ctx.has_radical("sqrt2"):
            base = self.ctx
            self.ctx = base.with_radical("sqrt2", TowerScalar.const(base, 2))
            return TowerScalar.radical(self.ctx, "sqrt2")
        raise ParseError("sqrt of an undeclared radicand", pos)


def build_context(
    params: Sequence[Union[str, ParameterDecl]] = (),
    radicals: Sequence[Tuple[str, str]] = (),
    mode: str = "field",
) -> Context:
    """Construct a context, parsing radicand expressions left to right
    in the partially built tower."""
    decls = [p if isinstance(p, ParameterDecl) else ParameterDecl(p) for p in params]
    ctx = Context(decls, (), mode)
    for name, rad_text in radicals:
        radicand = Parser(ctx).parse(rad_text)
        ctx = ctx.with_radical(name, radicand)
    return ctx


def parse_expression(text: str, ctx: Context) -> TowerScalar:
    """Parse ``text`` in ``ctx``.  The result's context may extend ``ctx``
    by the auto-declared ``sqrt2`` radical."""
    return Parser(ctx).parse(text)
