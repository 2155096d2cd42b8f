"""Parameter/radical declarations and the shared scalar context."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


class ExprError(Exception):
    """Base class for scalar-engine errors."""


class DivisionByZeroScalar(ExprError):
    pass


class RingModeViolation(ExprError):
    """Division by a non-unit while the ring discipline is active."""


class BranchPointError(ExprError):
    """A radicand vanishes or a pole sits at the expansion point."""


@dataclass(frozen=True)
class ParameterDecl:
    name: str
    is_unit: bool = False


@dataclass(frozen=True)
class Radical:
    """Square-root generator; the radicand lives strictly below it in the tower."""
    name: str
    radicand: object  # TowerScalar over the prefix context


class Context:
    """Ordered parameters plus a tower of square-root extensions.

    Contexts are immutable; extension returns a new context into which
    scalars from the old one can be lifted.  ``mode`` is "field" or
    "ring"; ring mode restricts division to unit-composed divisors.
    """

    __slots__ = ("params", "tower", "mode", "_pindex", "_rindex")

    def __init__(self, params: Sequence[ParameterDecl] = (), tower: Sequence[Radical] = (), mode: str = "field"):
        if mode not in ("field", "ring"):
            raise ValueError("mode must be 'field' or 'ring'")
        names = [p.name for p in params] + [r.name for r in tower]
        if len(set(names)) != len(names):
            raise ValueError("parameter/radical names must be unique")
        self.params = tuple(params)
        self.tower = tuple(tower)
        self.mode = mode
        self._pindex = {p.name: i for i, p in enumerate(self.params)}
        self._rindex = {r.name: i for i, r in enumerate(self.tower)}

    # -- lookup ---------------------------------------------------------
    @property
    def nvars(self) -> int:
        return len(self.params)

    def param_index(self, name: str) -> int:
        try:
            return self._pindex[name]
        except KeyError:
            raise ExprError(f"unknown parameter {name!r}") from None

    def has_param(self, name: str) -> bool:
        return name in self._pindex

    def radical_index(self, name: str) -> int:
        try:
            return self._rindex[name]
        except KeyError:
            raise ExprError(f"unknown radical {name!r}") from None

    def has_radical(self, name: str) -> bool:
        return name in self._rindex

    def is_unit_param(self, index: int) -> bool:
        return self.params[index].is_unit

    # -- extension --------------------------------------------------------
    def with_params(self, new_params: Sequence[ParameterDecl]) -> "Context":
        return Context(tuple(self.params) + tuple(new_params), self.tower, self.mode)

    def with_radical(self, name: str, radicand) -> "Context":
        return Context(self.params, tuple(self.tower) + (Radical(name, radicand),), self.mode)

    def with_mode(self, mode: str) -> "Context":
        return Context(self.params, self.tower, mode)

    def extends(self, other: "Context") -> bool:
        """True if ``self`` contains ``other``'s params/tower as subsequences
        (params may be appended anywhere; tower order must be preserved)."""
        for p in other.params:
            q = self._pindex.get(p.name)
            if q is None or self.params[q].is_unit != p.is_unit:
                return False
        last = -1
        for r in other.tower:
            q = self._rindex.get(r.name)
            if q is None or q <= last:
                return False
            last = q
        return True

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Context)
            and self.params == other.params
            and tuple(r.name for r in self.tower) == tuple(r.name for r in other.tower)
            and self.mode == other.mode
        )

    def __hash__(self):
        return hash((self.params, tuple(r.name for r in self.tower), self.mode))

    def __repr__(self):
        ps = ",".join(p.name + ("*" if p.is_unit else "") for p in self.params)
        rs = ",".join(r.name for r in self.tower)
        return f"Context([{ps}]; tower=[{rs}]; {self.mode})"
