"""Coordinate charts with user-declared validity inequalities."""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import expr as E
from . import jet as J
from .errors import InputError

_RELATION = re.compile(r"^(.*?)(>=|<=|!=|>|<)(.*)$")


@dataclass(frozen=True)
class Inequality:
    """``lhs op rhs`` with ``op`` in ``> >= < <= !=``."""

    lhs: E.Expr
    op: str
    rhs: E.Expr

    @classmethod
    def parse(cls, text: str, coords) -> "Inequality":
        m = _RELATION.match(text.strip())
        if not m:
            raise InputError(f"validity condition {text!r} needs one of > >= < <= !=")
        return cls(E.parse(m.group(1), coords), m.group(2), E.parse(m.group(3), coords))

    def holds(self, point, mode: str = J.RATIONAL) -> bool:
        a = E.evaluate(self.lhs, point, mode)
        b = E.evaluate(self.rhs, point, mode)
        return {
            ">": a > b,
            ">=": a >= b,
            "<": a < b,
            "<=": a <= b,
            "!=": a != b,
        }[self.op]

    def to_text(self) -> str:
        return f"{E.to_text(self.lhs)} {self.op} {E.to_text(self.rhs)}"


@dataclass(frozen=True)
class Chart:
    coords: tuple
    validity: tuple = ()

    @classmethod
    def build(cls, coords, validity=()) -> "Chart":
        coords = tuple(coords)
        if len(set(coords)) != len(coords):
            raise InputError(f"duplicate coordinate names in {coords}")
        return cls(coords, tuple(v if isinstance(v, Inequality) else Inequality.parse(v, coords) for v in validity))

    @property
    def dim(self) -> int:
        return len(self.coords)

    def check(self, point, mode: str = J.RATIONAL):
        """Raise :class:`InputError` if ``point`` has the wrong size or violates a condition."""
        if len(point) != self.dim:
            raise InputError(f"point {tuple(point)} has {len(point)} coordinates, chart has {self.dim}")
        pt = tuple(J.to_scalar(x, mode) for x in point)
        for v in self.validity:
            if not v.holds(pt, mode):
                raise InputError(f"point {tuple(str(x) for x in point)} violates validity condition {v.to_text()}")
        return pt
