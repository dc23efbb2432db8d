"""Pointwise check reports shared by the classifiers, spi and deformation checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from . import jet as J

DEFAULT_TOLERANCE = 1e-9


def passes(residual, mode: str, tolerance: float, scale: float = 1.0) -> bool:
    """Exact zero in rational mode; ``|r| <= tol * max(1, scale)`` in float mode."""
    if mode == J.RATIONAL and not isinstance(residual, float):
        return residual == 0
    return abs(float(residual)) <= tolerance * max(1.0, float(scale))


@dataclass
class ClassificationReport:
    """Residuals of one predicate at a sample of points.

    ``residuals[p]`` maps clause names to non-negative scalars at point ``p``;
    a point passes when every clause passes (see :func:`passes`).
    ``witnesses`` records boolean verdicts of equivalent characterizations
    per point, and ``agreement`` whether they coincide everywhere.
    """

    predicate: str
    points: list
    mode: str
    tolerance: float
    residuals: list = field(default_factory=list)
    scales: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    required: list | None = None
    hypothesis: list | None = None

    def add_point(self, residuals: dict, scales: dict | None = None):
        self.residuals.append(dict(residuals))
        self.scales.append(dict(scales or {}))

    def clause_passes(self, p: int, name: str) -> bool:
        return passes(self.residuals[p][name], self.mode, self.tolerance, self.scales[p].get(name, 1.0))

    def clauses(self) -> list[str]:
        names: list[str] = []
        for r in self.residuals:
            for k in r:
                if k not in names:
                    names.append(k)
        return names

    def point_verdict(self, p: int) -> bool:
        names = self.required if self.required is not None else list(self.residuals[p])
        return all(self.clause_passes(p, k) for k in names if k in self.residuals[p])

    @property
    def verdicts(self) -> list[bool]:
        return [self.point_verdict(p) for p in range(len(self.residuals))]

    @property
    def verdict(self) -> bool:
        return all(self.verdicts)

    def clause_verdict(self, name: str) -> bool:
        return all(self.clause_passes(p, name) for p in range(len(self.residuals)) if name in self.residuals[p])

    def failing_clauses(self) -> list[str]:
        return [k for k in self.clauses() if not self.clause_verdict(k)]

    def add_witness(self, name: str, values: list[bool]):
        self.witnesses[name] = list(values)

    @property
    def agreement(self) -> bool | None:
        if len(self.witnesses) < 2:
            return None
        cols = list(self.witnesses.values())
        return all(len(set(vals)) == 1 for vals in zip(*cols))

    def max_residual(self, name: str):
        vals = [r[name] for r in self.residuals if name in r]
        return max(vals) if vals else 0

    def to_dict(self) -> dict:
        out = {
            "predicate": self.predicate,
            "mode": self.mode,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "points": [list(p) for p in self.points],
            "per_point": [
                {"verdict": v, "residuals": dict(r)} for v, r in zip(self.verdicts, self.residuals)
            ],
        }
        if self.witnesses:
            out["witnesses"] = dict(self.witnesses)
            out["agreement"] = self.agreement
        if self.hypothesis is not None:
            out["hypothesis"] = list(self.hypothesis)
        if self.notes:
            out["notes"] = list(self.notes)
        return out
