"""Scalar polynomial curvature invariants: enumeration, evaluation and
VSI/CSI reports.

An invariant is a list of factors ``nabla^m Rm`` (all slots covariant,
derivative slots first) and a perfect matching of the concatenated slots;
matched slots are contracted with the inverse metric.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import jet as J
from .errors import RankBoundError, ShapeError
from .geometry import Geometry, MetricSpec, VectorFieldSpec
from .report import DEFAULT_TOLERANCE, passes
from .tensor import jtensordot

EXHAUSTIVE_RANK_BOUND = 8


@dataclass(frozen=True)
class InvariantSpec:
    factors: tuple  # derivative order of each factor
    pairs: tuple  # perfect matching on the concatenated slots
    name: str = ""

    def __post_init__(self):
        rank = self.rank
        flat = sorted(s for p in self.pairs for s in p)
        if rank % 2 or flat != list(range(rank)) or any(len(p) != 2 for p in self.pairs):
            raise ShapeError(f"pairs {self.pairs} are not a perfect matching of {rank} slots")

    @property
    def rank(self) -> int:
        return sum(4 + m for m in self.factors)

    @property
    def degree(self) -> int:
        return len(self.factors)

    @property
    def max_deriv(self) -> int:
        return max(self.factors, default=0)

    def slot_offsets(self) -> list[int]:
        out, o = [], 0
        for m in self.factors:
            out.append(o)
            o += 4 + m
        return out

    def label(self) -> str:
        return self.name or f"[{','.join(map(str, self.factors))}]{list(self.pairs)}"


def _spec(name, factors, pairs) -> InvariantSpec:
    return InvariantSpec(tuple(factors), tuple(tuple(p) for p in pairs), name)


# the curated list: (name, factors, pairs)
STANDARD = (
    _spec("R", (0,), [(0, 2), (1, 3)]),
    _spec("R^2", (0, 0), [(0, 2), (1, 3), (4, 6), (5, 7)]),
    _spec("Ric.Ric", (0, 0), [(0, 2), (4, 6), (1, 5), (3, 7)]),
    _spec("Riem.Riem", (0, 0), [(0, 4), (1, 5), (2, 6), (3, 7)]),
    _spec("R^3", (0, 0, 0), [(0, 2), (1, 3), (4, 6), (5, 7), (8, 10), (9, 11)]),
    _spec("R Ric.Ric", (0, 0, 0), [(0, 2), (1, 3), (4, 6), (8, 10), (5, 9), (7, 11)]),
    _spec("R Riem.Riem", (0, 0, 0), [(0, 2), (1, 3), (4, 8), (5, 9), (6, 10), (7, 11)]),
    _spec("Ric^3", (0, 0, 0), [(0, 2), (4, 6), (8, 10), (3, 5), (7, 9), (11, 1)]),
    _spec("Riem^3", (0, 0, 0), [(2, 4), (3, 5), (6, 8), (7, 9), (10, 0), (11, 1)]),
    _spec("dR.dR", (1, 1), [(1, 3), (2, 4), (6, 8), (7, 9), (0, 5)]),
    _spec("dRic.dRic", (1, 1), [(1, 3), (6, 8), (2, 7), (4, 9), (0, 5)]),
    _spec("dRiem.dRiem", (1, 1), [(0, 5), (1, 6), (2, 7), (3, 8), (4, 9)]),
    _spec("box R", (2,), [(0, 1), (2, 4), (3, 5)]),
    _spec("ddRiem.ddRiem", (2, 2), [(i, i + 6) for i in range(6)]),
)


# ---------------------------------------------------------------------------
# exhaustive enumeration


def perfect_matchings(items) -> list[tuple]:
    """All perfect matchings of ``items`` as sorted tuples of pairs."""
    items = list(items)
    if not items:
        return [()]
    a = items[0]
    out = []
    for j in range(1, len(items)):
        rest = items[1:j] + items[j + 1:]
        for sub in perfect_matchings(rest):
            out.append(((a, items[j]),) + sub)
    return out


# symmetries of R_abcd acting on slot positions (perm, sign)
_RIEMANN_SYMS = []
for _swap_ab in (False, True):
    for _swap_cd in (False, True):
        for _pair in (False, True):
            p = [0, 1, 2, 3]
            s = 1
            if _swap_ab:
                p[0], p[1] = p[1], p[0]
                s = -s
            if _swap_cd:
                p[2], p[3] = p[3], p[2]
                s = -s
            if _pair:
                p = [p[2], p[3], p[0], p[1]]
            _RIEMANN_SYMS.append((tuple(p), s))


def _group(factors):
    """Slot permutations with signs generated by Riemann symmetries and swaps of equal factors."""
    offsets, o = [], 0
    for m in factors:
        offsets.append(o)
        o += 4 + m
    rank = o
    per_factor = []
    for m in factors:
        local = []
        for perm, s in _RIEMANN_SYMS:
            local.append((tuple(range(m)) + tuple(m + x for x in perm), s))
        per_factor.append(local)
    orders = [perm for perm in itertools.permutations(range(len(factors))) if all(factors[i] == factors[perm[i]] for i in range(len(factors)))]
    out = []
    for choice in itertools.product(*per_factor):
        for order in orders:
            img = [0] * rank
            sign = 1
            for f, (local, s) in enumerate(choice):
                sign *= s
                target = offsets[order[f]]
                for i, x in enumerate(local):
                    img[offsets[f] + i] = target + x
            out.append((tuple(img), sign))
    return out


def _apply(matching, img):
    return tuple(sorted(tuple(sorted((img[a], img[b]))) for a, b in matching))


@lru_cache(maxsize=None)
def _canonical_classes(factors: tuple) -> tuple:
    rank = sum(4 + m for m in factors)
    group = _group(factors)
    seen = {}
    reps = []
    for mt in perfect_matchings(range(rank)):
        if mt in seen:
            continue
        orbit = {}
        zero = False
        for img, s in group:
            im = _apply(mt, img)
            if im in orbit and orbit[im] != s:
                zero = True
            orbit.setdefault(im, s)
        for im in orbit:
            seen[im] = True
        if not zero:
            reps.append(min(orbit))
    return tuple(sorted(reps))


def _factor_multisets(max_deriv: int, max_degree: int, rank_bound: int):
    for p in range(1, max_degree + 1):
        for combo in itertools.combinations_with_replacement(range(max_deriv + 1), p):
            if sum(4 + m for m in combo) % 2 == 0:
                yield combo


def generate_invariants(max_deriv: int = 2, max_degree: int = 3, mode: str = "standard") -> list[InvariantSpec]:
    """The standard curated slice, or every canonical matching up to rank 8.

    Exhaustive mode drops matchings that vanish by the Riemann symmetries and
    merges those that agree up to sign; Bianchi identities are not used.
    """
    if mode == "standard":
        return [s for s in STANDARD if s.max_deriv <= max_deriv and s.degree <= max_degree]
    if mode != "exhaustive":
        raise ShapeError(f"unknown enumeration mode {mode!r}")
    if 4 * max_degree > EXHAUSTIVE_RANK_BOUND and max_degree > 0:
        # the smallest product of max_degree factors already exceeds the bound
        raise RankBoundError(f"exhaustive mode supports total rank <= {EXHAUSTIVE_RANK_BOUND}; degree {max_degree} needs rank {4 * max_degree}")
    out = []
    for combo in _factor_multisets(max_deriv, max_degree, EXHAUSTIVE_RANK_BOUND):
        if sum(4 + m for m in combo) > EXHAUSTIVE_RANK_BOUND:
            continue
        for i, mt in enumerate(_canonical_classes(combo)):
            out.append(InvariantSpec(combo, mt, f"E{''.join(map(str, combo))}#{i}"))
    return out


# ---------------------------------------------------------------------------
# evaluation


def contract_factors(factors: list, pairs, ginv: np.ndarray, n: int) -> np.ndarray:
    """Full contraction of covariant jet tensors over ``pairs`` of global slots.

    Returns a jet (shape ``(M,)``).  For each pair the later slot is raised
    with ``ginv``; internal pairs are traced, the rest is folded in factor by
    factor with :func:`jtensordot`.
    """
    owner, local = [], []
    for f, T in enumerate(factors):
        for i in range(T.ndim - 1):
            owner.append(f)
            local.append(i)
    partner = {}
    for a, b in pairs:
        partner[a] = b
        partner[b] = a
    # raise the second slot of each pair
    arrs = list(factors)
    for a, b in pairs:
        hi = max(a, b)
        f, i = owner[hi], local[hi]
        T = arrs[f]
        d = jtensordot(ginv, T, ([1], [i]), n)
        perm = list(range(1, i + 1)) + [0] + list(range(i + 1, T.ndim))
        arrs[f] = np.transpose(d, perm)
    labels = [[g for g in range(len(owner)) if owner[g] == f] for f in range(len(factors))]
    # internal traces
    for f in range(len(arrs)):
        T, lab = arrs[f], labels[f]
        while True:
            hit = next(((x, y) for x in range(len(lab)) for y in range(x + 1, len(lab)) if partner[lab[x]] == lab[y]), None)
            if hit is None:
                break
            x, y = hit
            T = np.trace(T, axis1=x, axis2=y)
            lab = [l for k, l in enumerate(lab) if k not in (x, y)]
        arrs[f], labels[f] = T, lab
    cur, lab = arrs[0], labels[0]
    for f in range(1, len(arrs)):
        T, tl = arrs[f], labels[f]
        ax_a = [k for k, l in enumerate(lab) if partner[l] in tl]
        ax_b = [tl.index(partner[lab[k]]) for k in ax_a]
        cur = jtensordot(cur, T, (ax_a, ax_b), n)
        lab = [l for k, l in enumerate(lab) if k not in ax_a] + [l for k, l in enumerate(tl) if k not in ax_b]
        # traces that close up between already merged factors
        while True:
            hit = next(((x, y) for x in range(len(lab)) for y in range(x + 1, len(lab)) if partner[lab[x]] == lab[y]), None)
            if hit is None:
                break
            x, y = hit
            cur = np.trace(cur, axis1=x, axis2=y)
            lab = [l for k, l in enumerate(lab) if k not in (x, y)]
    if lab:
        raise ShapeError("contraction left free slots")
    return cur


def _order_for(invariants, extra: int = 0) -> int:
    return max((s.max_deriv for s in invariants), default=0) + 2 + extra


def invariant_jets(invariants, geo: Geometry, order: int = 0) -> list[np.ndarray]:
    """Each invariant as a jet of the given order at ``geo.point``."""
    n = geo.n
    ginv = J.truncate(geo.inverse().data, n, order)
    cache = {}
    out = []
    for s in invariants:
        facs = []
        for m in s.factors:
            if m not in cache:
                cache[m] = J.truncate(geo.nabla_riemann(m).data, n, order)
            facs.append(cache[m])
        out.append(contract_factors(facs, s.pairs, ginv, n))
    return out


def evaluate_invariant(spec: InvariantSpec, g: MetricSpec, p, mode: str = J.RATIONAL):
    geo = Geometry(g, p, _order_for([spec]), mode)
    return invariant_jets([spec], geo)[0][0]


def evaluate_invariants(invariants, g: MetricSpec, p, mode: str = J.RATIONAL) -> list:
    geo = Geometry(g, p, _order_for(invariants), mode)
    return [j[0] for j in invariant_jets(invariants, geo)]


@dataclass
class SpiReport:
    """Invariant values per point and the VSI / CSI verdict on the sample."""

    invariants: list
    points: list
    mode: str
    tolerance: float
    values: list = field(default_factory=list)  # values[i][p]
    slice: tuple | None = None

    def zero(self, i: int) -> bool:
        return all(passes(v, self.mode, self.tolerance) for v in self.values[i])

    def constant(self, i: int) -> bool:
        vals = self.values[i]
        if not vals:
            return True
        if self.mode == J.RATIONAL and all(not isinstance(v, float) for v in vals):
            return all(v == vals[0] for v in vals)
        fv = [float(v) for v in vals]
        return max(fv) - min(fv) <= self.tolerance * max(1.0, max(abs(x) for x in fv))

    @property
    def vsi(self) -> bool:
        return all(self.zero(i) for i in range(len(self.invariants)))

    @property
    def csi(self) -> bool:
        return all(self.constant(i) for i in range(len(self.invariants)))

    @property
    def verdict(self) -> str:
        if self.vsi:
            return "VSI"
        if self.csi:
            return "CSI"
        return "neither"

    def value(self, name: str, p: int):
        for i, s in enumerate(self.invariants):
            if s.label() == name:
                return self.values[i][p]
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "slice": list(self.slice) if self.slice else None,
            "mode": self.mode,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "points": [list(p) for p in self.points],
            "invariants": {s.label(): list(self.values[i]) for i, s in enumerate(self.invariants)},
        }


def spi_report(g: MetricSpec, points, invariants=None, mode: str = J.RATIONAL, tolerance: float = DEFAULT_TOLERANCE, slice: tuple = (2, 3)) -> SpiReport:
    if invariants is None:
        invariants = generate_invariants(*slice)
    pts = [tuple(J.to_scalar(x, mode) for x in p) for p in points]
    rep = SpiReport(list(invariants), pts, mode, tolerance, [[] for _ in invariants], tuple(slice))
    for p in pts:
        for i, v in enumerate(evaluate_invariants(invariants, g, p, mode)):
            rep.values[i].append(v)
    return rep


def directional_spi_derivative(g: MetricSpec, X: VectorFieldSpec, invariants, p, mode: str = J.RATIONAL) -> list:
    """``X(I)`` at ``p`` for each invariant, from its first-order jet."""
    geo = Geometry(g, p, _order_for(invariants, 1), mode)
    n = geo.n
    Xv = X.jets(geo.point, 0, mode)[:, 0]
    out = []
    for jt in invariant_jets(invariants, geo, 1):
        # first-order coefficients are the partial derivatives
        out.append(sum(Xv[a] * jt[1 + a] for a in range(n)))
    return out
