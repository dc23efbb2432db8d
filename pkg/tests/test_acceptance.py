"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines are also
printed at the end of the session.  ``python tests/test_acceptance.py`` runs
the same checks without pytest.
"""

from __future__ import annotations

import functools
import itertools
import math
import random
import time
from fractions import Fraction

import numpy as np

import oracles as O
import randmetrics as RM
from kundtkit import catalog
from kundtkit import expr as E
from kundtkit import jet as J
from kundtkit.classify import (
    algebraic_stability_check,
    degenerate_kundt_check,
    du_du,
    lie_algebra_closure_check,
    metric_from_frame,
    nil_killing_check,
    _pairings,
    _random_type_ii,
)
from kundtkit.deform import def_theorem_check, flow_pullback_check, ricci_scalar_variation, riemann_variation, spi_changes
from kundtkit.frame import constant_frame
from kundtkit.geometry import KundtForm, MetricSpec, VectorFieldSpec
from kundtkit.spi import directional_spi_derivative, evaluate_invariants, generate_invariants, spi_report
from kundtkit.tensor import TensorValue, block_contraction, from_frame_components, full_contraction, matrix_inverse

RESULTS: dict[int, str] = {}


def criterion(number: int, title: str):
    def deco(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                detail = fn(*args, **kwargs) or ""
            except BaseException as exc:
                line = f"criterion {number:2d} FAIL  {title}: {type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}"
                RESULTS[number] = line
                print(line)
                raise
            line = f"criterion {number:2d} PASS  {title} ({detail}; {time.perf_counter() - t0:.1f}s)"
            RESULTS[number] = line
            print(line)

        return run

    return deco


def _vsi():
    return catalog.get("vsi")


def _nh2():
    return catalog.get("nonconstant-h2")


# ---------------------------------------------------------------------------


@criterion(1, "VSI metric: every invariant of the m<=2, p<=3 slice is exactly 0")
def test_vsi_reproduction():
    doc = _vsi()
    pts = doc.points(J.RATIONAL)
    assert len(pts) == 5 and all(p[2] in (1, 2, 3) for p in pts)
    rep = spi_report(doc.metric, pts, generate_invariants(2, 3), J.RATIONAL)
    nonzero = [(s.label(), p, rep.values[i][j]) for i, s in enumerate(rep.invariants) for j, p in enumerate(pts) if rep.values[i][j] != 0]
    assert not nonzero, nonzero
    assert rep.verdict == "VSI"
    return f"{len(rep.invariants)} invariants x {len(pts)} points, all exactly 0"


@criterion(2, "degenerate Kundt: Lie-derivative and coordinate criteria agree; H += v^3 flips both")
def test_degenerate_kundt_classification():
    doc = _vsi()
    pts = doc.points(J.RATIONAL)
    rep = degenerate_kundt_check(doc.metric, None, pts, J.RATIONAL)
    assert rep.verdict
    assert rep.witnesses["Lie derivative"] == [True] * len(pts)
    assert rep.witnesses["coordinate"] == [True] * len(pts)
    kf = doc.metric.kundt
    planted = MetricSpec.from_kundt(doc.coords, KundtForm(E.add(kf.H, E.parse("v^3", doc.coords)), kf.W, kf.gt), "vsi+v^3")
    bad = degenerate_kundt_check(planted, None, pts, J.RATIONAL)
    assert not bad.verdict
    assert bad.witnesses["Lie derivative"] == [False] * len(pts)
    assert bad.witnesses["coordinate"] == [False] * len(pts)
    assert bad.agreement
    return "both witnesses true on vsi, both false with v^3 at all 5 points"


@criterion(3, "deformations: spi constant in t for 10 random specs; both controls change spi")
def test_deformation_theorem():
    rng = np.random.default_rng(3)
    vsi, nh2 = _vsi(), _nh2()
    exact_pts = vsi.points(J.RATIONAL)[:2]
    for i in range(10):
        spec = RM.deformation(rng, f"random{i}")
        rep = def_theorem_check(vsi.metric, spec, None, exact_pts, None, J.RATIONAL)
        changes = spi_changes(rep)
        assert all(v == 0 for v in changes.values()), (i, changes)
        assert rep.verdict, (i, rep.failing_clauses())
    float_pts = nh2.points(J.FLOAT)
    worst = 0.0
    for i in range(10):
        spec = RM.deformation(rng, f"random{i}")
        rep = def_theorem_check(nh2.metric, spec, None, float_pts, None, J.FLOAT)
        worst = max(worst, max(spi_changes(rep).values()))
        assert rep.verdict, (i, rep.failing_clauses())
    assert worst <= 1e-9, worst
    detected = {}
    for name in ("v2_control", "dx1dx1_control"):
        rep = def_theorem_check(nh2.metric, nh2.deformations[name], None, float_pts, None, J.FLOAT)
        detected[name] = max(spi_changes(rep).values())
        assert detected[name] >= 1e-3, (name, detected[name])
    return f"vsi exact, nonconstant-h2 max relative change {worst:.1e}; controls change by {detected['v2_control']:.3g} and {detected['dx1dx1_control']:.3g}"


@criterion(4, "evolution equations for R and Riemann match central differences (dt=1e-4) to 1e-5")
def test_evolution_equations():
    rng = np.random.default_rng(0)
    dt = Fraction(1, 10**4)
    worst = 0.0
    for _ in range(20):
        g = RM.kundt_metric(rng)
        p = RM.point(rng)
        h = RM.symmetric_perturbation(rng, p)
        dR, dRm = O.t_derivative(lambda t: O.from_fractions(RM.oracle_metric(g, h, t)), p, dt)
        dR = float(dR)
        dRm = np.array(dRm, dtype=float)
        r_err = abs(ricci_scalar_variation(g, h, p) - dR) / abs(dR)
        rm = riemann_variation(g, h, p).values.astype(float)
        rm_err = float(np.max(np.abs(rm - dRm)) / np.max(np.abs(dRm)))
        assert r_err <= 1e-5, (p, r_err)
        assert rm_err <= 1e-5, (p, rm_err)
        worst = max(worst, r_err, rm_err)
    return f"20 triples, worst relative error {worst:.1e}"


@criterion(5, "algebraic stability: side i, side ii and the component criterion agree (g, du du, Riemann)")
def test_algebraic_stability():
    doc = _vsi()
    pts = doc.points(J.RATIONAL)
    cases = (("g", 0), (du_du(4), -2), ("Rm", 0))
    for T, s in cases:
        rep = algebraic_stability_check(T, doc.metric, None, s, 2, pts, J.RATIONAL, j_max=3)
        assert rep.agreement, (T, rep.witnesses)
        assert rep.verdict, (T, rep.failing_clauses())
    return "3 tensors x 5 points, m<=2, j<=3, all witnesses true"


@criterion(6, "trace identity: contraction of the weight-0 block equals the full contraction")
def test_trace_identity():
    rng = np.random.default_rng(6)
    checked = 0
    for _ in range(50):
        while True:
            M = rng.integers(-3, 4, size=(4, 4))
            if round(np.linalg.det(M)) != 0:
                break
        frame = constant_frame((0, 0, 0, 0), M.tolist(), J.RATIONAL)
        ginv = TensorValue(matrix_inverse(metric_from_frame(frame))[..., None], "uu", 4)
        rank = int(rng.choice([2, 4]))
        comp = _random_type_ii(rng, rank, 4, J.RATIONAL)
        T = TensorValue(from_frame_components(comp, frame)[..., None], "d" * rank, 4)
        for pairs in _pairings(rank):
            assert full_contraction(T, pairs, ginv) == block_contraction(T, frame, pairs, ginv)
            checked += 1
    return f"50 tensors, {checked} contractions, exact"


GOOD_FIELDS = (
    ("0", "x1", "0", "0"),
    ("0", "x2^2", "0", "0"),
    ("1", "0", "0", "0"),
    ("1", "x1*u", "0", "1"),
    ("0", "u^3 + x1*x2", "0", "u"),
    ("u", "0", "0", "0"),
    ("u", "x2", "0", "1"),
    ("0", "x1^2 - x2^2", "0", "u^2"),
    ("1", "u*x1*x2", "0", "2"),
    ("u", "1", "0", "3*u"),
)

PLANTED = (
    ("A_x", ("x1", "0", "0", "0")),
    ("A_x", ("x2", "0", "0", "0")),
    ("A_x", ("u*x1", "-v*x1", "0", "0")),
    ("A_x", ("1 + x2^2", "0", "0", "0")),
    ("B_v+A_u", ("0", "v", "0", "0")),
    ("B_v+A_u", ("1", "2*v", "0", "0")),
    ("B_v+A_u", ("u", "0", "0", "0")),
    ("Ceq", ("0", "0", "x1", "0")),
    ("Ceq", ("0", "0", "x2", "x1")),
    ("Ceq", ("0", "0", "0", "x2^2")),
)


def _normal_form(doc, a, b, c1, c2):
    P = lambda s: E.parse(s, doc.coords)  # noqa: E731
    return VectorFieldSpec.normal_form(P(a), P(b), (P(c1), P(c2)))


@criterion(7, "nil-Killing normal form: 10 fields pass; 10 planted violations fail in the planted clause")
def test_nil_killing_normal_form():
    doc = _vsi()
    pts = doc.points(J.RATIONAL)
    for f in GOOD_FIELDS:
        rep = nil_killing_check(_normal_form(doc, *f), doc.metric, None, pts, True, J.RATIONAL)
        assert rep.verdict, (f, rep.failing_clauses())
    for clause, comps in PLANTED:
        X = VectorFieldSpec.from_components([E.parse(s, doc.coords) for s in comps])
        rep = nil_killing_check(X, doc.metric, None, pts, True, J.RATIONAL)
        assert not rep.verdict, comps
        assert clause in rep.failing_clauses(), (clause, comps, rep.failing_clauses())
        assert any(r[clause] != 0 for r in rep.residuals), (clause, comps)
    return "10 pass, 10 fail in the planted clause"


@criterion(8, "closure: [X,Y] of passing fields passes the same membership checks (g and h variants)")
def test_lie_algebra_closure():
    doc = _vsi()
    pts = doc.points(J.RATIONAL)
    fields = [_normal_form(doc, *f) for f in GOOD_FIELDS]
    pairs = random.Random(0).sample(list(itertools.combinations(range(len(fields)), 2)), 5)
    for variant in ("g", "h"):
        for i, j in pairs:
            rep = lie_algebra_closure_check(fields[i], fields[j], ("g",), -1, doc.metric, None, pts, variant, J.RATIONAL)
            assert rep.verdict, (variant, i, j, rep.failing_clauses())
    return f"5 pairs x 2 variants x {len(pts)} points"


@criterion(9, "X(H2) = 0 preserves every invariant; X(H2) != 0 changes one")
def test_spi_preservation_criterion():
    doc = _nh2()
    pts = doc.points(J.RATIONAL)[:3]
    invs = generate_invariants(2, 3)
    H2 = doc.metric.kundt.degenerate.H2
    for name in ("du", "dx2"):
        X = doc.vector_fields[name]
        for p in pts:
            xh2 = sum(X.jets(p, 0, J.RATIONAL)[a, 0] * E.eval_jet(H2, p, 1).coeffs[1 + a] for a in range(4))
            assert xh2 == 0
            vals = directional_spi_derivative(doc.metric, X, invs, p, J.RATIONAL)
            assert max(abs(float(v)) for v in vals) <= 1e-9, (name, p, vals)
    biggest = []
    X = doc.vector_fields["dx1"]
    for p in pts:
        vals = directional_spi_derivative(doc.metric, X, invs, p, J.RATIONAL)
        biggest.append(max(abs(float(v)) for v in vals))
        assert biggest[-1] >= 1e-3, (p, vals)
    return f"d_u, d_x2 exact zeros; d_x1 min over points of max |X(I)| = {min(biggest):.3g}"


@criterion(10, "flow of a nil-Killing field: phi_t*g - g type III at t=1/10; Richardson limit is L_X g")
def test_flow_check():
    doc = _vsi()
    X = doc.vector_fields["B"]
    rep = flow_pullback_check(doc.metric, X, 0.1, points=doc.sample_points, tolerance=1e-8, richardson_tolerance=1e-6)
    assert rep.verdict, rep.failing_clauses()
    off = max(float(r["phi_t*g-g type III"]) for r in rep.residuals)
    rich = max(float(r["Richardson error"]) for r in rep.residuals)
    assert off <= 1e-8 and rich <= 1e-6
    return f"off-type {off:.1e}, Richardson error {rich:.1e}"


@criterion(11, "Schwarzschild Kretschmann = 48/r^6 (finite-difference oracle and jet pipeline)")
def test_schwarzschild_kretschmann():
    doc = catalog.get("schwarzschild")
    kret = next(s for s in generate_invariants(0, 2) if s.label() == "Riem.Riem")
    worst = 0.0
    for r in ("2.5", "3", "4"):
        exact = 48 / float(r) ** 6
        orc = float(O.curvature(O.schwarzschild(1), (0, O.to_decimal(r), 1, 0)).kretschmann)
        ours = float(evaluate_invariants([kret], doc.metric, (0.0, float(r), 1.0, 0.0), J.FLOAT)[0])
        for v in (orc, ours):
            rel = abs(v - exact) / exact
            assert rel <= 1e-9, (r, v, exact)
            worst = max(worst, rel)
    assert math.isfinite(worst)
    return f"r in {{2.5, 3, 4}}, worst relative error {worst:.1e}"


if __name__ == "__main__":
    import sys

    failed = 0
    for fn in (test_vsi_reproduction, test_degenerate_kundt_classification, test_deformation_theorem, test_evolution_equations,
               test_algebraic_stability, test_trace_identity, test_nil_killing_normal_form, test_lie_algebra_closure,
               test_spi_preservation_criterion, test_flow_check, test_schwarzschild_kretschmann):
        try:
            fn()
        except Exception:  # noqa: BLE001
            failed += 1
    sys.exit(1 if failed else 0)
