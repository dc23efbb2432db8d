from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
import randmetrics as RM
from kundtkit import catalog
from kundtkit import expr as E
from kundtkit import jet as J
from kundtkit.deform import (
    DeformationSpec,
    def_theorem_check,
    deform_metric,
    deformation_exprs,
    flow_pullback_check,
    integrate_flow,
    ricci_scalar_variation,
    riemann_variation,
    spi_changes,
)
from kundtkit.errors import PreconditionError
from kundtkit.geometry import VectorFieldSpec

C = RM.COORDS


@settings(max_examples=4)
@given(st.integers(0, 10**6))
def test_variations_match_oracle_differences(seed):
    rng = np.random.default_rng(seed)
    g = RM.kundt_metric(rng)
    p = RM.point(rng)
    h = RM.symmetric_perturbation(rng, p)
    dR, dRm = O.t_derivative(lambda t: O.from_fractions(RM.oracle_metric(g, h, t)), p, Fraction(1, 10**6))
    assert math.isclose(ricci_scalar_variation(g, h, p), float(dR), rel_tol=1e-7, abs_tol=1e-9)
    rm = riemann_variation(g, h, p).values.astype(float)
    want = np.array(dRm, dtype=float)
    assert np.max(np.abs(rm - want)) <= 1e-7 * max(1.0, np.max(np.abs(want)))


def test_deformed_metric_is_g_plus_th():
    doc = catalog.get("vsi")
    spec = doc.deformations["generic"]
    t = Fraction(1, 3)
    gt = deform_metric(doc.metric, spec, t)
    h = deformation_exprs(spec, C)
    for p in doc.points():
        for a in range(4):
            for b in range(4):
                want = E.evaluate(doc.metric.components[a][b], p) + t * E.evaluate(h[a, b], p)
                assert E.evaluate(gt.components[a][b], p) == want
    assert gt.kundt.degenerate is not None


def test_theorem_on_catalog_and_controls():
    doc = catalog.get("nonconstant-h2")
    pts = doc.points(J.FLOAT)
    rep = def_theorem_check(doc.metric, doc.deformations["generic"], None, pts, None, J.FLOAT)
    assert rep.verdict and rep.agreement
    v2 = def_theorem_check(doc.metric, doc.deformations["v2_control"], None, pts, None, J.FLOAT)
    assert not v2.verdict and all(v == [False] * len(pts) for v in v2.witnesses.values())
    gt = def_theorem_check(doc.metric, doc.deformations["dx1dx1_control"], None, pts, None, J.FLOAT)
    assert not gt.verdict
    assert "h type III" in gt.failing_clauses()
    assert max(spi_changes(gt).values()) > 1e-3
    assert not doc.deformations["dx1dx1_control"].is_type_iii


def test_v_dependent_deformation_is_flagged():
    spec = DeformationSpec.build("v*x1", "0", ["0", "0"], C)
    res = spec.v_residuals(C, [(0, 1, 1, 1)])
    assert res["P1"] == 1 and res["P0"] == 0


def test_flow_integration_of_a_rotation():
    X = VectorFieldSpec.from_components([E.parse(s, C) for s in ("0", "0", "-x2", "x1")])
    x, Jm = integrate_flow(X, (0, 0, 1, 0), 0.7)
    assert np.allclose(x, [0, 0, math.cos(0.7), math.sin(0.7)], atol=1e-9)
    rot = np.array([[math.cos(0.7), -math.sin(0.7)], [math.sin(0.7), math.cos(0.7)]])
    assert np.allclose(Jm[2:, 2:], rot, atol=1e-9)


def test_flow_check():
    doc = catalog.get("vsi")
    rep = flow_pullback_check(doc.metric, doc.vector_fields["B"], 0.1, points=doc.sample_points[:2])
    assert rep.verdict
    with pytest.raises(PreconditionError):
        X = VectorFieldSpec.from_components([E.parse(s, C) for s in ("x1", "0", "0", "0")])
        flow_pullback_check(doc.metric, X, 0.1, points=doc.sample_points[:2])


def test_zero_deformation_passes_trivially():
    doc = catalog.get("vsi")
    rep = def_theorem_check(doc.metric, DeformationSpec(Q=(E.ZERO, E.ZERO)), None, doc.points()[:1], None, J.RATIONAL, m_max=1)
    assert rep.verdict and all(v == 0 for v in spi_changes(rep).values())
