from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from kundtkit import catalog
from kundtkit import expr as E
from kundtkit import jet as J
from kundtkit.errors import ModeError, PreconditionError
from kundtkit.frame import build_kundt_frame, complete_null_frame, degenerate_frame_check
from kundtkit.geometry import Geometry, KundtForm, MetricSpec

C = ("u", "v", "x1", "x2")


def P(s):
    return E.parse(s, C)


@pytest.mark.parametrize("name", ["minkowski", "pp-wave", "vsi", "nonconstant-h2"])
def test_kundt_frame_is_null_and_exact(name):
    doc = catalog.get(name)
    for p in doc.points():
        geo = Geometry(doc.metric, p, 1, J.RATIONAL)
        fr = build_kundt_frame(geo)
        assert fr.normalized
        res = fr.null_residuals(geo.metric_tensor().values)
        assert all(v == 0 for v in res.values()), res


def test_unnormalized_screen_vectors_in_rational_mode():
    gt = ((P("2"), P("0")), (P("0"), P("3")))
    g = MetricSpec.from_kundt(C, KundtForm(P("x1"), (P("0"), P("0")), gt))
    geo = Geometry(g, (0, 0, 1, 1), 1, J.RATIONAL)
    fr = build_kundt_frame(geo)
    assert not fr.normalized
    assert all(v == 0 for v in fr.null_residuals(geo.metric_tensor().values).values())
    with pytest.raises(ModeError):
        build_kundt_frame(geo, strict=True)
    fl = build_kundt_frame(Geometry(g, (0, 0, 1, 1), 1, J.FLOAT))
    assert fl.normalized
    assert np.allclose(fl.m[0] * np.sqrt(2), [0, 0, 1, 0])


def test_complete_null_frame_on_schwarzschild_ef():
    doc = catalog.get("schwarzschild-ef")
    for p in doc.points(J.FLOAT):
        geo = Geometry(doc.metric, p, 1, J.FLOAT)
        k = np.zeros((4, J.jet_size(4, 1)))
        k[1, 0] = 1.0  # d_r is null: g_rr = 0
        fr = complete_null_frame(geo, k)
        res = fr.null_residuals(geo.metric_tensor().values)
        assert max(res.values()) < 1e-12
    with pytest.raises(PreconditionError):
        k = np.zeros((4, J.jet_size(4, 1)))
        k[2, 0] = 1.0
        complete_null_frame(Geometry(doc.metric, doc.points(J.FLOAT)[0], 1, J.FLOAT), k)


def test_degenerate_frame_conditions():
    doc = catalog.get("vsi")
    rep = degenerate_frame_check(None, doc.metric, doc.points()[:2], J.RATIONAL)
    assert rep.verdict and rep.agreement
    kf = doc.metric.kundt
    bad = MetricSpec.from_kundt(C, KundtForm(E.add(kf.H, P("v^3")), kf.W, kf.gt))
    rep = degenerate_frame_check(None, bad, doc.points()[:2], J.RATIONAL)
    assert not rep.verdict and rep.agreement


def test_kundt_frame_needs_kundt_form():
    doc = catalog.get("schwarzschild")
    with pytest.raises(PreconditionError):
        build_kundt_frame(Geometry(doc.metric, doc.points(J.FLOAT)[0], 1, J.FLOAT))


def test_exact_rational_points_stay_exact():
    doc = catalog.get("vsi")
    fr = build_kundt_frame(Geometry(doc.metric, (Fraction(1, 3), 2, 3, Fraction(-1, 2)), 0, J.RATIONAL))
    assert fr.matrix.dtype == object
