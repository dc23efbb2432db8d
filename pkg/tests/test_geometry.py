from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
import randmetrics as RM
from kundtkit import catalog
from kundtkit import jet as J
from kundtkit.errors import JetOrderError
from kundtkit.geometry import Geometry, VectorFieldSpec
from kundtkit import expr as E


@settings(max_examples=8)
@given(st.integers(0, 10**6))
def test_riemann_ricci_scalar_match_finite_difference_oracle(seed):
    rng = np.random.default_rng(seed)
    g = RM.kundt_metric(rng)
    p = RM.point(rng)
    geo = Geometry(g, p, 2, J.RATIONAL)
    orc = O.curvature(O.from_fractions(RM.oracle_metric(g)), p)
    rm = geo.riemann().values.astype(float)
    want = np.array(orc.riemann, dtype=float)
    assert np.allclose(rm, want, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(want).max()))
    assert np.isclose(float(geo.ricci_scalar()[0]), float(orc.scalar), rtol=1e-12, atol=1e-12)


@settings(max_examples=10)
@given(st.integers(0, 10**6))
def test_riemann_symmetries_exact(seed):
    rng = np.random.default_rng(seed)
    geo = Geometry(RM.kundt_metric(rng), RM.point(rng), 2, J.RATIONAL)
    R = geo.riemann().values
    assert np.array_equal(R, -R.transpose(1, 0, 2, 3))
    assert np.array_equal(R, -R.transpose(0, 1, 3, 2))
    assert np.array_equal(R, R.transpose(2, 3, 0, 1))
    first_bianchi = R + R.transpose(0, 2, 3, 1) + R.transpose(0, 3, 1, 2)
    assert all(x == 0 for x in first_bianchi.reshape(-1))


def test_metric_is_parallel_and_christoffel_symmetric():
    doc = catalog.get("vsi")
    geo = Geometry(doc.metric, doc.points()[1], 2, J.RATIONAL)
    assert geo.cov_derivative(geo.metric_tensor()).is_zero()
    G = geo.christoffel().values
    assert np.array_equal(G, G.transpose(0, 2, 1))


def test_flat_space_and_killing_fields():
    doc = catalog.get("minkowski")
    for p in doc.points():
        geo = Geometry(doc.metric, p, 2, J.RATIONAL)
        assert geo.riemann().is_zero()
        for name in ("boost", "null_rotation", "rotation", "du"):
            X = geo.vector(doc.vector_fields[name], 2)
            assert geo.lie_derivative(X, geo.metric_tensor()).is_zero(), name


def test_normal_form_vector_components():
    C = ("u", "v", "x1", "x2")
    X = VectorFieldSpec.normal_form(E.parse("u^2", C), E.parse("x1", C), (E.parse("0", C), E.parse("1", C)))
    vals = X.jets((Fraction(3), Fraction(2), Fraction(5), Fraction(0)), 0, J.RATIONAL)[:, 0]
    # A d_u + (B - v A') d_v + C^i d_i with A' = 2u = 6, v = 2
    assert list(vals) == [9, 5 - 12, 0, 1]


def test_jet_order_is_enforced():
    doc = catalog.get("pp-wave")
    geo = Geometry(doc.metric, doc.points()[0], 0, J.RATIONAL)
    with pytest.raises(JetOrderError):
        geo.nabla_riemann(1)


def test_schwarzschild_is_vacuum():
    doc = catalog.get("schwarzschild")
    for p in doc.points(J.FLOAT):
        geo = Geometry(doc.metric, p, 2, J.FLOAT)
        assert np.allclose(geo.ricci().values, 0, atol=1e-12)
