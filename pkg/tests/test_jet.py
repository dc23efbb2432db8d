from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kundtkit import jet as J
from kundtkit import _kernels
from kundtkit.errors import EvaluationError, JetOrderError, ModeError

small = st.integers(-5, 5)


def poly_jet(coeffs: dict, nvars: int, order: int, mode=J.RATIONAL):
    """Jet at the origin of the polynomial ``sum c * x^alpha``."""
    b = J.basis(nvars, order)
    out = J.zeros((b.size,), mode)
    for alpha, c in coeffs.items():
        if sum(alpha) <= order:
            out[b.index[alpha]] = J.to_scalar(c, mode)
    return out


def brute_product(p: dict, q: dict, order: int) -> dict:
    out: dict = {}
    for (a, x), (b, y) in itertools.product(p.items(), q.items()):
        m = tuple(i + j for i, j in zip(a, b))
        if sum(m) <= order:
            out[m] = out.get(m, 0) + x * y
    return out


def polys(nvars: int, deg: int):
    monos = [m for m in itertools.product(range(deg + 1), repeat=nvars) if sum(m) <= deg]
    return st.dictionaries(st.sampled_from(monos), small, max_size=6)


@given(polys(2, 3), polys(2, 3))
def test_product_matches_polynomial_multiplication(p, q):
    order = 4
    got = J.mul(poly_jet(p, 2, order), poly_jet(q, 2, order), 2)
    assert np.array_equal(got, poly_jet(brute_product(p, q, order), 2, order))


@given(polys(3, 2), polys(3, 2))
def test_float_and_rational_products_agree(p, q):
    a = J.mul(poly_jet(p, 3, 3), poly_jet(q, 3, 3), 3)
    b = J.mul(poly_jet(p, 3, 3, J.FLOAT), poly_jet(q, 3, 3, J.FLOAT), 3)
    assert np.allclose(a.astype(float), b)


@given(polys(2, 3), st.integers(1, 5))
def test_reciprocal_inverts(p, c0):
    p = dict(p)
    p[(0, 0)] = c0
    a = poly_jet(p, 2, 4)
    one = J.mul(a, J.reciprocal(a, 2), 2)
    assert one[0] == 1 and all(x == 0 for x in one[1:])


@given(polys(2, 3))
def test_derivative_matches_power_rule(p):
    order = 3
    got = J.diff(poly_jet(p, 2, order), 0, 2)
    want = {}
    for (i, j), c in p.items():
        if i > 0:
            want[(i - 1, j)] = want.get((i - 1, j), 0) + i * c
    assert np.array_equal(got, poly_jet(want, 2, order - 1))


def test_partial_derivative_of_monomial():
    # f = x^2 y at (1, 2): d_x^2 d_y f = 2
    pt = (Fraction(1), Fraction(2))
    x = J.Jet.variable(0, pt, 3, J.RATIONAL)
    y = J.Jet.variable(1, pt, 3, J.RATIONAL)
    f = x * x * y
    assert f.value == 2
    assert f.partial((1, 0)) == 4
    assert f.partial((2, 1)) == 2
    with pytest.raises(JetOrderError):
        f.coefficient((2, 2))


def test_sqrt_exact_and_irrational():
    pt = (Fraction(0),)
    x = J.Jet.variable(0, pt, 4, J.RATIONAL)
    a = (x + 4) * (x + 4)
    r = J.sqrt(a.coeffs, 1)
    assert np.array_equal(r, (x + 4).coeffs)
    with pytest.raises(ModeError):
        J.sqrt((x + 2).coeffs, 1)
    rf = J.sqrt((J.Jet.variable(0, (0.0,), 4, J.FLOAT) + 2.0).coeffs, 1)
    assert np.isclose(rf[0], np.sqrt(2)) and np.isclose(rf[1], 0.5 / np.sqrt(2))


def test_errors():
    x = J.Jet.variable(0, (Fraction(0),), 2, J.RATIONAL)
    with pytest.raises(EvaluationError):
        J.reciprocal(x.coeffs, 1)
    with pytest.raises(ModeError):
        x + 0.5
    with pytest.raises(ModeError):
        J.exp(x.coeffs, 1)


@pytest.mark.parametrize("nvars,order", [(2, 3), (4, 3), (4, 5)])
def test_numba_and_numpy_kernels_agree(nvars, order):
    rng = np.random.default_rng(nvars * 10 + order)
    b = J.basis(nvars, order)
    A = rng.normal(size=(7, b.size))
    B = rng.normal(size=(7, b.size))
    fast = _kernels.jmul_flat(A, B, b, use_numba=True)
    slow = _kernels.jmul_flat(A, B, b, use_numba=False)
    assert np.allclose(fast, slow, rtol=1e-13, atol=1e-13)
    M1 = rng.normal(size=(2, 3, 4, b.size))
    M2 = rng.normal(size=(2, 4, 3, b.size))
    assert np.allclose(_kernels.jdot_flat(M1, M2, b, True), _kernels.jdot_flat(M1, M2, b, False), rtol=1e-13, atol=1e-13)
