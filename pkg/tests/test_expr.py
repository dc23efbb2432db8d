from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from kundtkit import expr as E
from kundtkit import jet as J
from kundtkit.errors import EvaluationError, ParseError, UnknownIdentifierError

CHART = ("u", "v", "x")


def trees():
    leaves = st.one_of(st.sampled_from(CHART), st.integers(0, 9).map(str), st.sampled_from(["1/2", "0.25"]))

    def extend(children):
        return st.one_of(
            st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
            st.tuples(children, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}"),
            children.map(lambda c: f"-({c})"),
            children.map(lambda c: f"cos({c})"),
        )

    return st.recursive(leaves, extend, max_leaves=8)


@given(trees())
def test_print_parse_round_trip(text):
    e = E.parse(text, CHART)
    printed = E.to_text(e)
    again = E.parse(printed, CHART)
    assert E.to_text(again) == printed
    for p in [(0, 1, 2), (Fraction(1, 3), -1, Fraction(5, 2))]:
        if E.is_rational(e):
            assert E.evaluate(again, p) == E.evaluate(e, p)
        else:
            assert math.isclose(E.evaluate(again, p, J.FLOAT), E.evaluate(e, p, J.FLOAT), rel_tol=1e-12, abs_tol=1e-12)


@given(trees(), st.tuples(*[st.integers(-3, 3)] * 3))
def test_first_derivatives_match_central_differences(text, p):
    e = E.parse(text, CHART)
    p = tuple(float(x) / 2 for x in p)
    jet = E.eval_jet(e, p, 1, J.FLOAT)
    for a in range(3):
        h = 1e-6
        up = list(p)
        dn = list(p)
        up[a] += h
        dn[a] -= h
        fd = (E.evaluate(e, tuple(up), J.FLOAT) - E.evaluate(e, tuple(dn), J.FLOAT)) / (2 * h)
        assert math.isclose(jet.coeffs[1 + a], fd, rel_tol=1e-5, abs_tol=1e-4)


def test_precedence_and_exact_decimals():
    e = E.parse("-x^2 + 0.1", CHART)
    assert E.evaluate(e, (0, 0, 3)) == J.to_rational(Fraction(-89, 10))
    assert E.evaluate(E.parse("2^-1 * x", CHART), (0, 0, 4)) == 2


def test_rational_mode_is_exact():
    e = E.parse("1/(3*x) + x^3", CHART)
    j = E.eval_jet(e, (0, 0, Fraction(1, 2)), 2)
    # f' = -1/(3x^2) + 3x^2, f''/2 = 1/(3x^3) + 3x
    assert j.coeffs[3] == J.to_rational(Fraction(-4, 3) + Fraction(3, 4))
    assert j.partial((0, 0, 2)) == 2 * (J.to_rational(Fraction(8, 3)) + J.to_rational(Fraction(3, 2)))


def test_errors_point_at_the_problem():
    with pytest.raises(UnknownIdentifierError) as exc:
        E.parse("u + y", CHART)
    assert exc.value.position == 4
    with pytest.raises(ParseError):
        E.parse("u + * v", CHART)
    with pytest.raises(ParseError):
        E.parse("u v", CHART)
    with pytest.raises(EvaluationError) as err:
        E.evaluate(E.parse("1/(x - 1)", CHART), (0, 0, 1))
    assert "x - 1" in str(err.value)


def test_rationality():
    assert E.is_rational(E.parse("u/(1 + x^2)", CHART))
    assert not E.is_rational(E.parse("sin(x)", CHART))
    assert E.variables(E.parse("u*x + 3", CHART)) == {"u", "x"}
