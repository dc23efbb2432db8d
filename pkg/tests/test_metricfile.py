from __future__ import annotations

import pytest
import yaml
from hypothesis import given
from hypothesis import strategies as st

from kundtkit import catalog
from kundtkit import jet as J
from kundtkit import metricfile as MF
from kundtkit.chart import Chart, Inequality
from kundtkit.errors import InputError, ParseError


@pytest.mark.parametrize("name", catalog.names())
def test_catalog_round_trip(name):
    doc = catalog.get(name)
    text = MF.dumps(doc)
    again = MF.loads(text)
    assert MF.dumps(again) == text
    assert again.coords == doc.coords
    assert again.metric.components == doc.metric.components


def _base():
    return yaml.safe_load(catalog.text("pp-wave"))


@pytest.mark.parametrize(
    "mutate,fragment",
    [
        (lambda d: d.pop("metric"), "metric"),
        (lambda d: d.update(colour="red"), "colour"),
        (lambda d: d["metric"]["kundt"].update(H="v*u + y"), "metric.kundt.H"),
        (lambda d: d["vector_fields"]["B"]["normal_form"].update(B="v"), "vector_fields.B"),
        (lambda d: d["settings"].update(mode="complex"), "settings.mode"),
        (lambda d: d["sample_points"].append([0, 0, 0]), "point"),
        (lambda d: d["chart"].update(coordinates=["u", "u", "x1", "x2"]), "duplicate"),
        (lambda d: d["metric"]["kundt"].update(H="sin(x1)"), "transcendental"),
    ],
)
def test_input_errors_name_the_location(mutate, fragment):
    d = _base()
    mutate(d)
    with pytest.raises((InputError, ParseError)) as exc:
        MF.from_dict(d)
    assert fragment in str(exc.value)


def test_degenerate_parts_must_not_depend_on_v():
    d = yaml.safe_load(catalog.text("vsi"))
    d["metric"]["kundt"]["degenerate"]["H1"] = "v"
    with pytest.raises(InputError, match="degenerate.H1"):
        MF.from_dict(d)


def test_chart_validity():
    ch = Chart.build(("u", "v", "x1", "x2"), ["x1 > 0", "x2 != 1"])
    assert ch.check((0, 0, 1, 0)) == (0, 0, 1, 0)
    with pytest.raises(InputError, match="x1 > 0"):
        ch.check((0, 0, 0, 0))
    with pytest.raises(InputError, match="x2 != 1"):
        ch.check((0, 0, 1, 1))
    with pytest.raises(InputError):
        Inequality.parse("x1 ~ 0", ch.coords)


@given(st.fractions(min_value=-10, max_value=10, max_denominator=50))
def test_inequalities_are_exact(q):
    ch = Chart.build(("u", "v", "x1", "x2"), [f"x1 >= {q}"])
    assert ch.validity[0].holds((0, 0, J.to_rational(q), 0))
    assert not ch.validity[0].holds((0, 0, J.to_rational(q) - J.mpq(1, 10**9), 0))
