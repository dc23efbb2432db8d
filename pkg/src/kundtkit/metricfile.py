"""YAML metric-definition documents: parse, validate and serialize.

Layout::

    name: vsi
    description: ...
    chart: {coordinates: [u, v, x1, x2], validity: ["x1 > 0"]}
    metric:
      kundt:                      # or: components: [[...], ...]
        degenerate: {H2: ..., H1: ..., H0: ..., W1: [...], W0: [...]}   # or H and W
        gt: [[1, 0], [0, 1]]
    vector_fields:
      X: {components: [...]}      # or: {normal_form: {A: ..., B: ..., C: [...]}}
    deformations:
      d: {P1: ..., P0: ..., Q: [...], t: [0, 1/2, 1]}   # optional P2, gt
    sample_points: [[0, 1, 2, 0], ...]
    settings: {mode: rational, tolerance: 1e-9, jet_order_cap: 6, invariants: [2, 3]}
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import yaml

from . import expr as E
from . import jet as J
from .chart import Chart
from .deform import DeformationSpec
from .errors import InputError, KundtkitError
from .geometry import DegenerateParts, KundtForm, MetricSpec, VectorFieldSpec
from .report import DEFAULT_TOLERANCE


@dataclass
class Settings:
    mode: str = J.RATIONAL
    tolerance: float = DEFAULT_TOLERANCE
    jet_order_cap: int = 6
    invariants: tuple = (2, 3)


@dataclass
class MetricDocument:
    name: str
    chart: Chart
    metric: MetricSpec
    vector_fields: dict = field(default_factory=dict)
    deformations: dict = field(default_factory=dict)
    sample_points: list = field(default_factory=list)
    settings: Settings = field(default_factory=Settings)
    description: str = ""

    @property
    def coords(self) -> tuple:
        return self.chart.coords

    def points(self, mode: str | None = None) -> list:
        mode = mode or self.settings.mode
        return [self.chart.check(p, mode) for p in self.sample_points]


# ---------------------------------------------------------------------------
# parsing


def _fail(path: str, msg: str):
    raise InputError(f"{path}: {msg}")


def _expr(value, coords, path: str) -> E.Expr:
    if isinstance(value, bool) or value is None:
        _fail(path, f"expected an expression, got {value!r}")
    if isinstance(value, float):
        value = str(Fraction(value).limit_denominator())
    try:
        return E.parse(str(value), coords)
    except KundtkitError as exc:
        _fail(path, str(exc))


def _expr_list(value, coords, path: str, length: int | None = None) -> tuple:
    if not isinstance(value, list):
        _fail(path, "expected a list")
    if length is not None and len(value) != length:
        _fail(path, f"expected {length} entries, got {len(value)}")
    return tuple(_expr(x, coords, f"{path}[{i}]") for i, x in enumerate(value))


def _matrix(value, coords, path: str, size: int) -> tuple:
    if not isinstance(value, list) or len(value) != size:
        _fail(path, f"expected a {size}x{size} table")
    return tuple(_expr_list(r, coords, f"{path}[{i}]", size) for i, r in enumerate(value))


def _rational(value, path: str):
    try:
        return J.to_rational(value if not isinstance(value, float) else str(Fraction(value).limit_denominator()))
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        _fail(path, f"not a rational number: {value!r} ({exc})")


def _section(doc: dict, key: str, kind, required: bool = False, default=None):
    if key not in doc:
        if required:
            _fail(key, "missing section")
        return default
    val = doc[key]
    if not isinstance(val, kind):
        _fail(key, f"expected a {kind.__name__}")
    return val


def _metric(sec: dict, coords: tuple, name: str) -> MetricSpec:
    n = len(coords)
    if ("components" in sec) == ("kundt" in sec):
        _fail("metric", "give exactly one of 'components' or 'kundt'")
    if "components" in sec:
        comps = _matrix(sec["components"], coords, "metric.components", n)
        for a in range(n):
            for b in range(a):
                if comps[a][b] != comps[b][a]:
                    _fail(f"metric.components[{a}][{b}]", "metric table is not symmetric")
        return MetricSpec(coords, comps, None, name)
    kd = sec["kundt"]
    if not isinstance(kd, dict):
        _fail("metric.kundt", "expected a mapping")
    m = n - 2
    gt = _matrix(kd.get("gt", [[1 if i == j else 0 for j in range(m)] for i in range(m)]), coords, "metric.kundt.gt", m)
    if "degenerate" in kd:
        if "H" in kd or "W" in kd:
            _fail("metric.kundt", "give either H and W or degenerate parts, not both")
        d = kd["degenerate"]
        if not isinstance(d, dict):
            _fail("metric.kundt.degenerate", "expected a mapping")
        p = "metric.kundt.degenerate"
        parts = DegenerateParts(
            _expr(d.get("H2", 0), coords, f"{p}.H2"),
            _expr(d.get("H1", 0), coords, f"{p}.H1"),
            _expr(d.get("H0", 0), coords, f"{p}.H0"),
            _expr_list(d.get("W1", [0] * m), coords, f"{p}.W1", m),
            _expr_list(d.get("W0", [0] * m), coords, f"{p}.W0", m),
        )
        v = coords[1]
        for key in ("H2", "H1", "H0"):
            if v in E.variables(getattr(parts, key)):
                _fail(f"{p}.{key}", f"degenerate parts must not depend on {v}")
        for key in ("W1", "W0"):
            for i, w in enumerate(getattr(parts, key)):
                if v in E.variables(w):
                    _fail(f"{p}.{key}[{i}]", f"degenerate parts must not depend on {v}")
        form = KundtForm.from_degenerate(parts, gt, coords)
    else:
        H = _expr(kd.get("H", 0), coords, "metric.kundt.H")
        W = _expr_list(kd.get("W", [0] * m), coords, "metric.kundt.W", m)
        form = KundtForm(H, W, gt)
    return MetricSpec.from_kundt(coords, form, name)


def _vector_field(name: str, sec, coords) -> VectorFieldSpec:
    path = f"vector_fields.{name}"
    if not isinstance(sec, dict) or ("components" in sec) == ("normal_form" in sec):
        _fail(path, "give exactly one of 'components' or 'normal_form'")
    if "components" in sec:
        return VectorFieldSpec(_expr_list(sec["components"], coords, f"{path}.components", len(coords)), name=name)
    nf = sec["normal_form"]
    if not isinstance(nf, dict):
        _fail(f"{path}.normal_form", "expected a mapping")
    A = _expr(nf.get("A", 0), coords, f"{path}.normal_form.A")
    B = _expr(nf.get("B", 0), coords, f"{path}.normal_form.B")
    C = _expr_list(nf.get("C", [0] * (len(coords) - 2)), coords, f"{path}.normal_form.C", len(coords) - 2)
    v = coords[1]
    bad = [k for k, e in (("A", A), ("B", B)) if v in E.variables(e)] + [f"C[{i}]" for i, c in enumerate(C) if v in E.variables(c)]
    if bad:
        _fail(f"{path}.normal_form.{bad[0]}", f"normal-form functions must not depend on {v}")
    return VectorFieldSpec(None, A, B, C, name)


def _deformation(name: str, sec, coords) -> DeformationSpec:
    path = f"deformations.{name}"
    if not isinstance(sec, dict):
        _fail(path, "expected a mapping")
    m = len(coords) - 2
    known = {"P1", "P0", "Q", "t", "P2", "gt"}
    extra = set(sec) - known
    if extra:
        _fail(path, f"unknown keys {sorted(extra)}")
    ts = sec.get("t", [0, "1/2", 1])
    if not isinstance(ts, list) or not ts:
        _fail(f"{path}.t", "expected a non-empty list")
    spec = DeformationSpec(
        _expr(sec.get("P1", 0), coords, f"{path}.P1"),
        _expr(sec.get("P0", 0), coords, f"{path}.P0"),
        _expr_list(sec.get("Q", [0] * m), coords, f"{path}.Q", m),
        tuple(_rational(t, f"{path}.t[{i}]") for i, t in enumerate(ts)),
        _expr(sec.get("P2", 0), coords, f"{path}.P2"),
        _matrix(sec["gt"], coords, f"{path}.gt", m) if "gt" in sec else None,
        name,
    )
    v = coords[1]
    for key in ("P1", "P0", "P2"):
        if v in E.variables(getattr(spec, key)):
            _fail(f"{path}.{key}", f"deformation functions must not depend on {v}")
    for i, q in enumerate(spec.Q):
        if v in E.variables(q):
            _fail(f"{path}.Q[{i}]", f"deformation functions must not depend on {v}")
    return spec


def _settings(sec: dict) -> Settings:
    s = Settings()
    extra = set(sec) - {"mode", "tolerance", "jet_order_cap", "invariants"}
    if extra:
        _fail("settings", f"unknown keys {sorted(extra)}")
    if "mode" in sec:
        if sec["mode"] not in J.MODES:
            _fail("settings.mode", f"must be one of {J.MODES}")
        s.mode = sec["mode"]
    if "tolerance" in sec:
        try:
            s.tolerance = float(sec["tolerance"])
        except (TypeError, ValueError):
            _fail("settings.tolerance", "expected a number")
    if "jet_order_cap" in sec:
        if not isinstance(sec["jet_order_cap"], int) or sec["jet_order_cap"] < 0:
            _fail("settings.jet_order_cap", "expected a non-negative integer")
        s.jet_order_cap = sec["jet_order_cap"]
    if "invariants" in sec:
        inv = sec["invariants"]
        if not (isinstance(inv, list) and len(inv) == 2 and all(isinstance(x, int) and x >= 0 for x in inv)):
            _fail("settings.invariants", "expected [m, p] with non-negative integers")
        s.invariants = tuple(inv)
    return s


def from_dict(doc) -> MetricDocument:
    if not isinstance(doc, dict):
        raise InputError("document must be a mapping")
    extra = set(doc) - {"name", "description", "chart", "metric", "vector_fields", "deformations", "sample_points", "settings"}
    if extra:
        _fail("document", f"unknown sections {sorted(extra)}")
    chart_sec = _section(doc, "chart", dict, required=True)
    coords = chart_sec.get("coordinates")
    if not isinstance(coords, list) or len(coords) < 3 or not all(isinstance(c, str) for c in coords):
        _fail("chart.coordinates", "expected a list of at least 3 coordinate names")
    validity = chart_sec.get("validity", [])
    if not isinstance(validity, list):
        _fail("chart.validity", "expected a list of inequalities")
    try:
        chart = Chart.build(coords, [str(v) for v in validity])
    except KundtkitError as exc:
        _fail("chart", str(exc))
    name = str(doc.get("name", ""))
    try:
        metric = _metric(_section(doc, "metric", dict, required=True), chart.coords, name)
    except InputError:
        raise
    except KundtkitError as exc:
        _fail("metric", str(exc))
    fields = {k: _vector_field(str(k), v, chart.coords) for k, v in (_section(doc, "vector_fields", dict, default={}) or {}).items()}
    defs = {k: _deformation(str(k), v, chart.coords) for k, v in (_section(doc, "deformations", dict, default={}) or {}).items()}
    pts_raw = _section(doc, "sample_points", list, default=[])
    pts = []
    for i, p in enumerate(pts_raw):
        if not isinstance(p, list):
            _fail(f"sample_points[{i}]", "expected a list of coordinates")
        pt = tuple(_rational(x, f"sample_points[{i}][{j}]") for j, x in enumerate(p))
        try:
            chart.check(pt)
        except InputError as exc:
            _fail(f"sample_points[{i}]", str(exc))
        pts.append(pt)
    settings = _settings(_section(doc, "settings", dict, default={}) or {})
    if settings.mode == J.RATIONAL and not metric.is_rational():
        _fail("settings.mode", "metric uses transcendental functions; use mode: float")
    return MetricDocument(name, chart, metric, fields, defs, pts, settings, str(doc.get("description", "")))


def loads(text: str) -> MetricDocument:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InputError(f"not valid YAML: {exc}") from exc
    return from_dict(doc)


def load(path: str) -> MetricDocument:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    return loads(text)


# ---------------------------------------------------------------------------
# serialization


def _num(x) -> str | int:
    q = J.to_rational(x)
    return int(q) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _t(e: E.Expr) -> str:
    return E.to_text(e)


def to_dict(doc: MetricDocument) -> dict:
    out: dict = {"name": doc.name}
    if doc.description:
        out["description"] = doc.description
    out["chart"] = {"coordinates": list(doc.chart.coords), "validity": [v.to_text() for v in doc.chart.validity]}
    g = doc.metric
    if g.kundt is not None:
        kd = g.kundt
        k: dict = {}
        if kd.degenerate is not None:
            d = kd.degenerate
            k["degenerate"] = {
                "H2": _t(d.H2),
                "H1": _t(d.H1),
                "H0": _t(d.H0),
                "W1": [_t(w) for w in d.W1],
                "W0": [_t(w) for w in d.W0],
            }
        else:
            k["H"] = _t(kd.H)
            k["W"] = [_t(w) for w in kd.W]
        k["gt"] = [[_t(x) for x in r] for r in kd.gt]
        out["metric"] = {"kundt": k}
    else:
        out["metric"] = {"components": [[_t(x) for x in r] for r in g.components]}
    vf = {}
    for name, X in doc.vector_fields.items():
        if X.is_normal_form:
            vf[name] = {"normal_form": {"A": _t(X.A), "B": _t(X.B), "C": [_t(c) for c in X.C]}}
        else:
            vf[name] = {"components": [_t(c) for c in X.components]}
    out["vector_fields"] = vf
    dfs = {}
    for name, d in doc.deformations.items():
        entry = {"P1": _t(d.P1), "P0": _t(d.P0), "Q": [_t(q) for q in d.Q], "t": [_num(t) for t in d.t_values]}
        if not E.is_zero(d.P2):
            entry["P2"] = _t(d.P2)
        if d.gt is not None:
            entry["gt"] = [[_t(x) for x in r] for r in d.gt]
        dfs[name] = entry
    out["deformations"] = dfs
    out["sample_points"] = [[_num(x) for x in p] for p in doc.sample_points]
    s = doc.settings
    out["settings"] = {"mode": s.mode, "tolerance": s.tolerance, "jet_order_cap": s.jet_order_cap, "invariants": list(s.invariants)}
    return out


def dumps(doc: MetricDocument) -> str:
    return yaml.safe_dump(to_dict(doc), sort_keys=False, default_flow_style=None, width=100)
