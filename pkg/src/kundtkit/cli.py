"""Command-line entry point: ``kundtkit {classify,spi,deform,frame,examples}``.

Exit codes: 0 when every verdict passes, 1 when one fails, 2 on input errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import catalog
from . import classify as K
from . import jet as J
from . import metricfile as MF
from .chart import Chart
from .deform import def_theorem_check, spi_changes
from .errors import InputError, JetOrderError, KundtkitError, ModeError, ParseError, PreconditionError, ShapeError
from .frame import FRAME_CHECK_ORDER, build_kundt_frame, degenerate_frame_check
from .geometry import Geometry
from .spi import generate_invariants, spi_report

INPUT_ERRORS = (InputError, ParseError, ShapeError, ModeError, JetOrderError)


@dataclass
class RunReport:
    command: str
    input_name: str
    input_digest: str
    settings: dict
    results: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return all(r.get("verdict", True) is not False for r in self.results)

    def to_dict(self, timings: bool = False) -> dict:
        out = {
            "tool": "kundtkit",
            "version": __version__,
            "command": self.command,
            "input": self.input_name,
            "input_digest": self.input_digest,
            "settings": self.settings,
            "verdict": self.verdict,
            "results": self.results,
        }
        if timings:
            out["timings"] = self.timings
        return out


def jsonable(x):
    """Rationals become ``"p/q"`` strings; numpy scalars become Python numbers."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if type(x).__name__ == "mpq":
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "-inf" if x < 0 else "inf"
        return x
    return x


# ---------------------------------------------------------------------------
# input handling


def load_input(spec: str) -> tuple[MF.MetricDocument, str, str]:
    if spec.startswith("catalog:"):
        name = spec.split(":", 1)[1]
        text = catalog.text(name)
        doc = MF.loads(text)
    else:
        doc = MF.load(spec)
        name = spec
    digest = hashlib.sha256(MF.dumps(doc).encode()).hexdigest()
    return doc, name, digest


def parse_points(text: str, chart: Chart, mode: str) -> list:
    pts = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            raw = tuple(J.to_rational(x.strip()) for x in chunk.split(","))
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"--points: cannot read {chunk!r}: {exc}") from exc
        pts.append(chart.check(raw, mode))
    if not pts:
        raise InputError("--points: no points given")
    return pts


def parse_slice(text: str) -> tuple[int, int]:
    try:
        m, p = (int(x) for x in text.split(","))
    except ValueError as exc:
        raise InputError(f"--invariants expects 'm,p', got {text!r}") from exc
    if m < 0 or p < 1:
        raise InputError("--invariants needs m >= 0 and p >= 1")
    return m, p


@dataclass
class Options:
    mode: str
    tolerance: float
    slice: tuple
    points: list
    cap: int


def resolve_options(doc: MF.MetricDocument, args) -> Options:
    s = doc.settings
    mode = args.mode or s.mode
    if mode == J.RATIONAL and not doc.metric.is_rational():
        raise InputError("metric uses transcendental functions; rational mode is unavailable")
    tol = args.tolerance if args.tolerance is not None else s.tolerance
    sl = parse_slice(args.invariants) if args.invariants else tuple(s.invariants)
    pts = parse_points(args.points, doc.chart, mode) if args.points else doc.points(mode)
    if not pts:
        raise InputError("no sample points: declare sample_points or pass --points")
    return Options(mode, tol, sl, pts, s.jet_order_cap)


def _need_order(opts: Options, order: int, what: str):
    if order > opts.cap:
        raise InputError(f"{what} needs metric jets of order {order}, above jet_order_cap {opts.cap}")


def _k_field(doc: MF.MetricDocument):
    if "k" in doc.vector_fields:
        return doc.vector_fields["k"]
    if doc.metric.kundt is not None:
        return K._k_default(doc.metric, None)
    return None


def _summary(rep, name: str) -> dict:
    d = rep.to_dict()
    d["name"] = name
    d["failing"] = rep.failing_clauses()
    return d


# ---------------------------------------------------------------------------
# commands


def cmd_classify(doc: MF.MetricDocument, opts: Options, run: RunReport):
    g = doc.metric
    k = _k_field(doc)
    if k is None:
        run.results.append({"name": "kundt structure", "verdict": None, "note": "no Kundt structure declared (no Kundt form and no field named k)"})
        return
    _need_order(opts, 3, "degenerate Kundt check")
    t0 = time.perf_counter()
    run.results.append(_summary(K.kundt_vector_check(k, g, opts.points, opts.mode, opts.tolerance), "kundt_vector[k]"))
    run.results.append(_summary(K.twist_check(k, g, opts.points, opts.mode, opts.tolerance), "twist[k]"))
    try:
        kk = None if ("k" not in doc.vector_fields and g.kundt is not None) else k
        rep = K.degenerate_kundt_check(g, kk, opts.points, opts.mode, opts.tolerance)
        run.results.append(_summary(rep, "degenerate_kundt"))
    except PreconditionError as exc:
        run.results.append({"name": "degenerate_kundt", "verdict": False, "note": str(exc)})
    run.timings["kundt"] = time.perf_counter() - t0
    for name, X in doc.vector_fields.items():
        if name == "k" and g.kundt is None:
            continue
        t0 = time.perf_counter()
        frame = None if g.kundt is not None else _CompleteK(k)
        rep = K.nil_killing_check(X, g, frame, opts.points, True, opts.mode, opts.tolerance)
        run.results.append(_summary(rep, f"nil_killing[{name}]"))
        run.timings[f"nil_killing[{name}]"] = time.perf_counter() - t0


class _CompleteK:
    """Frame field completing a declared null field ``k``."""

    def __init__(self, k):
        self.k = k

    def at(self, geo: Geometry):
        from .frame import complete_null_frame

        return complete_null_frame(geo, self.k.jets(geo.point, geo.order, geo.mode))


def cmd_spi(doc: MF.MetricDocument, opts: Options, run: RunReport, expect: str | None = None):
    m, p = opts.slice
    _need_order(opts, m + 2, "invariant slice")
    invs = generate_invariants(m, p)
    t0 = time.perf_counter()
    rep = spi_report(doc.metric, opts.points, invs, opts.mode, opts.tolerance, (m, p))
    run.timings["spi"] = time.perf_counter() - t0
    d = rep.to_dict()
    d["name"] = "spi"
    d["classification"] = d.pop("verdict")
    if expect is not None:
        d["expected"] = expect
        d["verdict"] = rep.verdict == expect
    run.results.append(d)


def cmd_deform(doc: MF.MetricDocument, opts: Options, run: RunReport, names=None):
    if doc.metric.kundt is None:
        raise InputError("deformations need a metric in Kundt form")
    if not doc.deformations:
        raise InputError("no deformations declared")
    names = names or list(doc.deformations)
    m, p = opts.slice
    _need_order(opts, m + 2, "deformation check")
    invs = generate_invariants(m, p)
    for name in names:
        if name not in doc.deformations:
            raise InputError(f"unknown deformation {name!r}; declared: {', '.join(doc.deformations)}")
        spec = doc.deformations[name]
        t0 = time.perf_counter()
        rep = def_theorem_check(doc.metric, spec, None, opts.points, invs, opts.mode, opts.tolerance, min(m, 2))
        run.timings[f"deform[{name}]"] = time.perf_counter() - t0
        d = _summary(rep, f"deform[{name}]")
        changes = {k[4:-len(" constant in t")]: v for k, v in spi_changes(rep).items() if v > (0 if opts.mode == J.RATIONAL else opts.tolerance)}
        d["changed_invariants"] = changes
        run.results.append(d)


def cmd_frame(doc: MF.MetricDocument, opts: Options, run: RunReport):
    if doc.metric.kundt is None:
        run.results.append({"name": "frame", "verdict": None, "note": "no Kundt structure declared"})
        return
    _need_order(opts, FRAME_CHECK_ORDER, "degenerate frame check")
    vectors = []
    for p in opts.points:
        fr = build_kundt_frame(Geometry(doc.metric, p, 0, opts.mode))
        vectors.append({"point": list(p), "k": list(fr.k), "l": list(fr.l), "m": [list(r) for r in fr.m], "normalized": fr.normalized})
    t0 = time.perf_counter()
    rep = degenerate_frame_check(None, doc.metric, opts.points, opts.mode, opts.tolerance)
    run.timings["frame"] = time.perf_counter() - t0
    d = _summary(rep, "degenerate_frame")
    d["frames"] = vectors
    run.results.append(d)


# ---------------------------------------------------------------------------
# output


def _fmt(x) -> str:
    if type(x).__name__ == "mpq":
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def render_human(run: RunReport, timings: bool = False) -> str:
    lines = [f"kundtkit {run.command}: {run.input_name}"]
    for r in run.results:
        v = r.get("verdict")
        tag = "n/a" if v is None else ("PASS" if v else "FAIL")
        name = r.get("name", "?")
        if name == "spi":
            lines.append(f"  spi slice m<={r['slice'][0]}, p<={r['slice'][1]}: {r['classification']}" + (f" (expected {r['expected']}: {tag})" if "expected" in r else ""))
            for inv, vals in r["invariants"].items():
                lines.append(f"    {inv:16s} " + "  ".join(_fmt(x) for x in vals))
            continue
        line = f"  {name}: {tag}"
        if "note" in r:
            line += f" ({r['note']})"
        lines.append(line)
        if r.get("failing"):
            worst = {}
            for pp in r.get("per_point", []):
                for c in r["failing"]:
                    if c in pp["residuals"]:
                        worst[c] = max(worst.get(c, 0), abs(float(pp["residuals"][c])))
            for c in r["failing"]:
                lines.append(f"    failing {c}: max residual {_fmt(worst.get(c, 0.0))}")
        if "witnesses" in r:
            lines.append(f"    witnesses agree: {r.get('agreement')}")
        if r.get("changed_invariants"):
            for inv, rel in r["changed_invariants"].items():
                lines.append(f"    invariant {inv} changes (relative {rel:.3g})")
    lines.append(f"overall: {'PASS' if run.verdict else 'FAIL'}")
    if timings:
        for k, v in run.timings.items():
            lines.append(f"  time {k}: {v:.3f}s")
    return "\n".join(lines) + "\n"


def render(run: RunReport, fmt: str, timings: bool) -> str:
    if fmt == "machine":
        return json.dumps(jsonable(run.to_dict(timings)), indent=2) + "\n"
    return render_human(run, timings)


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kundtkit", description="Classify Kundt metrics, evaluate curvature invariants and check deformations.")
    ap.add_argument("--version", action="version", version=f"kundtkit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", "-i", required=True, help="metric file, or catalog:NAME")
        p.add_argument("--points", help="override sample points, e.g. '0,1,2,0;1,-1,1,2'")
        p.add_argument("--mode", choices=J.MODES)
        p.add_argument("--tolerance", type=float)
        p.add_argument("--invariants", help="invariant slice 'm,p'")
        p.add_argument("--format", choices=("human", "machine"), default="human")
        p.add_argument("--output", "-o", help="write the report here instead of stdout")
        p.add_argument("--timings", action="store_true", help="include timings in the report")

    common(sub.add_parser("classify", help="Kundt, twist, degenerate Kundt and nil-Killing checks"))
    p = sub.add_parser("spi", help="evaluate curvature invariants; VSI / CSI verdict")
    common(p)
    p.add_argument("--expect", choices=("VSI", "CSI", "neither"), help="fail unless the verdict matches")
    p = sub.add_parser("deform", help="check the deformation theorem for declared deformations")
    common(p)
    p.add_argument("--deformation", "-d", action="append", help="deformation name (repeatable; default all)")
    common(sub.add_parser("frame", help="Kundt frame and degenerate frame conditions"))
    p = sub.add_parser("examples", help="list catalog entries or print one")
    p.add_argument("name", nargs="?")
    p.add_argument("--output", "-o")
    return ap


def _write(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "examples":
            if args.name:
                _write(catalog.text(args.name), args.output)
            else:
                _write("".join(f"{n}\n" for n in catalog.names()), args.output)
            return 0
        doc, name, digest = load_input(args.input)
        opts = resolve_options(doc, args)
        settings = {
            "mode": opts.mode,
            "tolerance": opts.tolerance,
            "invariants": list(opts.slice),
            "points": [[_fmt(x) for x in p] for p in opts.points],
        }
        run = RunReport(args.command, name, digest, settings)
        if args.command == "classify":
            cmd_classify(doc, opts, run)
        elif args.command == "spi":
            cmd_spi(doc, opts, run, args.expect)
        elif args.command == "deform":
            cmd_deform(doc, opts, run, args.deformation)
        elif args.command == "frame":
            cmd_frame(doc, opts, run)
    except INPUT_ERRORS as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return 2
    except KundtkitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    _write(render(run, args.format, args.timings), args.output)
    return 0 if run.verdict else 1


if __name__ == "__main__":
    raise SystemExit(main())
