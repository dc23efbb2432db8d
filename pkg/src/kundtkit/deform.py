"""Type III deformations of Kundt metrics, curvature evolution equations and
the flow pull-back check for nil-Killing fields.

A deformation adds ``t * h`` to the metric with
``h = du (x)_s [(v P1 + P0) du + Q_i dx^i]``, i.e. ``H -> H + t (v P1 + P0)``
and ``W_i -> W_i + t Q_i``.  Two optional extra terms exist only to build
negative controls: ``P2`` (adds ``v^2 P2`` to ``H``) and ``gt`` (adds to the
transverse metric).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import expr as E
from . import jet as J
from .classify import _scale, _type_residual, frame_at, nil_killing_check
from .errors import PreconditionError, ShapeError, SingularMetricError
from .geometry import DegenerateParts, Geometry, KundtForm, MetricSpec, VectorFieldSpec, lie_derivative_jets
from .report import DEFAULT_TOLERANCE, ClassificationReport
from .spi import generate_invariants, invariant_jets
from .tensor import TensorValue, determinant, jtensordot


@dataclass(frozen=True)
class DeformationSpec:
    P1: E.Expr = E.ZERO
    P0: E.Expr = E.ZERO
    Q: tuple = ()
    t_values: tuple = (Fraction(0), Fraction(1, 2), Fraction(1))
    P2: E.Expr = E.ZERO
    gt: tuple | None = None
    name: str = ""

    @classmethod
    def build(cls, P1="0", P0="0", Q=(), coords=(), t_values=(0, "1/2", 1), P2="0", gt=None, name: str = "") -> "DeformationSpec":
        def p(x):
            return x if isinstance(x, E.Expr) else E.parse(str(x), coords)

        gtx = None if gt is None else tuple(tuple(p(x) for x in row) for row in gt)
        return cls(p(P1), p(P0), tuple(p(q) for q in Q), tuple(J.to_rational(t) for t in t_values), p(P2), gtx, name)

    @property
    def is_type_iii(self) -> bool:
        """False when one of the negative-control extensions is in use."""
        return E.is_zero(self.P2) and (self.gt is None or all(E.is_zero(x) for r in self.gt for x in r))

    def v_residuals(self, coords, points, mode: str = J.RATIONAL) -> dict:
        """``|d_v f|`` of every component function at the sample points (all should vanish)."""
        fns = {"P1": self.P1, "P0": self.P0, "P2": self.P2}
        fns.update({f"Q{i + 1}": q for i, q in enumerate(self.Q)})
        if self.gt is not None:
            fns.update({f"gt{i + 1}{j + 1}": x for i, r in enumerate(self.gt) for j, x in enumerate(r)})
        out = {}
        for name, f in fns.items():
            worst = J.mpq(0) if mode == J.RATIONAL else 0.0
            for p in points:
                jt = E.eval_jet(f, p, 1, mode)
                worst = max(worst, abs(jt.coeffs[2]))  # d_v is the second coordinate
            out[name] = worst
        return out


def _check_shape(spec: DeformationSpec, n: int):
    if len(spec.Q) != n - 2:
        raise ShapeError(f"deformation needs {n - 2} Q components, got {len(spec.Q)}")
    if spec.gt is not None and (len(spec.gt) != n - 2 or any(len(r) != n - 2 for r in spec.gt)):
        raise ShapeError("deformation gt block has the wrong size")


def deformation_exprs(spec: DeformationSpec, coords) -> np.ndarray:
    """``h_ab`` as an ``n x n`` array of expressions."""
    coords = tuple(coords)
    n = len(coords)
    _check_shape(spec, n)
    v = E.coordinate(coords[1], coords)
    h = np.empty((n, n), dtype=object)
    h[:] = E.ZERO
    h[0, 0] = 2 * (v**2 * spec.P2 + v * spec.P1 + spec.P0)
    for i, q in enumerate(spec.Q):
        h[0, 2 + i] = h[2 + i, 0] = q
    if spec.gt is not None:
        for i in range(n - 2):
            for j in range(n - 2):
                h[2 + i, 2 + j] = spec.gt[i][j]
    for a in range(n):
        for b in range(n):
            h[a, b] = E.as_expr(h[a, b])
    return h


def deformation_tensor(spec: DeformationSpec, coords, p, order: int = 0, mode: str = J.RATIONAL) -> TensorValue:
    pt = tuple(J.to_scalar(x, mode) for x in p)
    data = E.eval_many(deformation_exprs(spec, coords), pt, order, mode)
    return TensorValue(data, "dd", len(coords), pt)


def _shift(e: E.Expr, t, extra: E.Expr) -> E.Expr:
    return e + E.const(t) * extra if not E.is_zero(extra) else e


def deform_metric(g: MetricSpec, spec: DeformationSpec, t) -> MetricSpec:
    """``g + t h`` as a Kundt-form metric spec."""
    if g.kundt is None:
        raise PreconditionError("deformations need a metric in Kundt form")
    n = g.dim
    _check_shape(spec, n)
    t = J.to_rational(t)
    kd = g.kundt
    v = E.coordinate(g.coords[1], g.coords)
    gt = tuple(tuple(_shift(kd.gt[i][j], t, spec.gt[i][j]) if spec.gt is not None else kd.gt[i][j] for j in range(n - 2)) for i in range(n - 2))
    if kd.degenerate is not None:
        d = kd.degenerate
        parts = DegenerateParts(
            _shift(d.H2, t, spec.P2),
            _shift(d.H1, t, spec.P1),
            _shift(d.H0, t, spec.P0),
            d.W1,
            tuple(_shift(w, t, q) for w, q in zip(d.W0, spec.Q)),
        )
        new = KundtForm.from_degenerate(parts, gt, g.coords)
    else:
        H = _shift(kd.H, t, v**2 * spec.P2 + v * spec.P1 + spec.P0)
        W = tuple(_shift(w, t, q) for w, q in zip(kd.W, spec.Q))
        new = KundtForm(H, W, gt)
    return MetricSpec.from_kundt(g.coords, new, f"{g.name}+t*h" if g.name else "")


def perturbed_metric(g: MetricSpec, h_exprs, t) -> MetricSpec:
    """``g + t h`` for an arbitrary symmetric expression array ``h``."""
    n = g.dim
    t = E.const(J.to_rational(t)) if not isinstance(t, float) else E.const(Fraction(t))
    comps = [[g.components[a][b] + t * E.as_expr(h_exprs[a][b]) for b in range(n)] for a in range(n)]
    return MetricSpec(g.coords, tuple(tuple(r) for r in comps), None, g.name)


# ---------------------------------------------------------------------------
# evolution equations


def _h_jets(h, geo: Geometry, order: int) -> TensorValue:
    if isinstance(h, DeformationSpec):
        h = deformation_exprs(h, geo.metric.coords)
    if isinstance(h, TensorValue):
        return h.truncate(order)
    arr = np.empty((geo.n, geo.n), dtype=object)
    for a in range(geo.n):
        for b in range(geo.n):
            arr[a, b] = E.as_expr(h[a][b])
    return geo.tensor_field(arr, "dd", order)


def ricci_scalar_variation(g: MetricSpec, h, p, mode: str = J.FLOAT):
    """``d/dt R(g + t h)`` at ``t = 0``: ``-h_ab R^ab + nabla^a nabla^b h_ab - box(g^ab h_ab)``."""
    geo = Geometry(g, p, 3, mode)
    n = geo.n
    hj = _h_jets(h, geo, 2)
    ginv = geo.inverse().data
    ric = geo.ricci().data
    gi0 = J.truncate(ginv, n, 0)
    ric_up = jtensordot(jtensordot(gi0, J.truncate(ric, n, 0), ([1], [0]), n), gi0, ([1], [0]), n)
    term1 = jtensordot(J.truncate(hj.data, n, 0), ric_up, ([0, 1], [0, 1]), n)[0]
    ddh = geo.cov_derivative(geo.cov_derivative(hj))  # [c, b, a, d] = nabla_c nabla_b h_ad
    term2 = _double_trace(ddh.data, gi0, n)
    tr = jtensordot(J.truncate(ginv, n, 2), hj.data, ([0, 1], [0, 1]), n)
    trj = TensorValue(tr, "", n, geo.point)
    dd_tr = geo.cov_derivative(geo.cov_derivative(trj))  # [a, b]
    box = jtensordot(gi0, J.truncate(dd_tr.data, n, 0), ([0, 1], [0, 1]), n)[0]
    return -term1 + term2 - box


def _double_trace(ddh: np.ndarray, gi0: np.ndarray, n: int):
    """``g^ca g^bd nabla_c nabla_b h_ad``."""
    d0 = J.truncate(ddh, n, 0)
    x = jtensordot(gi0, d0, ([0, 1], [0, 2]), n)  # contract c with a: [b, d]
    return jtensordot(gi0, x, ([0, 1], [0, 1]), n)[0]


def riemann_variation(g: MetricSpec, h, p, mode: str = J.FLOAT) -> TensorValue:
    """``d/dt R_abcd(g + t h)`` at ``t = 0`` from the curvature terms and second derivatives of ``h``."""
    geo = Geometry(g, p, 3, mode)
    n = geo.n
    hj = _h_jets(h, geo, 2)
    up = J.truncate(geo.riemann_up().data, n, 0)  # [f, b, c, d]
    h0 = J.truncate(hj.data, n, 0)
    t = jtensordot(up, h0, ([0], [0]), n)  # [b, c, d, a] = R^f_bcd h_fa
    A = np.transpose(t, (3, 0, 1, 2, 4))  # [a, b, c, d]
    curv = A - np.transpose(A, (1, 0, 2, 3, 4))
    dd = J.truncate(geo.cov_derivative(geo.cov_derivative(hj)).data, n, 0)  # [c, b, a, d]
    # nabla_c nabla_b h_ad as [a, b, c, d]
    N = np.transpose(dd, (2, 1, 0, 3, 4))
    t1 = N  # nabla_c nabla_b h_ad
    t2 = np.transpose(N, (0, 1, 3, 2, 4))  # nabla_d nabla_b h_ac
    t3 = np.transpose(N, (1, 0, 3, 2, 4))  # nabla_d nabla_a h_bc
    t4 = np.transpose(N, (1, 0, 2, 3, 4))  # nabla_c nabla_a h_bd
    half = J.mpq(1, 2) if mode == J.RATIONAL else 0.5
    out = (curv + t1 - t2 + t3 - t4) * half
    return TensorValue(out, "dddd", n, geo.point)


# ---------------------------------------------------------------------------
# the deformation theorem


def def_theorem_check(g: MetricSpec, spec: DeformationSpec, t_values=None, points=(), invariants=None, mode: str = J.RATIONAL, tolerance: float = DEFAULT_TOLERANCE, m_max: int = 2) -> ClassificationReport:
    """(i) ``(L_k)^2 h = 0`` and ``L_k h`` of boost order <= -2; (ii) finite
    differences in ``t`` of ``nabla^m Rm`` are type III for ``m <= m_max``;
    (iii) every invariant takes the same value at all ``t_values``.
    The hypothesis that ``h`` is type III is reported as its own clause and kept
    out of the witnesses, so ``agreement`` compares (i)-(iii) only.

    Differences in (ii) are taken between consecutive ``t_values``; for the
    linear family they are exact difference quotients.
    """
    if g.kundt is None:
        raise PreconditionError("deformations need a metric in Kundt form")
    ts = [J.to_scalar(J.to_rational(t), mode) for t in (t_values if t_values is not None else spec.t_values)]
    invariants = generate_invariants(m_max, 3) if invariants is None else list(invariants)
    m_need = max(m_max, max((s.max_deriv for s in invariants), default=0))
    pts = [tuple(J.to_scalar(x, mode) for x in p) for p in points]
    metrics = [deform_metric(g, spec, t if mode == J.RATIONAL else Fraction(t)) for t in ts]
    rep = ClassificationReport("def_theorem", pts, mode, tolerance)
    w0, w1, w2, w3 = [], [], [], []
    for p in pts:
        geo0 = Geometry(g, p, 2, mode)
        frame = frame_at(geo0)
        kj = TensorValue(frame.jets[0], "u", geo0.n, geo0.point)
        hj = deformation_tensor(spec, g.coords, p, 2, mode)
        l1 = lie_derivative_jets(kj, hj)
        l2 = lie_derivative_jets(kj, l1)
        res, sc = {}, {}
        res["(L_k)^2 h = 0"] = max((abs(x) for x in l2.values.reshape(-1)), default=0)
        sc["(L_k)^2 h = 0"] = _scale(hj.values)
        res["L_k h boost order <= -2"], sc["L_k h boost order <= -2"] = _type_residual(l1, frame, -2)
        res["h type III"], sc["h type III"] = _type_residual(hj, frame, -1)
        geos = []
        for gm in metrics:
            geo = Geometry(gm, p, m_need + 2, mode)
            if determinant(geo.metric_tensor().values) == 0:
                raise SingularMetricError(f"deformed metric is degenerate at {p}")
            geos.append(geo)
        ii_names = []
        for m in range(m_max + 1):
            name = f"d/dt nabla^{m} Rm type III"
            worst, ws = 0 * ts[0], 0.0
            for a in range(len(ts) - 1):
                dt = ts[a + 1] - ts[a]
                A = geos[a].nabla_riemann(m).value_tensor()
                B = geos[a + 1].nabla_riemann(m).value_tensor()
                diff = TensorValue((B.data - A.data) * (1 / dt if mode == J.FLOAT else J.mpq(1) / dt), B.variance, B.nvars, B.point)
                r, s_ = _type_residual(diff, frame, -1)
                worst, ws = max(worst, r), max(ws, s_, _scale(A.values))
            res[name], sc[name] = worst, ws
            ii_names.append(name)
        vals = [[j[0] for j in invariant_jets(invariants, geo)] for geo in geos]
        iii_names = []
        for i, s in enumerate(invariants):
            name = f"spi {s.label()} constant in t"
            col = [v[i] for v in vals]
            res[name] = max(abs(x - col[0]) for x in col)
            sc[name] = max(abs(float(x)) for x in col)
            iii_names.append(name)
        rep.add_point(res, sc)
        q = len(rep.residuals) - 1
        w0.append(rep.clause_passes(q, "h type III"))
        w1.append(rep.clause_passes(q, "(L_k)^2 h = 0") and rep.clause_passes(q, "L_k h boost order <= -2"))
        w2.append(all(rep.clause_passes(q, c) for c in ii_names))
        w3.append(all(rep.clause_passes(q, c) for c in iii_names))
    rep.add_witness("(i) L_k h", w1)
    rep.hypothesis = w0
    rep.add_witness("(ii) d/dt nabla^m Rm", w2)
    rep.add_witness("(iii) spi invariance", w3)
    rep.notes.append(f"invariant slice: {len(invariants)} invariants, t in {[str(t) for t in ts]}")
    return rep


def spi_changes(rep: ClassificationReport) -> dict:
    """Largest relative change of each invariant across ``t`` in a theorem report."""
    out = {}
    for res, sc in zip(rep.residuals, rep.scales):
        for k, v in res.items():
            if k.startswith("spi "):
                rel = float(v) / max(float(sc.get(k, 0.0)), 1e-300) if float(v) else 0.0
                out[k] = max(out.get(k, 0.0), rel)
    return out


# ---------------------------------------------------------------------------
# flows of vector fields


def _vector_value_and_jacobian(X: VectorFieldSpec, x) -> tuple[np.ndarray, np.ndarray]:
    jt = X.jets(tuple(float(c) for c in x), 1, J.FLOAT)
    n = len(x)
    return jt[:, 0].astype(float), jt[:, 1:n + 1].astype(float)  # DX[b, a] = d_a X^b


def integrate_flow(X: VectorFieldSpec, p, t: float, steps: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """RK4 for ``x' = X(x)`` together with the variational equation ``J' = DX J``."""
    x = np.array([float(c) for c in p])
    n = len(x)
    Jm = np.eye(n)
    h = t / steps

    def rhs(x, Jm):
        v, D = _vector_value_and_jacobian(X, x)
        return v, D @ Jm

    for _ in range(steps):
        k1x, k1J = rhs(x, Jm)
        k2x, k2J = rhs(x + h / 2 * k1x, Jm + h / 2 * k1J)
        k3x, k3J = rhs(x + h / 2 * k2x, Jm + h / 2 * k2J)
        k4x, k4J = rhs(x + h * k3x, Jm + h * k3J)
        x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        Jm = Jm + h / 6 * (k1J + 2 * k2J + 2 * k3J + k4J)
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(Jm))):
        raise PreconditionError("flow integration diverged; reduce t")
    return x, Jm


def pullback_metric(g: MetricSpec, X: VectorFieldSpec, p, t: float, steps: int = 64) -> np.ndarray:
    """``(phi_t^* g)_p`` by the chain rule through the integrated Jacobian."""
    x, Jm = integrate_flow(X, p, t, steps)
    gx = E.eval_many(g.expr_array(), tuple(x), 0, J.FLOAT)[..., 0].astype(float)
    return Jm.T @ gx @ Jm


def flow_pullback_check(g: MetricSpec, X: VectorFieldSpec, t_small: float = 0.1, p=None, points=None, tolerance: float = 1e-8, richardson=(1e-2, 1e-3), richardson_tolerance: float = 1e-6, require_nil_killing: bool = True) -> ClassificationReport:
    """``phi_t^* g - g`` of type III at ``t_small`` and Richardson-extrapolated
    ``(phi_t^* g - g) / t`` against ``L_X g``."""
    pts = [p] if points is None else list(points)
    pts = [tuple(float(J.to_rational(c)) for c in q) for q in pts]
    if require_nil_killing:
        pre = nil_killing_check(X, g, None, [tuple(J.to_rational(c) for c in q) for q in (points or [p])], True, J.RATIONAL if g.is_rational() else J.FLOAT)
        if not pre.verdict:
            raise PreconditionError(f"X is not an algebra-preserving nil-Killing field: failing {pre.failing_clauses()}")
    rep = ClassificationReport("flow_pullback", pts, J.FLOAT, tolerance)
    for q in pts:
        geo = Geometry(g, q, 1, J.FLOAT)
        frame = frame_at(geo)
        g0 = geo.metric_tensor().values.astype(float)
        diff = pullback_metric(g, X, q, t_small) - g0
        dv = TensorValue(diff[..., None], "dd", geo.n, geo.point)
        res, sc = {}, {}
        res["phi_t*g-g type III"], _ = _type_residual(dv, frame, -1)
        lxg = lie_derivative_jets(geo.vector(X, 1), geo.metric_tensor()).values.astype(float)
        t1, t2 = richardson
        d1 = (pullback_metric(g, X, q, t1) - g0) / t1
        d2 = (pullback_metric(g, X, q, t2) - g0) / t2
        r = t1 / t2
        extrap = (r * d2 - d1) / (r - 1)
        res["Richardson error"] = float(np.max(np.abs(extrap - lxg)))
        # the report tolerance is absolute; this scale turns it into richardson_tolerance
        sc["Richardson error"] = richardson_tolerance / tolerance
        rep.add_point(res, sc)
    return rep
