"""Pointwise predicates: algebraic type of linear maps, Kundt and twist checks,
nil-Killing fields, degenerate Kundt metrics, Lie algebra closure and
stability of algebraic type.

Every predicate samples a list of points and returns a
:class:`~kundtkit.report.ClassificationReport`.  Subspace membership is always
measured through frame projections.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import expr as E
from . import jet as J
from .errors import PreconditionError, ShapeError, SingularMetricError
from .frame import (
    NullFrame,
    build_kundt_frame,
    complete_null_frame,
    repeated_directional,
)
from .geometry import Geometry, MetricSpec, VectorFieldSpec, lie_derivative_jets
from .report import DEFAULT_TOLERANCE, ClassificationReport
from .tensor import (
    TensorValue,
    components_above,
    determinant,
    frame_components,
    from_frame_components,
    full_contraction,
    jtensordot,
    lower_all,
    matrix_inverse,
    residual_norm,
    weight_grid,
)

# ---------------------------------------------------------------------------
# helpers


def _zero(mode: str):
    return J.mpq(0) if mode == J.RATIONAL else 0.0


def _max(values, mode: str):
    return max((abs(v) for v in values), default=_zero(mode))


def _scale(arr) -> float:
    a = np.asarray(arr)
    if a.size == 0:
        return 0.0
    return float(max(abs(float(x)) for x in a.reshape(-1)))


def _points(points, mode):
    return [tuple(J.to_scalar(x, mode) for x in p) for p in points]


def _k_default(g: MetricSpec, k: VectorFieldSpec | None) -> VectorFieldSpec:
    if k is not None:
        return k
    if g.kundt is None:
        raise PreconditionError("no null vector field given and the metric is not in Kundt form")
    comps = [E.ZERO] * g.dim
    comps[1] = E.ONE
    return VectorFieldSpec.from_components(comps, name="d_v")


def frame_at(geo: Geometry, frame=None, k: VectorFieldSpec | None = None) -> NullFrame:
    """Resolve a frame choice at ``geo``.

    ``frame`` may be a frame field (anything with ``.at(geo)``), a ready
    :class:`NullFrame`, or ``None``: then the Kundt frame is used for metrics in
    Kundt form and otherwise ``k`` is completed to a null frame.
    """
    if isinstance(frame, NullFrame):
        return frame
    if frame is not None:
        return frame.at(geo)
    if k is None and geo.metric.kundt is not None:
        return build_kundt_frame(geo)
    kk = _k_default(geo.metric, k)
    return complete_null_frame(geo, kk.jets(geo.point, geo.order, geo.mode))


def _type_residual(T: TensorValue, frame: NullFrame, s, g: TensorValue | None = None):
    """``(max |component of weight > s|, scale)`` of ``T`` at the frame's point."""
    Tv = T.value_tensor()
    if "u" in Tv.variance:
        if g is None:
            raise ShapeError("contravariant slots need a metric to lower")
        Tv = lower_all(Tv, g.value_tensor())
    comp = frame_components(Tv, frame)
    above = components_above(Tv, frame, s)
    return residual_norm(above), _scale(comp)


def _outside(vec_values, frame: NullFrame, target: str):
    comp = frame.components(vec_values)
    if target == "kperp":
        parts = [comp[1]]
    elif target == "Rk":
        parts = list(comp[1:])
    else:
        parts = list(comp)
    return _max(parts, J.array_mode(frame.matrix)), _scale(comp)


def _kundt_vector_jets(geo: Geometry, k: VectorFieldSpec, order: int) -> TensorValue:
    return geo.vector(k, order)


# ---------------------------------------------------------------------------
# linear maps


def metric_from_frame(frame: NullFrame) -> np.ndarray:
    """Metric values for which ``frame`` is a null frame."""
    cof = frame.coframe
    n = frame.dim
    outer = np.multiply.outer
    g = outer(cof[0], cof[1]) + outer(cof[1], cof[0])
    for i in range(2, n):
        g = g + outer(cof[i], cof[i])
    return g


def _random_type_ii(rng, rank: int, n: int, mode: str) -> np.ndarray:
    """Random frame components of a covariant type II tensor (integer entries)."""
    grid = weight_grid(rank, n)
    comp = J.zeros((n,) * rank, mode)
    for idx in np.ndindex(grid.shape):
        if grid[idx] <= 0:
            comp[idx] = J.to_scalar(int(rng.integers(-3, 4)), mode)
    return comp


def _pairings(rank: int):
    """All perfect matchings of ``range(rank)``."""
    if rank == 0:
        yield []
        return
    first = 0
    for j in range(1, rank):
        rest = [x for x in range(1, rank) if x != j]
        for sub in _pairings_of(rest):
            yield [(first, j)] + sub


def _pairings_of(items):
    if not items:
        yield []
        return
    a = items[0]
    for j in range(1, len(items)):
        rest = items[1:j] + items[j + 1:]
        for sub in _pairings_of(rest):
            yield [(a, items[j])] + sub


def _pullback(T: np.ndarray, f: np.ndarray) -> np.ndarray:
    out = T
    for _ in range(T.ndim):
        out = np.tensordot(out, f, axes=([0], [0]))
    return out


def linear_map_type_check(f, frame1: NullFrame, frame2: NullFrame, g1=None, g2=None, tolerance: float = DEFAULT_TOLERANCE, samples: int = 10, seed: int = 0) -> ClassificationReport:
    """Whether ``f: V1 -> V2`` preserves algebraic type, plus the three equivalent
    conditions on how it treats the metrics when it does.

    ``f[a, b]`` maps the coordinate vector ``e_b`` of ``V1`` to ``f[:, b]``.
    ``g1, g2`` default to the metrics in which the frames are null frames.
    Condition iii) is sampled on ``samples`` random type II tensors of ranks 2 and 4.
    """
    mode = J.array_mode(frame1.matrix)
    f = np.array(f, dtype=object if mode == J.RATIONAL else float)
    if mode == J.RATIONAL:
        f = np.vectorize(J.to_rational, otypes=[object])(f)
    if determinant(f) == 0:
        raise SingularMetricError("linear map is not invertible")
    g1 = metric_from_frame(frame1) if g1 is None else g1
    g2 = metric_from_frame(frame2) if g2 is None else g2
    n = frame1.dim
    rep = ClassificationReport("linear_map_type", [frame1.point], mode, tolerance)
    res, sc = {}, {}
    fk = f.dot(frame1.k)
    res["f(lambda1) in lambda2"], sc["f(lambda1) in lambda2"] = _outside(fk, frame2, "Rk")
    worst, worst_sc = _zero(mode), 0.0
    for A in [0] + list(range(2, n)):
        r, s_ = _outside(f.dot(frame1.matrix[A]), frame2, "kperp")
        worst, worst_sc = max(worst, r), max(worst_sc, s_)
    res["f(lambda1perp) in lambda2perp"], sc["f(lambda1perp) in lambda2perp"] = worst, worst_sc
    rep.add_point(res, sc)
    rep.required = list(res)
    if not rep.verdict:
        rep.notes.append("f does not preserve algebraic type; equivalent conditions skipped")
        return rep

    def ip(gm, x, y):
        return x.dot(gm.dot(y))

    # i) isometry on lambda1perp and g2(fx, fz) = g1(x, z) for x in lambda1
    perp = [frame1.matrix[0]] + [frame1.matrix[A] for A in range(2, n)]
    diffs = []
    for x in perp:
        for z in perp:
            diffs.append(ip(g2, f.dot(x), f.dot(z)) - ip(g1, x, z))
    for z in frame1.matrix:
        diffs.append(ip(g2, f.dot(frame1.k), f.dot(z)) - ip(g1, frame1.k, z))
    res["(i) isometry"] = _max(diffs, mode)
    sc["(i) isometry"] = _scale(g2)
    # ii) f* g2 - g1 of type III
    pulled = _pullback(g2, f) - g1
    diff = TensorValue(pulled[..., None], "dd", n, frame1.point)
    res["(ii) f*g2-g1 type III"], sc["(ii) f*g2-g1 type III"] = _type_residual(diff, frame1, -1)
    # iii) full contractions of random type II tensors are preserved
    rng = np.random.default_rng(seed)
    inv1 = TensorValue(matrix_inverse(g1)[..., None], "uu", n, frame1.point)
    inv2 = TensorValue(matrix_inverse(g2)[..., None], "uu", n, frame2.point)
    diffs, scales = [], [0.0]
    for t in range(samples):
        rank = 2 if t % 2 == 0 else 4
        T2 = from_frame_components(_random_type_ii(rng, rank, n, mode), frame2)
        T1 = _pullback(T2, f)
        tv2 = TensorValue(T2[..., None], "d" * rank, n, frame2.point)
        tv1 = TensorValue(T1[..., None], "d" * rank, n, frame1.point)
        for pairs in _pairings(rank):
            a = full_contraction(tv2, pairs, inv2)
            b = full_contraction(tv1, pairs, inv1)
            diffs.append(a - b)
            scales.append(abs(float(a)))
    res["(iii) traces preserved"] = _max(diffs, mode)
    sc["(iii) traces preserved"] = max(scales)
    rep.residuals[0] = res
    rep.scales[0] = sc
    for name in ("(i) isometry", "(ii) f*g2-g1 type III", "(iii) traces preserved"):
        rep.add_witness(name, [rep.clause_passes(0, name)])
    return rep


# ---------------------------------------------------------------------------
# Kundt vector fields and twist


def _nabla_k(geo: Geometry, kj: TensorValue) -> tuple[TensorValue, TensorValue]:
    """``(nabla_a k^b, nabla_a k_b)`` at order ``kj.order - 1``."""
    up = geo.cov_derivative(kj)
    low = lower_all(up, geo.metric_tensor().truncate(up.order))
    return up, low


def kundt_vector_check(k: VectorFieldSpec, g: MetricSpec, points, mode: str = J.RATIONAL, tolerance: float = DEFAULT_TOLERANCE) -> ClassificationReport:
    """Geodesic, divergence-free and shear-free residuals of a null field ``k``,
    with boost order of ``L_k g`` as an independent witness."""
    pts = _points(points, mode)
    rep = ClassificationReport("kundt_vector", pts, mode, tolerance)
    optical, nil = [], []
    for p in pts:
        geo = Geometry(g, p, 2, mode)
        kj = _kundt_vector_jets(geo, k, 2)
        gv = geo.metric_tensor().values
        kv = kj.values
        kk = kv.dot(gv.dot(kv))
        if (kk != 0) if mode == J.RATIONAL else abs(kk) > tolerance * max(1.0, _scale(gv) * _scale(kv) ** 2):
            raise PreconditionError(f"k is not null at {p}")
        up, low = _nabla_k(geo, kj)
        nk = up.values  # [a, b] = nabla_a k^b
        nkl = low.values  # [a, b] = nabla_a k_b
        ginv = geo.inverse().values
        res, sc = {}, {}
        geod = kv.dot(nk)
        res["nabla_k k"], sc["nabla_k k"] = _max(geod, mode), _scale(nk) * _scale(kv)
        div = sum(nk[a, a] for a in range(geo.n))
        res["divergence"], sc["divergence"] = abs(div), _scale(nk)
        sym = (nkl + nkl.T) * (J.mpq(1, 2) if mode == J.RATIONAL else 0.5)
        nk_up = ginv.dot(nkl).dot(ginv.T)  # nabla^a k^b
        shear = sum(sym[a, b] * nk_up[a, b] for a in range(geo.n) for b in range(geo.n))
        res["shear"], sc["shear"] = abs(shear), _scale(nk) ** 2
        frame = complete_null_frame(geo, kj.data)
        lkg = lie_derivative_jets(kj, geo.metric_tensor())
        res["L_k g type III"], sc["L_k g type III"] = _type_residual(lkg, frame, -1)
        rep.add_point(res, sc)
        i = len(rep.residuals) - 1
        optical.append(all(rep.clause_passes(i, c) for c in ("nabla_k k", "divergence", "shear")))
        nil.append(rep.clause_passes(i, "L_k g type III"))
    rep.add_witness("geodesic, shear- and divergence-free", optical)
    rep.add_witness("nil-Killing along k", nil)
    return rep


def twist_check(k: VectorFieldSpec, g: MetricSpec, points, mode: str = J.RATIONAL, tolerance: float = DEFAULT_TOLERANCE) -> ClassificationReport:
    """``k_[c nabla_a k_b]`` and the projection form ``nabla_{lambda^perp} lambda in lambda``."""
    pts = _points(points, mode)
    rep = ClassificationReport("twist", pts, mode, tolerance)
    w_twist, w_proj = [], []
    perms = list(itertools.permutations(range(3)))
    for p in pts:
        geo = Geometry(g, p, 2, mode)
        kj = _kundt_vector_jets(geo, k, 2)
        up, low = _nabla_k(geo, kj)
        kl = geo.metric_tensor().values.dot(kj.values)
        T = np.multiply.outer(kl, low.values)  # [c, a, b]
        total = T * 0
        for perm in perms:
            sign = 1 if sum(1 for i in range(3) for j in range(i + 1, 3) if perm[i] > perm[j]) % 2 == 0 else -1
            total = total + sign * np.transpose(T, perm)
        res, sc = {}, {}
        res["k_[c nabla_a k_b]"] = residual_norm(total)
        sc["k_[c nabla_a k_b]"] = _scale(T)
        frame = complete_null_frame(geo, kj.data)
        nk = up.values
        worst, ws = _zero(mode), 0.0
        for A in [0] + list(range(2, geo.n)):
            r, s_ = _outside(frame.matrix[A].dot(nk), frame, "Rk")
            worst, ws = max(worst, r), max(ws, s_)
        res["nabla_(lambda perp) lambda in lambda"], sc["nabla_(lambda perp) lambda in lambda"] = worst, ws
        rep.add_point(res, sc)
        i = len(rep.residuals) - 1
        w_twist.append(rep.clause_passes(i, "k_[c nabla_a k_b]"))
        w_proj.append(rep.clause_passes(i, "nabla_(lambda perp) lambda in lambda"))
    rep.add_witness("twist form", w_twist)
    rep.add_witness("frame projection", w_proj)
    return rep


# ---------------------------------------------------------------------------
# nil-Killing fields

NORMAL_FORM_CLAUSES = ("A_v", "C_v", "B_v+A_u", "A_x", "Ceq", "(L_Xg)_r")


def _normal_form_residuals(geo: Geometry, X: TensorValue, lxg: TensorValue) -> tuple[dict, dict]:
    n = geo.n
    mode = geo.mode
    g = geo.metric_tensor().data
    Xd = X.data
    dX = J.gradient(Xd, n)  # [a, b] = d_a X^b
    dg = J.gradient(g, n)  # [c, a, b] = d_c g_ab
    val = lambda a: a[..., 0]  # noqa: E731
    A, B = Xd[0], Xd[1]
    C = Xd[2:]
    gt = g[2:, 2:]
    res, sc = {}, {}
    res["A_v"] = abs(val(dX[1, 0]))
    res["C_v"] = _max(val(dX[1, 2:]), mode)
    res["B_v+A_u"] = abs(val(dX[1, 1]) + val(dX[0, 0]))
    res["A_x"] = _max(val(dX[2:, 0]), mode)
    m = n - 2
    ceq = []
    for i in range(m):
        for j in range(m):
            t = sum(val(C[k]) * val(dg[2 + k, 2 + i, 2 + j]) for k in range(m))
            t = t + sum(val(gt[j, k]) * val(dX[2 + i, 2 + k]) + val(gt[i, k]) * val(dX[2 + j, 2 + k]) for k in range(m))
            t = t + val(A) * val(dg[0, 2 + i, 2 + j]) + val(B) * val(dg[1, 2 + i, 2 + j])
            ceq.append(t)
    res["Ceq"] = _max(ceq, mode)
    L = lxg.values
    r_block = [L[1, 0], L[1, 1]] + [L[1, 2 + i] for i in range(m)] + [L[2 + i, 2 + j] for i in range(m) for j in range(m)]
    res["(L_Xg)_r"] = _max(r_block, mode)
    scale = _scale(val(dX)) * max(1.0, _scale(val(g))) + _scale(val(Xd)) * _scale(val(dg))
    for name in res:
        sc[name] = scale
    return res, sc


def _algebra_residuals(X: TensorValue, frame: NullFrame, g: TensorValue) -> tuple[dict, dict]:
    res, sc = {}, {}
    n = frame.dim
    br = lie_derivative_jets(X, frame.vector(0))
    res["[X,k] in lambda"], sc["[X,k] in lambda"] = _outside(br.values, frame, "Rk")
    mode = frame.mode
    worst, ws = _zero(mode), 0.0
    for A in range(2, n):
        b = lie_derivative_jets(X, frame.vector(A))
        r, s_ = _outside(b.values, frame, "kperp")
        worst, ws = max(worst, r), max(ws, s_)
    res["[X,m_i] in lambda perp"], sc["[X,m_i] in lambda perp"] = worst, ws
    return res, sc


def nil_killing_check(X: VectorFieldSpec, g: MetricSpec, frame=None, points=(), algebra_preserving: bool = False, mode: str = J.RATIONAL, tolerance: float = DEFAULT_TOLERANCE) -> ClassificationReport:
    """``L_X g`` of type III; with ``algebra_preserving`` also ``[X, lambda] in lambda``
    and ``[X, lambda^perp] in lambda^perp``.

    For metrics in Kundt form the coordinate normal-form clauses are always
    reported; they are required only together with ``algebra_preserving``,
    since they characterize nil-Killing fields that preserve the null line.
    """
    pts = _points(points, mode)
    rep = ClassificationReport("nil_killing", pts, mode, tolerance)
    required = ["L_Xg type III"]
    if algebra_preserving:
        required += ["[X,k] in lambda", "[X,m_i] in lambda perp"]
        if g.kundt is not None:
            required += list(NORMAL_FORM_CLAUSES)
    rep.required = required
    w_frame, w_coord = [], []
    for p in pts:
        geo = Geometry(g, p, 2, mode)
        fr = frame_at(geo, frame)
        Xj = geo.vector(X, 2)
        lxg = lie_derivative_jets(Xj, geo.metric_tensor())
        res, sc = {}, {}
        res["L_Xg type III"], sc["L_Xg type III"] = _type_residual(lxg, fr, -1)
        if algebra_preserving:
            if fr.jets is None:
                raise PreconditionError("bracket conditions need a frame field, not a frame at a point")
            r2, s2 = _algebra_residuals(Xj, fr, geo.metric_tensor())
            res.update(r2)
            sc.update(s2)
        if g.kundt is not None:
            r3, s3 = _normal_form_residuals(geo, Xj, lxg)
            res.update(r3)
            sc.update(s3)
        rep.add_point(res, sc)
        i = len(rep.residuals) - 1
        frame_names = ["L_Xg type III"] + (["[X,k] in lambda", "[X,m_i] in lambda perp"] if algebra_preserving else [])
        w_frame.append(all(rep.clause_passes(i, c) for c in frame_names))
        if g.kundt is not None and algebra_preserving:
            w_coord.append(all(rep.clause_passes(i, c) for c in NORMAL_FORM_CLAUSES))
    rep.add_witness("frame", w_frame)
    if w_coord:
        rep.add_witness("coordinate normal form", w_coord)
    return rep


# ---------------------------------------------------------------------------
# degenerate Kundt


def degenerate_kundt_check(g: MetricSpec, k: VectorFieldSpec | None = None, points=(), mode: str = J.RATIONAL, tolerance: float = DEFAULT_TOLERANCE) -> ClassificationReport:
    """``(L_k)^2 g`` of boost order <= -2 and ``(L_k)^3 g = 0``; for Kundt-form
    metrics also ``H_vvv = 0`` and ``W_i,vv = 0``."""
    pts = _points(points, mode)
    kspec = _k_default(g, k)
    pre = kundt_vector_check(kspec, g, pts, mode, tolerance)
    if not pre.verdict:
        raise PreconditionError(f"k is not a Kundt vector field: failing {pre.failing_clauses()}")
    rep = ClassificationReport("degenerate_kundt", pts, mode, tolerance)
    w_lie, w_coord = [], []
    for p in pts:
        geo = Geometry(g, p, 3, mode)
        kj = geo.vector(kspec, 3)
        frame = complete_null_frame(geo, kj.data)
        l1 = lie_derivative_jets(kj, geo.metric_tensor())
        l2 = lie_derivative_jets(kj, l1)
        l3 = lie_derivative_jets(kj, l2)
        res, sc = {}, {}
        res["(L_k)^2 g boost order <= -2"], sc["(L_k)^2 g boost order <= -2"] = _type_residual(l2, frame, -2)
        res["(L_k)^3 g = 0"] = residual_norm(l3.values)
        sc["(L_k)^3 g = 0"] = _scale(l2.values)
        if g.kundt is not None:
            kd = g.kundt
            h = geo.scalar(kd.H, 3)
            res["H_vvv"] = abs(J.Jet(geo.point, 3, mode, h).partial((0, 3) + (0,) * (geo.n - 2)))
            wv = [abs(J.Jet(geo.point, 3, mode, geo.scalar(w, 3)).partial((0, 2) + (0,) * (geo.n - 2))) for w in kd.W]
            res["W_i,vv"] = max(wv, default=_zero(mode))
            sc["H_vvv"] = sc["W_i,vv"] = _scale(geo.metric_tensor().values)
        rep.add_point(res, sc)
        i = len(rep.residuals) - 1
        w_lie.append(rep.clause_passes(i, "(L_k)^2 g boost order <= -2") and rep.clause_passes(i, "(L_k)^3 g = 0"))
        if g.kundt is not None:
            w_coord.append(rep.clause_passes(i, "H_vvv") and rep.clause_passes(i, "W_i,vv"))
    rep.add_witness("Lie derivative", w_lie)
    if w_coord:
        rep.add_witness("coordinate", w_coord)
    return rep


# ---------------------------------------------------------------------------
# tensor fields used by the algebra and stability checks


@dataclass(frozen=True)
class TensorField:
    """A covariant tensor field built from a :class:`Geometry`.

    ``loss`` is the number of metric jet orders the construction consumes.
    """

    name: str
    build: Callable[[Geometry], TensorValue]
    loss: int = 0

    def __call__(self, geo: Geometry) -> TensorValue:
        return self.build(geo)


METRIC = TensorField("g", lambda geo: geo.metric_tensor(), 0)
RIEMANN = TensorField("Rm", lambda geo: geo.riemann(), 2)
RICCI = TensorField("Ric", lambda geo: geo.ricci(), 2)


def expr_tensor(name: str, exprs, rank: int) -> TensorField:
    """Covariant tensor field from nested component expressions."""
    arr = np.empty((len(exprs),) * rank, dtype=object)
    for idx in np.ndindex(arr.shape):
        e = exprs
        for i in idx:
            e = e[i]
        arr[idx] = E.as_expr(e)
    return TensorField(name, lambda geo: geo.tensor_field(arr, "d" * rank), 0)


def du_du(n: int) -> TensorField:
    rows = [[E.ZERO] * n for _ in range(n)]
    rows[0][0] = E.ONE
    return expr_tensor("du du", rows, 2)


def resolve_tensor(t) -> TensorField:
    if isinstance(t, TensorField):
        return t
    named = {"g": METRIC, "Rm": RIEMANN, "riemann": RIEMANN, "Ric": RICCI, "ricci": RICCI}
    if t in named:
        return named[t]
    raise ShapeError(f"unknown tensor field {t!r}")


# ---------------------------------------------------------------------------
# Lie algebras


def _membership(Zj: TensorValue, geo: Geometry, frame: NullFrame, tensors, s, variant: str, kj: TensorValue) -> tuple[dict, dict]:
    res, sc = _algebra_residuals(Zj, frame, geo.metric_tensor())
    if variant == "g":
        for T in tensors:
            Tj = T(geo)
            lz = lie_derivative_jets(Zj, Tj)
            name = f"L_X {T.name} boost order <= {s}"
            res[name], sc[name] = _type_residual(lz, frame, s, geo.metric_tensor())
    else:
        lxg = lie_derivative_jets(Zj, geo.metric_tensor())
        res["L_Xg type III"], sc["L_Xg type III"] = _type_residual(lxg, frame, -1)
        l1 = lie_derivative_jets(kj, lxg)
        l2 = lie_derivative_jets(kj, l1)
        res["L_k L_X g boost order <= -2"], sc["L_k L_X g boost order <= -2"] = _type_residual(l1, frame, -2)
        res["(L_k)^2 L_X g = 0"] = residual_norm(l2.values)
        sc["(L_k)^2 L_X g = 0"] = _scale(l1.values)
    return res, sc


def lie_algebra_closure_check(X: VectorFieldSpec, Y: VectorFieldSpec, tensors=("g",), s: int = -1, g: MetricSpec | None = None, frame=None, points=(), variant: str = "g", mode: str = J.RATIONAL, tolerance: float = DEFAULT_TOLERANCE, k: VectorFieldSpec | None = None) -> ClassificationReport:
    """Membership of ``X``, ``Y`` and ``[X, Y]`` in the algebra preserving the null
    line, its orthogonal complement and the boost order ``s`` of ``tensors``.

    ``variant="h"`` uses instead the algebra of algebra-preserving nil-Killing
    fields with ``L_k L_X g`` of boost order <= -2 and ``(L_k)^2 L_X g = 0``.
    """
    if variant not in ("g", "h"):
        raise ShapeError("variant must be 'g' or 'h'")
    pts = _points(points, mode)
    fields = [resolve_tensor(t) for t in tensors]
    loss = max((T.loss for T in fields), default=0)
    order = 4 if variant == "h" else 3 + loss
    rep = ClassificationReport(f"lie_algebra_closure[{variant}]", pts, mode, tolerance)
    for p in pts:
        geo = Geometry(g, p, order, mode)
        fr = frame_at(geo, frame, k)
        kj = TensorValue(fr.jets[0], "u", geo.n, geo.point)
        Xj = geo.vector(X, order)
        Yj = geo.vector(Y, order)
        for name, Zj in (("X", Xj), ("Y", Yj)):
            r, s_ = _membership(Zj, geo, fr, fields, s, variant, kj)
            tmp = ClassificationReport("pre", [p], mode, tolerance)
            tmp.add_point(r, s_)
            if not tmp.verdict:
                raise PreconditionError(f"field {name} ({(X if name == 'X' else Y).name or name}) is not a member at {p}: failing {tmp.failing_clauses()}")
        Zj = lie_derivative_jets(Xj, Yj)
        res, sc = _membership(Zj, geo, fr, fields, s, variant, kj)
        rep.add_point(res, sc)
    return rep


# ---------------------------------------------------------------------------
# stability of algebraic type


def _frame_component_jets(T: TensorValue, frame: NullFrame) -> np.ndarray:
    n = frame.dim
    d = min(T.order, frame.order)
    comp = T.truncate(d).data
    ej = J.truncate(frame.jets, n, d)
    for _ in range(T.rank):
        comp = jtensordot(comp, ej, ([0], [1]), n)
    return comp


def algebraic_stability_check(T, g: MetricSpec, k: VectorFieldSpec | None = None, s: int = 0, m_max: int = 2, points=(), mode: str = J.RATIONAL, tolerance: float = DEFAULT_TOLERANCE, j_max: int | None = None, check_degenerate: bool = True) -> ClassificationReport:
    """Side i) ``(L_k)^j T`` of boost order <= s - j for ``j <= j_max`` and side ii)
    ``nabla^m T`` of boost order <= s for ``m <= m_max``, with the frame component
    criterion (``k^j`` kills every weight ``s + 1 - j`` component) as a third witness.
    """
    pts = _points(points, mode)
    Tf = resolve_tensor(T)
    j_max = m_max + 1 if j_max is None else j_max
    if check_degenerate:
        pre = degenerate_kundt_check(g, k, pts, mode, tolerance)
        if not pre.verdict:
            raise PreconditionError(f"metric is not degenerate Kundt: failing {pre.failing_clauses()}")
    kspec = _k_default(g, k)
    order = max(j_max, m_max) + Tf.loss
    order = max(order, j_max + 1)
    rep = ClassificationReport(f"algebraic_stability[{Tf.name}, s={s}]", pts, mode, tolerance)
    wi, wii, wc = [], [], []
    for p in pts:
        geo = Geometry(g, p, order, mode)
        frame = build_kundt_frame(geo) if (k is None and g.kundt is not None) else complete_null_frame(geo, geo.vector(kspec, order).data)
        kj = TensorValue(frame.jets[0], "u", geo.n, geo.point)
        Tj = Tf(geo)
        res, sc = {}, {}
        side_i, side_ii = [], []
        cur = Tj
        for j in range(j_max + 1):
            name = f"(L_k)^{j} T boost order <= {s - j}"
            res[name], sc[name] = _type_residual(cur, frame, s - j, geo.metric_tensor())
            side_i.append(name)
            if j < j_max:
                cur = lie_derivative_jets(kj, cur)
        cur = Tj
        for m in range(m_max + 1):
            name = f"nabla^{m} T boost order <= {s}"
            res[name], sc[name] = _type_residual(cur, frame, s, geo.metric_tensor())
            side_ii.append(name)
            if m < m_max:
                cur = geo.cov_derivative(cur)
        comp = _frame_component_jets(Tj, frame)
        grid = weight_grid(Tj.rank, geo.n)
        comp_names = []
        for j in range(1, j_max + 1):
            mask = grid == s + 1 - j
            name = f"k^{j} of weight {s + 1 - j} components"
            if np.any(mask):
                der = repeated_directional(frame.jets[0], comp, j, geo.n)
                res[name] = _max([der[idx + (0,)] for idx in zip(*np.nonzero(mask))], mode)
            else:
                res[name] = _zero(mode)
            sc[name] = _scale(comp[..., 0])
            comp_names.append(name)
        comp_names.append(side_i[0])
        rep.add_point(res, sc)
        i = len(rep.residuals) - 1
        wi.append(all(rep.clause_passes(i, c) for c in side_i))
        wii.append(all(rep.clause_passes(i, c) for c in side_ii))
        wc.append(all(rep.clause_passes(i, c) for c in comp_names))
    rep.add_witness("side i (L_k)^j", wi)
    rep.add_witness("side ii nabla^m", wii)
    rep.add_witness("component criterion", wc)
    return rep


# ---------------------------------------------------------------------------
# transverse Killing equation


def transverse_killing_residual(C, A, gt, coords, points, mode: str = J.RATIONAL, tolerance: float = DEFAULT_TOLERANCE) -> ClassificationReport:
    """Residuals ``C^k d_k gt_ij + gt_jk d_i C^k + gt_ik d_j C^k + A d_u gt_ij``.

    ``coords = (u, v, x^1, ...)``; ``C`` and ``gt`` live on the transverse block.
    Each point records the residual of every ``(i, j)`` pair.
    """
    pts = _points(points, mode)
    m = len(C)
    if len(gt) != m or any(len(r) != m for r in gt) or len(coords) != m + 2:
        raise ShapeError("C, gt and coordinates have inconsistent sizes")
    n = m + 2
    rep = ClassificationReport("transverse_killing", pts, mode, tolerance)
    for p in pts:
        cj = E.eval_many([E.as_expr(c) for c in C], p, 1, mode)
        aj = E.eval_jet(E.as_expr(A), p, 1, mode).coeffs
        gj = E.eval_many([[E.as_expr(x) for x in r] for r in gt], p, 1, mode)
        dC = J.gradient(cj, n)[..., 0]  # [a, k]
        dg = J.gradient(gj, n)[..., 0]  # [a, i, j]
        cv, gv = cj[..., 0], gj[..., 0]
        res, sc = {}, {}
        for i in range(m):
            for j in range(m):
                t = sum(cv[k] * dg[2 + k, i, j] + gv[j, k] * dC[2 + i, k] + gv[i, k] * dC[2 + j, k] for k in range(m))
                t = t + aj[0] * dg[0, i, j]
                res[f"Ceq[{i + 1},{j + 1}]"] = abs(t)
                sc[f"Ceq[{i + 1},{j + 1}]"] = _scale(gv) * max(_scale(dC), _scale(cv))
        rep.add_point(res, sc)
    return rep
