"""Null frames ``(k, l, m_1, ..., m_{n-2})`` and the degenerate Kundt frame conditions.

Frames carry their vectors both as plain values (``matrix``) and, when built
from jets, as jet-valued vector fields (``jets``) so that Lie derivatives along
``k`` and derivatives of connection coefficients can be taken.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import jet as J
from .errors import JetOrderError, ModeError, PreconditionError, ShapeError
from .geometry import Geometry, MetricSpec, lie_derivative_jets
from .report import DEFAULT_TOLERANCE, ClassificationReport
from .tensor import (
    TensorValue,
    boost_order,
    jet_matrix_inverse,
    jtensordot,
    lower_all,
    matrix_inverse,
    slot_weights,
    tensor_product,
)

# metric jet order used by the frame checks: (L_k)^3 of frame vectors needs 3
# orders, k^4 applied to the weight -3 connection coefficients needs 5
FRAME_CHECK_ORDER = 5


@dataclass(frozen=True, eq=False)
class NullFrame:
    """Null frame at ``point``; ``matrix[A]`` holds the coordinate components of ``e_A``."""

    point: tuple
    matrix: np.ndarray
    jets: np.ndarray | None = None
    normalized: bool = True

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def k(self) -> np.ndarray:
        return self.matrix[0]

    @property
    def l(self) -> np.ndarray:  # noqa: E743
        return self.matrix[1]

    @property
    def m(self) -> np.ndarray:
        return self.matrix[2:]

    @cached_property
    def coframe(self) -> np.ndarray:
        """``coframe[A, a]``: the dual one-forms, ``coframe @ matrix.T == 1``."""
        return matrix_inverse(self.matrix).T

    @property
    def mode(self) -> str:
        return J.array_mode(self.matrix)

    @property
    def order(self) -> int:
        if self.jets is None:
            return 0
        return J.order_of(self.dim, self.jets.shape[-1])

    def vector(self, A: int, order: int | None = None) -> TensorValue:
        if self.jets is None:
            data = self.matrix[A][..., None]
        else:
            data = J.truncate(self.jets[A], self.dim, self.order if order is None else order)
        return TensorValue(data, "u", self.dim, self.point)

    def components(self, vec: np.ndarray) -> np.ndarray:
        """Frame components of a vector given by coordinate values."""
        return self.coframe @ vec if vec.dtype != object else np.dot(self.coframe, vec)

    def null_residuals(self, g: np.ndarray) -> dict:
        """Deviations from the null-frame pairings under the metric values ``g``."""
        gram = self.matrix @ g @ self.matrix.T if g.dtype != object else np.dot(np.dot(self.matrix, g), self.matrix.T)
        n = self.dim
        target = J.zeros((n, n), self.mode)
        target[0, 1] = target[1, 0] = 1
        for i in range(2, n):
            target[i, i] = 1 if self.normalized else gram[i, i]
        diff = gram - target
        return {
            "g(k,k)": abs(diff[0, 0]),
            "g(l,l)": abs(diff[1, 1]),
            "g(k,l)-1": abs(diff[0, 1]),
            "g(k,m)": max((abs(x) for x in diff[0, 2:]), default=0 * diff[0, 0]),
            "g(l,m)": max((abs(x) for x in diff[1, 2:]), default=0 * diff[0, 0]),
            "g(m,m)-1": max((abs(x) for x in diff[2:, 2:].reshape(-1)), default=0 * diff[0, 0]),
        }


def _frame_from_jets(point, jets: np.ndarray, normalized: bool = True) -> NullFrame:
    return NullFrame(point, jets[..., 0].copy(), jets, normalized)


def _unit(w: np.ndarray, norm2: np.ndarray, n: int, strict: bool):
    """``w / sqrt(norm2)``; in rational mode an irrational root leaves ``w`` unscaled.

    Boost weights only need the ``m_i`` to span the screen space, so an
    orthogonal but unnormalized vector is still usable for classification.
    """
    try:
        return J.mul(w, J.reciprocal(J.sqrt(norm2, n), n)[None, :], n), True
    except ModeError:
        if strict:
            raise
        return w, False


def _inner(u: np.ndarray, v: np.ndarray, gt: np.ndarray, n: int) -> np.ndarray:
    return jtensordot(u, jtensordot(gt, v, ([1], [0]), n), ([0], [0]), n)


def build_kundt_frame(geo: Geometry, strict: bool = False) -> NullFrame:
    """Kundt frame at ``geo.point`` with jets of the metric's order.

    ``k = d_v``; ``m_i`` is Gram-Schmidt of ``d_i`` under the transverse metric
    (declaration order, positive normalization); ``l = d_u + a d_v + b^i d_i``
    with ``b = -gt^-1 W`` and ``a = -H + 1/2 W gt^-1 W``.  In rational mode a
    non-square norm leaves that ``m_i`` unnormalized (``normalized=False``)
    unless ``strict`` is set, in which case :class:`ModeError` is raised.
    """
    if geo.metric.kundt is None:
        raise PreconditionError("metric has no Kundt form declared")
    n = geo.n
    g = geo.metric_tensor().data
    if not (J.is_zero_array(g[1, 1]) and J.is_zero_array(g[1, 2:]) and J.is_zero_array(g[0, 1][1:]) and g[0, 1][0] == 1):
        raise PreconditionError("metric is not in Kundt form (need g_vv = g_vi = 0, g_uv = 1)")
    mode = geo.mode
    half = J.mpq(1, 2) if mode == J.RATIONAL else 0.5
    gt = g[2:, 2:]
    W = g[0, 2:]
    H = g[0, 0] * half
    M = g.shape[-1]
    d = geo.order

    one = J.constant(1 if mode == J.FLOAT else J.mpq(1), n, d, mode)
    ms = []
    normalized = True
    for i in range(n - 2):
        w = J.zeros((n - 2, M), mode)
        w[i] = one
        for mj in ms:
            w = w - J.mul(_inner(w, mj, gt, n)[None, :], mj, n)
        norm2 = _inner(w, w, gt, n)
        if not norm2[0] > 0:
            raise PreconditionError("transverse metric is not positive definite")
        mi, ok = _unit(w, norm2, n, strict)
        normalized = normalized and ok
        ms.append(mi)

    if n > 2:
        gtinv = jet_matrix_inverse(gt, n)
        b = -jtensordot(gtinv, W, ([1], [0]), n)
        a = -H + half * jtensordot(W, jtensordot(gtinv, W, ([1], [0]), n), ([0], [0]), n)
    else:
        b = J.zeros((0, M), mode)
        a = -H

    jets = J.zeros((n, n, M), mode)
    jets[0, 1] = one
    jets[1, 0] = one
    jets[1, 1] = a
    jets[1, 2:] = b
    for i, mi in enumerate(ms):
        jets[2 + i, 2:] = mi
    return _frame_from_jets(geo.point, jets, normalized)


def complete_null_frame(geo: Geometry, k: np.ndarray, strict: bool = False) -> NullFrame:
    """Complete a null vector field ``k`` (an ``(n, M)`` jet array) to a null frame.

    ``l`` starts from the first coordinate vector pairing non-trivially with
    ``k``; the ``m_i`` come from Gram-Schmidt of the remaining coordinate
    vectors projected onto the complement of ``span(k, l)``.
    """
    n = geo.n
    mode = geo.mode
    g = geo.metric_tensor().data
    d = min(J.order_of(n, k.shape[-1]), geo.order)
    g = J.truncate(g, n, d)
    k = J.truncate(k, n, d)
    M = k.shape[-1]

    def ip(x, y):
        return _inner(x, y, g, n)

    kk = ip(k, k)
    if not J.is_zero_array(kk[..., 0]):
        raise PreconditionError("k is not null at the point")
    basis = []
    for a in range(n):
        e = J.zeros((n, M), mode)
        e[a, 0] = 1
        basis.append(e)
    pairing = [ip(e, k)[0] for e in basis]
    start = next((a for a in range(n) if pairing[a] != 0), None)
    if start is None:
        raise PreconditionError("k is zero")
    l0 = J.mul(basis[start], J.reciprocal(ip(basis[start], k), n)[None, :], n)
    half = J.mpq(1, 2) if mode == J.RATIONAL else 0.5
    l = l0 - J.mul(k, (half * ip(l0, l0))[None, :], n)
    ms = []
    normalized = True
    for a in range(n):
        w = basis[a] - J.mul(l, ip(basis[a], k)[None, :], n) - J.mul(k, ip(basis[a], l)[None, :], n)
        for mj in ms:
            w = w - J.mul(mj, ip(w, mj)[None, :], n)
        norm2 = ip(w, w)
        if mode == J.RATIONAL:
            if norm2[0] == 0:
                continue
        elif abs(norm2[0]) < 1e-12:
            continue
        if norm2[0] < 0:
            raise PreconditionError("metric is not Lorentzian")
        mi, ok = _unit(w, norm2, n, strict)
        normalized = normalized and ok
        ms.append(mi)
        if len(ms) == n - 2:
            break
    if len(ms) != n - 2:
        raise PreconditionError("could not complete the null frame")
    jets = np.stack([k, l] + ms)
    return _frame_from_jets(geo.point, jets, normalized)


def constant_frame(point, matrix, mode: str) -> NullFrame:
    m = np.array(matrix, dtype=object)
    conv = J.zeros(m.shape, mode)
    for idx in np.ndindex(m.shape):
        conv[idx] = J.to_scalar(m[idx], mode)
    return NullFrame(tuple(J.to_scalar(x, mode) for x in point), conv)


@dataclass(frozen=True)
class FrameField:
    """Frame vector fields ``(k, l, m_1, ...)`` given as field specs."""

    vectors: tuple

    def at(self, geo: Geometry, order: int | None = None) -> NullFrame:
        d = geo.order if order is None else order
        jets = np.stack([v.jets(geo.point, d, geo.mode) for v in self.vectors])
        if jets.shape[0] != geo.n:
            raise ShapeError(f"frame has {jets.shape[0]} vectors, need {geo.n}")
        return _frame_from_jets(geo.point, jets)


class KundtFrameField:
    """The frame of :func:`build_kundt_frame`, viewed as a frame field."""

    def at(self, geo: Geometry, order: int | None = None) -> NullFrame:
        return build_kundt_frame(geo)


# ---------------------------------------------------------------------------
# derivatives along frame vectors


def directional(X: np.ndarray, f: np.ndarray, n: int) -> np.ndarray:
    """``X(f) = X^a d_a f`` for a vector jet ``X`` and jets ``f`` of any shape."""
    grad = J.gradient(f, n)
    d = J.order_of(n, grad.shape[-1])
    return jtensordot(J.truncate(X, n, min(d, J.order_of(n, X.shape[-1]))), grad, ([0], [0]), n)


def repeated_directional(X: np.ndarray, f: np.ndarray, j: int, n: int) -> np.ndarray:
    for _ in range(j):
        f = directional(X, f, n)
    return f


def connection_coefficients(frame: NullFrame, geo: Geometry) -> np.ndarray:
    """``Gamma_{ABC} = g(e_A, nabla_{e_C} e_B)`` as jets, indexed ``[A, B, C]``."""
    if frame.jets is None or frame.order < 1:
        raise JetOrderError("connection coefficients need frame jets of order >= 1")
    n = geo.n
    e = frame.jets
    gam = geo.christoffel().data  # [a, c, d]
    d = min(frame.order - 1, J.order_of(n, gam.shape[-1]))
    de = J.truncate(J.gradient(e, n), n, d)  # [c, B, a] = d_c e_B^a
    et = J.truncate(e, n, d)
    gd = J.truncate(gam, n, d)
    # (nabla_c e_B)^a = d_c e_B^a + Gamma^a_cd e_B^d, indexed [c, B, a]
    cov = de + np.transpose(jtensordot(gd, et, ([2], [1]), n), (1, 2, 0, 3))
    along = jtensordot(et, cov, ([1], [0]), n)  # [C, B, a]
    g = J.truncate(geo.metric_tensor().data, n, d)
    low = jtensordot(along, g, ([2], [0]), n)  # [C, B, b]
    out = jtensordot(et, low, ([1], [2]), n)  # [A, C, B]
    return np.transpose(out, (0, 2, 1, 3))


def _outside(vec_values: np.ndarray, frame: NullFrame, target: str):
    """Size of the part of a vector outside ``k^perp``, ``R k`` or ``{0}``."""
    comp = frame.components(vec_values)  # coefficients along (k, l, m_i)
    if target == "kperp":
        parts = [comp[1]]
    elif target == "Rk":
        parts = list(comp[1:])
    else:
        parts = list(comp)
    return max((abs(x) for x in parts), default=abs(comp[0] * 0))


def bracket_residuals(frame: NullFrame) -> dict:
    """Residuals of the bracket conditions on a jet-valued frame."""
    n = frame.dim
    if frame.order < 3:
        raise JetOrderError("bracket conditions need frame jets of order >= 3")
    k = frame.vector(0)
    l = frame.vector(1)
    out = {}
    r = 0 * frame.matrix[0, 0]
    for i in range(2, n):
        for j in range(2, n):
            br = lie_derivative_jets(frame.vector(i), frame.vector(j))
            r = max(r, _outside(br.values, frame, "kperp"))
    out["[m_i,m_j] in k^perp"] = abs(r)
    l1 = lie_derivative_jets(k, l)
    l2 = lie_derivative_jets(k, l1)
    l3 = lie_derivative_jets(k, l2)
    out["L_k l in k^perp"] = _outside(l1.values, frame, "kperp")
    out["(L_k)^2 l in Rk"] = _outside(l2.values, frame, "Rk")
    out["(L_k)^3 l = 0"] = _outside(l3.values, frame, "zero")
    r1 = r2 = 0 * frame.matrix[0, 0]
    for i in range(2, n):
        m1 = lie_derivative_jets(k, frame.vector(i))
        m2 = lie_derivative_jets(k, m1)
        r1 = max(r1, _outside(m1.values, frame, "Rk"))
        r2 = max(r2, _outside(m2.values, frame, "zero"))
    out["L_k m_i in Rk"] = abs(r1)
    out["(L_k)^2 m_i = 0"] = abs(r2)
    return out


def connection_residuals(frame: NullFrame, geo: Geometry) -> dict:
    """Residuals of the two connection-coefficient conditions."""
    n = geo.n
    G = connection_coefficients(frame, geo)
    w = slot_weights(n)
    weight = w[:, None, None] + w[None, :, None] + w[None, None, :]
    zero = 0 * frame.matrix[0, 0]
    pos = zero
    for idx in zip(*np.nonzero(weight > 0)):
        pos = max(pos, abs(G[idx + (0,)]))
    k = frame.jets[0]
    avail = J.order_of(n, G.shape[-1])
    out = {"Gamma positive weight": pos}
    for s in range(0, 4):
        mask = weight == -s
        if not np.any(mask):
            continue
        if s + 1 > avail:
            raise JetOrderError(f"k^{s + 1} of connection coefficients needs more jet orders")
        deriv = repeated_directional(k, G, s + 1, n)
        r = zero
        for idx in zip(*np.nonzero(mask)):
            r = max(r, abs(deriv[idx + (0,)]))
        out[f"k^{s + 1} Gamma at weight {-s}"] = r
    return out


def degenerate_frame_check(F, g: MetricSpec, points, mode: str = J.RATIONAL, tolerance: float = DEFAULT_TOLERANCE) -> ClassificationReport:
    """Evaluate the bracket conditions and the connection-coefficient conditions.

    ``F`` is a :class:`FrameField`, a :class:`KundtFrameField` or ``None`` for the
    Kundt frame.  The report carries a witness per formulation.
    """
    F = F or KundtFrameField()
    rep = ClassificationReport("degenerate_frame", [tuple(p) for p in points], mode, tolerance)
    bracket_ok, conn_ok = [], []
    bracket_names = conn_names = None
    for p in points:
        geo = Geometry(g, p, FRAME_CHECK_ORDER, mode)
        frame = F.at(geo)
        res = dict(frame.null_residuals(geo.metric_tensor().values))
        br = bracket_residuals(frame)
        cn = connection_residuals(frame, geo)
        res.update(br)
        res.update(cn)
        rep.add_point(res)
        bracket_names, conn_names = list(br), list(cn)
        i = len(rep.residuals) - 1
        bracket_ok.append(all(rep.clause_passes(i, k) for k in bracket_names))
        conn_ok.append(all(rep.clause_passes(i, k) for k in conn_names))
    rep.add_witness("brackets", bracket_ok)
    rep.add_witness("connection", conn_ok)
    return rep


def coframe_jets(frame: NullFrame) -> np.ndarray:
    """Dual one-forms as jets, ``[A, a]``."""
    inv = jet_matrix_inverse(frame.jets, frame.dim)  # [a, A]
    return np.transpose(inv, (1, 0, 2))


def lie_k_monomial_orders(frame: NullFrame, geo: Geometry, slots, j_max: int = 3, covariant: bool = False) -> list:
    """Boost orders of ``(L_k)^j`` of a product of frame or coframe elements, ``j = 0..j_max``.

    Contravariant products are lowered with the metric before measuring.
    """
    n = frame.dim
    if frame.order < j_max:
        raise JetOrderError("need frame jets of order >= j_max")
    if covariant:
        cof = coframe_jets(frame)
        elems = [TensorValue(cof[A], "d", n, frame.point) for A in range(n)]
    else:
        elems = [frame.vector(A) for A in range(n)]
    T = elems[slots[0]]
    for s in slots[1:]:
        T = tensor_product(T, elems[s])
    kvec = frame.vector(0)
    g = geo.metric_tensor()
    out = []
    for j in range(j_max + 1):
        out.append(boost_order(lower_all(T.value_tensor(), g.value_tensor()), frame))
        if j < j_max:
            T = lie_derivative_jets(kvec, T)
    return out


def monomial_weight(slots, covariant: bool = False) -> int:
    """Boost weight of a frame/coframe monomial in the component convention."""
    w = {0: 1, 1: -1}
    if covariant:
        return sum(w.get(A, 0) for A in slots)
    # a lowered k is the coframe element dual to l and vice versa
    return sum(-w.get(A, 0) for A in slots)
