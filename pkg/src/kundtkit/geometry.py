"""Metrics in coordinates and their curvature at a point, computed through jets.

Conventions:

* ``Gamma^a_bc = 1/2 g^ad (d_b g_dc + d_c g_db - d_d g_bc)``
* ``R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb``
* ``R_ab = R^c_acb``
* ``nabla^m Rm`` keeps derivative slots first: ``nabla_f nabla_e R_abcd`` is stored
  at ``[f, e, a, b, c, d]``.

Each derivative of a jet costs one order, so ``nabla^m Rm`` at output order ``e``
needs metric jets of order ``m + 2 + e``.  :class:`Geometry` is built for a fixed
metric order and raises :class:`JetOrderError` when asked for more.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import expr as E
from . import jet as J
from .errors import JetOrderError, PreconditionError, ShapeError, SingularMetricError
from .tensor import (
    TensorValue,
    determinant,
    jet_matrix_inverse,
    jtensordot,
    raise_lower,
)


@dataclass(frozen=True)
class DegenerateParts:
    """``H = v^2 H2 + v H1 + H0`` and ``W_i = v W1_i + W0_i``; all parts free of ``v``."""

    H2: E.Expr
    H1: E.Expr
    H0: E.Expr
    W1: tuple
    W0: tuple


@dataclass(frozen=True)
class KundtForm:
    """``g = 2 du (dv + H du + W_i dx^i) + gt_ij dx^i dx^j`` with coordinates ``(u, v, x...)``."""

    H: E.Expr
    W: tuple
    gt: tuple  # tuple of tuples of Expr, symmetric
    degenerate: DegenerateParts | None = None

    @classmethod
    def from_degenerate(cls, parts: DegenerateParts, gt, coords: Sequence[str]) -> "KundtForm":
        v = E.coordinate(coords[1], coords)
        H = v**2 * parts.H2 + v * parts.H1 + parts.H0
        W = tuple(v * w1 + w0 for w1, w0 in zip(parts.W1, parts.W0))
        return cls(H, W, tuple(tuple(r) for r in gt), parts)

    @property
    def transverse_dim(self) -> int:
        return len(self.W)


@dataclass(frozen=True)
class MetricSpec:
    coords: tuple
    components: tuple  # n x n tuple of Expr
    kundt: KundtForm | None = None
    name: str = ""

    def __post_init__(self):
        n = len(self.coords)
        if len(self.components) != n or any(len(r) != n for r in self.components):
            raise ShapeError(f"metric needs {n}x{n} components")
        for a in range(n):
            for b in range(a):
                if self.components[a][b] != self.components[b][a]:
                    raise ShapeError(f"metric components ({a},{b}) and ({b},{a}) differ")

    @property
    def dim(self) -> int:
        return len(self.coords)

    @classmethod
    def from_components(cls, coords, comps, name: str = "") -> "MetricSpec":
        coords = tuple(coords)
        n = len(coords)
        rows = [[E.ZERO] * n for _ in range(n)]
        for a in range(n):
            for b in range(n):
                c = comps[a][b]
                rows[a][b] = c if isinstance(c, E.Expr) else E.parse(str(c), coords)
        return cls(coords, tuple(tuple(r) for r in rows), None, name)

    @classmethod
    def from_kundt(cls, coords, kundt: KundtForm, name: str = "") -> "MetricSpec":
        coords = tuple(coords)
        n = len(coords)
        if n != kundt.transverse_dim + 2:
            raise ShapeError(f"Kundt form with {kundt.transverse_dim} transverse coordinates needs {kundt.transverse_dim + 2} coordinates")
        rows = [[E.ZERO] * n for _ in range(n)]
        rows[0][1] = rows[1][0] = E.ONE
        rows[0][0] = 2 * kundt.H
        for i, w in enumerate(kundt.W):
            rows[0][i + 2] = rows[i + 2][0] = w
        for i in range(n - 2):
            for j in range(n - 2):
                rows[i + 2][j + 2] = kundt.gt[i][j]
        return cls(coords, tuple(tuple(r) for r in rows), kundt, name)

    def expr_array(self) -> np.ndarray:
        out = np.empty((self.dim, self.dim), dtype=object)
        for a in range(self.dim):
            for b in range(self.dim):
                out[a, b] = self.components[a][b]
        return out

    def is_rational(self) -> bool:
        return all(E.is_rational(c) for r in self.components for c in r)


@dataclass(frozen=True)
class VectorFieldSpec:
    """A vector field by components, or by the nil-Killing normal form ``(A, B, C)``.

    The normal form stands for ``A d_u + (-v A'(u) + B) d_v + C^i d_i``.
    """

    components: tuple | None = None
    A: E.Expr | None = None
    B: E.Expr | None = None
    C: tuple | None = None
    name: str = ""

    def __post_init__(self):
        if (self.components is None) == (self.A is None):
            raise ShapeError("give either components or a normal form (A, B, C)")

    @property
    def is_normal_form(self) -> bool:
        return self.A is not None

    @classmethod
    def normal_form(cls, A, B, C, name: str = "") -> "VectorFieldSpec":
        return cls(None, E.as_expr(A), E.as_expr(B), tuple(E.as_expr(c) for c in C), name)

    @classmethod
    def from_components(cls, comps, name: str = "") -> "VectorFieldSpec":
        return cls(tuple(E.as_expr(c) for c in comps), name=name)

    def jets(self, point, order: int, mode: str) -> np.ndarray:
        """Components as an ``(n, M)`` jet array."""
        n = len(point)
        if self.components is not None:
            if len(self.components) != n:
                raise ShapeError(f"vector field has {len(self.components)} components, chart has {n}")
            return E.eval_many(list(self.components), point, order, mode)
        if len(self.C) != n - 2:
            raise ShapeError(f"normal form needs {n - 2} transverse components")
        a_hi = E.eval_jet(self.A, point, order + 1, mode).coeffs
        a = J.truncate(a_hi, n, order)
        a_u = J.diff(a_hi, 0, n)
        v = J.variable(1, tuple(J.to_scalar(x, mode) for x in point), order, mode)
        b = E.eval_jet(self.B, point, order, mode).coeffs
        out = J.zeros((n, J.jet_size(n, order)), mode)
        out[0] = a
        out[1] = b - J.mul(v, a_u, n)
        out[2:] = E.eval_many(list(self.C), point, order, mode)
        return out

    def component_exprs(self, coords) -> tuple:
        """Explicit components; only available for the component form."""
        if self.components is None:
            raise PreconditionError("normal-form field has no explicit component expressions")
        return self.components


class Geometry:
    """Curvature data of ``metric`` at ``point`` from metric jets of order ``order``.

    Results are memoized on the instance; build one per (metric, point) task.
    """

    def __init__(self, metric: MetricSpec, point, order: int, mode: str = J.RATIONAL):
        if len(point) != metric.dim:
            raise ShapeError(f"point has {len(point)} coordinates, metric has {metric.dim}")
        self.metric = metric
        self.mode = mode
        self.order = order
        self.n = metric.dim
        self.point = tuple(J.to_scalar(x, mode) for x in point)
        data = E.eval_many(metric.expr_array(), self.point, order, mode)
        det = determinant(data[..., 0])
        if det == 0:
            raise SingularMetricError(f"metric is degenerate at {self.point}")
        self._g = TensorValue(data, "dd", self.n, self.point)
        self._cache: dict = {}

    # -- helpers ----------------------------------------------------------
    def _need(self, needed: int, what: str):
        if needed > self.order:
            raise JetOrderError(f"{what} needs metric jets of order {needed}, have {self.order}")

    def tensor(self, data: np.ndarray, variance: str) -> TensorValue:
        return TensorValue(data, variance, self.n, self.point)

    def scalar(self, e: E.Expr, order: int | None = None) -> np.ndarray:
        return E.eval_jet(e, self.point, self.order if order is None else order, self.mode).coeffs

    def tensor_field(self, exprs, variance: str, order: int | None = None) -> TensorValue:
        d = self.order if order is None else order
        return self.tensor(E.eval_many(exprs, self.point, d, self.mode), variance)

    def vector(self, X: VectorFieldSpec, order: int | None = None) -> TensorValue:
        d = self.order if order is None else order
        return self.tensor(X.jets(self.point, d, self.mode), "u")

    # -- metric -----------------------------------------------------------
    def metric_tensor(self) -> TensorValue:
        return self._g

    def inverse(self) -> TensorValue:
        if "ginv" not in self._cache:
            self._cache["ginv"] = self.tensor(jet_matrix_inverse(self._g.data, self.n), "uu")
        return self._cache["ginv"]

    def christoffel_lowered(self) -> TensorValue:
        """``Gamma_dbc`` (first slot lowered), order ``D - 1``."""
        self._need(1, "Christoffel symbols")
        if "gam_low" not in self._cache:
            dg = J.gradient(self._g.data, self.n)  # dg[e, a, b] = d_e g_ab
            # d_b g_dc + d_c g_db - d_d g_bc, indexed [d, b, c]
            t = np.transpose(dg, (1, 0, 2, 3)) + np.transpose(dg, (1, 2, 0, 3)) - dg
            half = J.mpq(1, 2) if self.mode == J.RATIONAL else 0.5
            self._cache["gam_low"] = self.tensor(t * half, "ddd")
        return self._cache["gam_low"]

    def christoffel(self) -> TensorValue:
        """``Gamma^a_bc`` as a ``udd`` tensor of order ``D - 1``."""
        if "gam" not in self._cache:
            low = self.christoffel_lowered()
            self._cache["gam"] = self.tensor(jtensordot(self.inverse().data, low.data, ([1], [0]), self.n), "udd")
        return self._cache["gam"]

    def riemann_up(self) -> TensorValue:
        """``R^a_bcd`` of order ``D - 2``."""
        self._need(2, "the Riemann tensor")
        if "Rup" not in self._cache:
            gam = self.christoffel().data
            dgam = J.gradient(gam, self.n)  # [c, a, d, b] = d_c Gamma^a_db
            t1 = np.transpose(dgam, (1, 3, 0, 2, 4))
            t2 = np.transpose(dgam, (1, 3, 2, 0, 4))
            gg = jtensordot(gam, gam, ([2], [0]), self.n)  # [a, c, d, b] = Gamma^a_ce Gamma^e_db
            t3 = np.transpose(gg, (0, 3, 1, 2, 4))
            t4 = np.transpose(gg, (0, 3, 2, 1, 4))
            d = J.jet_size(self.n, self.order - 2)
            data = t1 - t2 + t3[..., :d] - t4[..., :d]
            self._cache["Rup"] = self.tensor(data, "uddd")
        return self._cache["Rup"]

    def riemann(self) -> TensorValue:
        """``R_abcd`` (all covariant) of order ``D - 2``."""
        if "R" not in self._cache:
            up = self.riemann_up()
            self._cache["R"] = raise_lower(up, 0, self._g, self.inverse())
        return self._cache["R"]

    def ricci(self) -> TensorValue:
        if "Ric" not in self._cache:
            up = self.riemann_up()
            self._cache["Ric"] = self.tensor(_trace02(up.data), "dd")
        return self._cache["Ric"]

    def ricci_scalar(self) -> np.ndarray:
        """Ricci scalar as a jet of order ``D - 2``."""
        if "Rs" not in self._cache:
            ric = self.ricci()
            ginv = self.inverse().data
            self._cache["Rs"] = jtensordot(ginv, ric.data, ([0, 1], [0, 1]), self.n)
        return self._cache["Rs"]

    def nabla_riemann(self, m: int) -> TensorValue:
        """``nabla^m Rm`` with derivative slots first; order ``D - 2 - m``."""
        self._need(m + 2, f"nabla^{m} Rm")
        key = ("nablaR", m)
        if key not in self._cache:
            if m == 0:
                self._cache[key] = self.riemann()
            else:
                self._cache[key] = self.cov_derivative(self.nabla_riemann(m - 1))
        return self._cache[key]

    # -- derivatives of fields --------------------------------------------
    def cov_derivative(self, T: TensorValue) -> TensorValue:
        """``nabla T`` with the derivative slot first; costs one jet order."""
        if T.order < 1:
            raise JetOrderError("covariant derivative needs a tensor field with jets of order >= 1")
        gam = self.christoffel()
        d = min(T.order - 1, gam.order)
        out = J.truncate(J.gradient(T.data, self.n), self.n, d)
        Tt = J.truncate(T.data, self.n, d)
        gd = J.truncate(gam.data, self.n, d)
        r = T.rank
        for s, c in enumerate(T.variance):
            if c == "d":
                # Gamma^f_{e a} T_{..f..}
                term = jtensordot(gd, Tt, ([0], [s]), self.n)  # [e, a, rest]
                perm = [0] + list(range(2, s + 2)) + [1] + list(range(s + 2, r + 1)) + [r + 1]
                out = out - np.transpose(term, perm)
            else:
                # Gamma^b_{e f} T^{..f..}
                term = jtensordot(gd, Tt, ([2], [s]), self.n)  # [b, e, rest]
                perm = [1] + list(range(2, s + 2)) + [0] + list(range(s + 2, r + 1)) + [r + 1]
                out = out + np.transpose(term, perm)
        return self.tensor(out, "d" + T.variance)

    def lie_derivative(self, X: TensorValue, T: TensorValue) -> TensorValue:
        return lie_derivative_jets(X, T)

    def lie_bracket(self, X: TensorValue, Y: TensorValue) -> TensorValue:
        """``[X, Y]^a = X^e d_e Y^a - Y^e d_e X^a``."""
        return lie_derivative_jets(X, Y)


def lie_derivative_jets(X: TensorValue, T: TensorValue) -> TensorValue:
    """Lie derivative of ``T`` along the vector field ``X`` (both as jets).

    Costs one jet order; no metric is involved.
    """
    if X.variance != "u":
        raise ShapeError("X must be a vector (variance 'u')")
    if T.order < 1 or X.order < 1:
        raise JetOrderError("Lie derivative needs jets of order >= 1")
    n = X.nvars
    d = min(T.order - 1, X.order - 1)
    Xd = J.truncate(X.data, n, d)
    dX = J.truncate(J.gradient(X.data, n), n, d)  # [a, e] = d_a X^e
    dT = J.truncate(J.gradient(T.data, n), n, d)
    Tt = J.truncate(T.data, n, d)
    out = jtensordot(Xd, dT, ([0], [0]), n)
    r = T.rank
    for s, c in enumerate(T.variance):
        if c == "d":
            # T_{..e..} d_a X^e, with a in slot s
            term = jtensordot(Tt, dX, ([s], [1]), n)
        else:
            # -T^{..e..} d_e X^b, with b in slot s
            term = -jtensordot(Tt, dX, ([s], [0]), n)
        perm = list(range(s)) + [r - 1] + list(range(s, r - 1)) + [r]
        out = out + np.transpose(term, perm)
    return TensorValue(out, T.variance, n, T.point or X.point)


def _trace02(up: np.ndarray) -> np.ndarray:
    # R_bd = R^c_bcd: trace the first and third slots
    n = up.shape[0]
    out = up[0, :, 0, :].copy()
    for c in range(1, n):
        out = out + up[c, :, c, :]
    return out


# -- module-level conveniences ------------------------------------------------


def christoffel(g: MetricSpec, point, order: int = 0, mode: str = J.RATIONAL) -> TensorValue:
    return Geometry(g, point, order + 1, mode).christoffel()


def riemann(g: MetricSpec, point, jet_order: int = 0, mode: str = J.RATIONAL) -> TensorValue:
    return Geometry(g, point, jet_order + 2, mode).riemann()


def ricci_scalar(g: MetricSpec, point, mode: str = J.RATIONAL):
    return Geometry(g, point, 2, mode).ricci_scalar()[0]


def cov_derivative(T: TensorValue, g: MetricSpec, point, mode: str | None = None) -> TensorValue:
    mode = mode or T.mode
    return Geometry(g, point, T.order, mode).cov_derivative(T)


def lie_derivative(X: VectorFieldSpec, T: TensorValue, point, mode: str | None = None) -> TensorValue:
    """Lie derivative along a field spec; ``T`` must be a jet field at ``point``."""
    mode = mode or T.mode
    n = len(point)
    Xt = TensorValue(X.jets(point, T.order, mode), "u", n, tuple(J.to_scalar(x, mode) for x in point))
    return lie_derivative_jets(Xt, T)


def lie_bracket(X: VectorFieldSpec, Y: VectorFieldSpec, point, order: int = 1, mode: str = J.RATIONAL) -> TensorValue:
    n = len(point)
    pt = tuple(J.to_scalar(x, mode) for x in point)
    Xt = TensorValue(X.jets(pt, order, mode), "u", n, pt)
    Yt = TensorValue(Y.jets(pt, order, mode), "u", n, pt)
    return lie_derivative_jets(Xt, Yt)


def metric_jet_order_for(m: int, extra: int = 0) -> int:
    """Metric jet order needed for ``nabla^m Rm`` expanded to order ``extra``."""
    return m + 2 + extra
