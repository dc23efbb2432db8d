"""Dense tensors at a point, optionally jet-valued, and boost-weight bookkeeping.

A :class:`TensorValue` stores its components as an array shaped
``(n,)*rank + (M,)`` where the trailing axis holds Taylor coefficients
(``M == 1`` for plain point values).  Slot variance is a string of ``"d"``
(covariant) and ``"u"`` (contravariant) characters.

Boost weights are measured against a null frame ``(k, l, m_1, ...)``: a
covariant slot filled with ``k`` weighs +1, with ``l`` weighs -1 and with any
``m_i`` weighs 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import jet as J
from .errors import ModeError, ShapeError, SingularMetricError, VarianceError

NEG_INFINITY = -math.inf
DEFAULT_ZERO_TOL = 1e-10


# ---------------------------------------------------------------------------
# jet-valued linear algebra


def jtensordot(a: np.ndarray, b: np.ndarray, axes, nvars: int) -> np.ndarray:
    """``np.tensordot`` for jet-valued arrays (jet axis last on both inputs)."""
    axes_a, axes_b = [list(x) for x in axes]
    ra, rb = a.ndim - 1, b.ndim - 1
    axes_a = [x % ra for x in axes_a] if ra else []
    axes_b = [x % rb for x in axes_b] if rb else []
    free_a = [i for i in range(ra) if i not in axes_a]
    free_b = [i for i in range(rb) if i not in axes_b]
    d = J.common_order(nvars, a, b)
    a = J.truncate(a, nvars, d)
    b = J.truncate(b, nvars, d)
    if a.dtype != b.dtype and (a.dtype == object or b.dtype == object):
        raise ModeError("cannot mix rational and float tensors")
    m = a.shape[-1]
    shape_free_a = [a.shape[i] for i in free_a]
    shape_free_b = [b.shape[i] for i in free_b]
    k = int(np.prod([a.shape[i] for i in axes_a], dtype=np.int64))
    p = int(np.prod(shape_free_a, dtype=np.int64))
    q = int(np.prod(shape_free_b, dtype=np.int64))
    at = np.transpose(a, free_a + axes_a + [ra]).reshape(1, p, k, m)
    bt = np.transpose(b, axes_b + free_b + [rb]).reshape(1, k, q, m)
    out = J.matmul(at, bt, nvars)
    return out.reshape(shape_free_a + shape_free_b + [m])


def matrix_inverse(m: np.ndarray) -> np.ndarray:
    """Inverse of a square matrix of plain scalars; exact Gauss-Jordan for rationals."""
    n = m.shape[0]
    if m.dtype != object:
        det = np.linalg.det(m)
        if det == 0 or not np.isfinite(det):
            raise SingularMetricError("matrix is singular")
        return np.linalg.inv(m)
    a = np.array(m, dtype=object)
    inv = J.zeros((n, n), J.RATIONAL)
    for i in range(n):
        inv[i, i] = J.mpq(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r, col] != 0), None)
        if pivot is None:
            raise SingularMetricError("matrix is singular")
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            inv[[col, pivot]] = inv[[pivot, col]]
        p = a[col, col]
        a[col] = a[col] / p
        inv[col] = inv[col] / p
        for r in range(n):
            if r != col and a[r, col] != 0:
                f = a[r, col]
                a[r] = a[r] - f * a[col]
                inv[r] = inv[r] - f * inv[col]
    return inv


def determinant(m: np.ndarray):
    if m.dtype != object:
        return float(np.linalg.det(m))
    a = np.array(m, dtype=object)
    n = a.shape[0]
    det = J.mpq(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r, col] != 0), None)
        if pivot is None:
            return J.mpq(0)
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            det = -det
        det = det * a[col, col]
        for r in range(col + 1, n):
            if a[r, col] != 0:
                a[r] = a[r] - (a[r, col] / a[col, col]) * a[col]
    return det


def jet_matrix_inverse(g: np.ndarray, nvars: int) -> np.ndarray:
    """Inverse of a jet-valued ``(n, n, M)`` matrix by a terminating Neumann series.

    With ``g = g0 + N`` (``N`` has no constant term) the series
    ``sum_k (-g0^-1 N)^k g0^-1`` stops after ``order`` terms.
    """
    d = J.order_of(nvars, g.shape[-1])
    g0inv = matrix_inverse(g[..., 0])
    g0inv_j = J.constant(g0inv, nvars, d, J.array_mode(g))
    if d == 0:
        return g0inv_j
    nil = g.copy()
    nil[..., 0] = 0
    step = -jtensordot(g0inv_j, nil, ([1], [0]), nvars)
    term = g0inv_j
    total = g0inv_j.copy()
    for _ in range(d):
        term = jtensordot(step, term, ([1], [0]), nvars)
        total = total + term
    return total


# ---------------------------------------------------------------------------
# tensors


@dataclass(frozen=True, eq=False)
class TensorValue:
    data: np.ndarray
    variance: str
    nvars: int
    point: tuple | None = None

    def __post_init__(self):
        r = len(self.variance)
        if self.data.ndim != r + 1:
            raise ShapeError(f"data of shape {self.data.shape} does not match rank {r}")
        if any(c not in "ud" for c in self.variance):
            raise VarianceError(f"bad variance string {self.variance!r}")
        if r and len(set(self.data.shape[:-1])) != 1:
            raise ShapeError(f"all slots must have the same dimension, got {self.data.shape[:-1]}")
        J.order_of(self.nvars, self.data.shape[-1])

    # -- construction -----------------------------------------------------
    @classmethod
    def from_values(cls, values, variance: str, mode: str, point=None, nvars: int | None = None) -> "TensorValue":
        values = np.asarray(values, dtype=object if mode == J.RATIONAL else None)
        if mode == J.RATIONAL:
            conv = np.empty(values.shape, dtype=object)
            for idx in np.ndindex(values.shape):
                conv[idx] = J.to_rational(values[idx])
            values = conv
        else:
            values = values.astype(np.float64)
        if nvars is None:
            nvars = values.shape[0] if values.ndim else (len(point) if point is not None else 0)
        return cls(values[..., None], variance, nvars, point)

    @classmethod
    def zeros(cls, dim: int, variance: str, mode: str, nvars: int, order: int = 0, point=None):
        return cls(J.zeros((dim,) * len(variance) + (J.jet_size(nvars, order),), mode), variance, nvars, point)

    # -- properties -------------------------------------------------------
    @property
    def rank(self) -> int:
        return len(self.variance)

    @property
    def dim(self) -> int:
        return self.data.shape[0] if self.rank else self.nvars

    @property
    def order(self) -> int:
        return J.order_of(self.nvars, self.data.shape[-1])

    @property
    def mode(self) -> str:
        return J.array_mode(self.data)

    @property
    def values(self) -> np.ndarray:
        return self.data[..., 0]

    def value_tensor(self) -> "TensorValue":
        return self.truncate(0)

    def truncate(self, order: int) -> "TensorValue":
        return TensorValue(J.truncate(self.data, self.nvars, order), self.variance, self.nvars, self.point)

    def is_zero(self, tol: float = 0.0) -> bool:
        if self.mode == J.RATIONAL or tol == 0:
            return J.is_zero_array(self.values)
        return bool(np.max(np.abs(self.values), initial=0.0) <= tol)

    def max_abs(self) -> float:
        v = self.values
        if v.size == 0:
            return 0.0
        return float(max(abs(float(x)) for x in v.reshape(-1)))

    # -- arithmetic -------------------------------------------------------
    def _same_kind(self, other: "TensorValue"):
        if not isinstance(other, TensorValue):
            raise TypeError("expected a TensorValue")
        if other.variance != self.variance:
            raise VarianceError(f"variance mismatch {self.variance} vs {other.variance}")
        if other.rank and self.rank and other.dim != self.dim:
            raise ShapeError("dimension mismatch")
        if other.mode != self.mode:
            raise ModeError("cannot mix rational and float tensors")

    def _binary(self, other, op):
        self._same_kind(other)
        d = min(self.order, other.order)
        a = J.truncate(self.data, self.nvars, d)
        b = J.truncate(other.data, self.nvars, d)
        return TensorValue(op(a, b), self.variance, self.nvars, self.point)

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __neg__(self):
        return TensorValue(-self.data, self.variance, self.nvars, self.point)

    def __mul__(self, c):
        if isinstance(c, TensorValue):
            raise TypeError("use tensor_product for tensor-tensor products")
        if self.mode == J.RATIONAL and isinstance(c, float):
            raise ModeError("cannot scale a rational tensor by a float")
        return TensorValue(self.data * J.to_scalar(c, self.mode), self.variance, self.nvars, self.point)

    __rmul__ = __mul__

    def scale_by(self, f: np.ndarray) -> "TensorValue":
        """Multiply every component by the scalar jet ``f``."""
        d = min(self.order, J.order_of(self.nvars, f.shape[-1]))
        data = J.mul(J.truncate(self.data, self.nvars, d), J.truncate(f, self.nvars, d), self.nvars)
        return TensorValue(data, self.variance, self.nvars, self.point)

    def permute(self, perm) -> "TensorValue":
        """Reorder slots: new slot i is old slot ``perm[i]``."""
        perm = list(perm)
        return TensorValue(
            np.transpose(self.data, perm + [self.rank]),
            "".join(self.variance[p] for p in perm),
            self.nvars,
            self.point,
        )

    def partial(self) -> "TensorValue":
        """Coordinate partial derivatives; the new (covariant) slot is first."""
        return TensorValue(J.gradient(self.data, self.nvars), "d" + self.variance, self.nvars, self.point)

    def component(self, *idx):
        return self.data[idx + (0,)]

    def __repr__(self) -> str:
        return f"TensorValue(rank={self.rank}, variance={self.variance!r}, order={self.order}, mode={self.mode})"


def _check_pair(a: TensorValue, b: TensorValue):
    if a.rank and b.rank and a.dim != b.dim:
        raise ShapeError(f"dimension mismatch {a.dim} vs {b.dim}")
    if a.mode != b.mode:
        raise ModeError("cannot mix rational and float tensors")
    if a.nvars != b.nvars:
        raise ShapeError("tensors expanded in different numbers of variables")


def tensor_product(a: TensorValue, b: TensorValue) -> TensorValue:
    _check_pair(a, b)
    ad = a.data.reshape(a.data.shape[:-1] + (1,) * b.rank + a.data.shape[-1:])
    bd = b.data.reshape((1,) * a.rank + b.data.shape)
    return TensorValue(J.mul(ad, bd, a.nvars), a.variance + b.variance, a.nvars, a.point or b.point)


def contract(a: TensorValue, i: int, j: int) -> TensorValue:
    """Trace over one contravariant and one covariant slot."""
    r = a.rank
    if not (0 <= i < r and 0 <= j < r) or i == j:
        raise ShapeError(f"invalid slot pair ({i}, {j}) for rank {r}")
    if a.variance[i] == a.variance[j]:
        raise VarianceError(f"slots {i} and {j} have the same variance {a.variance[i]!r}")
    data = np.diagonal(a.data, axis1=i, axis2=j).sum(axis=-1)
    var = "".join(c for s, c in enumerate(a.variance) if s not in (i, j))
    return TensorValue(data, var, a.nvars, a.point)


def contract_with(a: TensorValue, slots_a, b: TensorValue, slots_b) -> TensorValue:
    """Contract slots of ``a`` against slots of ``b``; free slots of ``a`` come first."""
    _check_pair(a, b)
    for sa, sb in zip(slots_a, slots_b):
        if a.variance[sa] == b.variance[sb]:
            raise VarianceError(f"cannot contract two {a.variance[sa]!r} slots")
    data = jtensordot(a.data, b.data, (list(slots_a), list(slots_b)), a.nvars)
    var = "".join(c for s, c in enumerate(a.variance) if s not in slots_a)
    var += "".join(c for s, c in enumerate(b.variance) if s not in slots_b)
    return TensorValue(data, var, a.nvars, a.point or b.point)


def apply_matrix(a: TensorValue, slot: int, m: TensorValue, new_variance: str) -> TensorValue:
    """Contract ``m``'s second slot into ``a``'s ``slot``, keeping slot order."""
    d = jtensordot(m.data, a.data, ([1], [slot]), a.nvars)
    # result has the new slot first; move it back into place
    perm = list(range(1, slot + 1)) + [0] + list(range(slot + 1, a.rank)) + [a.rank]
    data = np.transpose(d, perm)
    var = a.variance[:slot] + new_variance + a.variance[slot + 1 :]
    return TensorValue(data, var, a.nvars, a.point)


def raise_lower(a: TensorValue, slot: int, metric: TensorValue, inverse: TensorValue) -> TensorValue:
    """Apply the musical isomorphism on one slot (covariant slots are raised)."""
    if not 0 <= slot < a.rank:
        raise ShapeError(f"slot {slot} out of range for rank {a.rank}")
    if metric.variance != "dd" or inverse.variance != "uu":
        raise VarianceError("metric must be 'dd' and inverse 'uu'")
    if a.variance[slot] == "d":
        return apply_matrix(a, slot, inverse, "u")
    return apply_matrix(a, slot, metric, "d")


def lower_all(a: TensorValue, metric: TensorValue) -> TensorValue:
    for s, c in enumerate(a.variance):
        if c == "u":
            a = apply_matrix(a, s, metric, "d")
    return a


def raise_all(a: TensorValue, inverse: TensorValue) -> TensorValue:
    for s, c in enumerate(a.variance):
        if c == "d":
            a = apply_matrix(a, s, inverse, "u")
    return a


def full_contraction(a: TensorValue, pairs, inverse: TensorValue):
    """Contract a covariant tensor over slot ``pairs`` using the inverse metric."""
    if a.rank != 2 * len(pairs) or sorted(s for p in pairs for s in p) != list(range(a.rank)):
        raise ShapeError("pairs must form a perfect matching of the slots")
    cur = a
    # contract pairs in descending order of their largest slot so indices stay valid
    remaining = [tuple(p) for p in pairs]
    while remaining:
        i, j = remaining.pop(0)
        if cur.variance[i] == "d" and cur.variance[j] == "d":
            cur = apply_matrix(cur, i, inverse, "u")
        cur = contract(cur, i, j)
        remaining = [tuple(x - (x > i) - (x > j) for x in p) for p in remaining]
    return cur.data[..., 0] if cur.order == 0 else cur.data


# ---------------------------------------------------------------------------
# boost weights


def slot_weights(dim: int) -> np.ndarray:
    w = np.zeros(dim, dtype=np.int64)
    w[0], w[1] = 1, -1
    return w


def weight_grid(rank: int, dim: int) -> np.ndarray:
    """Boost weight of every frame component of a rank-``rank`` tensor."""
    w = slot_weights(dim)
    grid = np.zeros((dim,) * rank, dtype=np.int64)
    for s in range(rank):
        shape = [1] * rank
        shape[s] = dim
        grid = grid + w.reshape(shape)
    return grid


def _frame_matrix(frame) -> np.ndarray:
    return frame.matrix


def _check_frame(a: TensorValue, frame):
    if a.variance.count("u"):
        raise VarianceError("boost weights are defined here for covariant tensors; lower the tensor first")
    fm = _frame_matrix(frame)
    if a.rank and fm.shape[0] != a.dim:
        raise ShapeError("frame dimension does not match tensor")
    if J.array_mode(fm) != a.mode:
        raise ModeError("frame and tensor use different scalar modes")
    fp = getattr(frame, "point", None)
    if fp is not None and a.point is not None and len(fp) == len(a.point):
        if any(x != y for x, y in zip(fp, a.point)):
            raise ShapeError("frame and tensor live at different points")


def frame_components(a: TensorValue, frame) -> np.ndarray:
    """Values ``a(e_A, e_B, ...)`` with ``e = (k, l, m_1, ...)``."""
    _check_frame(a, frame)
    fm = _frame_matrix(frame)
    comp = a.values
    for _ in range(a.rank):
        # contract the leading coordinate slot and append the frame slot at the end
        comp = np.tensordot(comp, fm, axes=([0], [1]))
    return comp


def from_frame_components(comp: np.ndarray, frame) -> np.ndarray:
    """Inverse of :func:`frame_components` using the dual coframe."""
    cof = frame.coframe  # cof[A, a]: theta^A_a
    out = comp
    for _ in range(comp.ndim):
        out = np.tensordot(out, cof, axes=([0], [0]))
    return out


def zero_threshold(comp: np.ndarray, tol: float | None = None, floor: float = 1.0) -> float:
    if comp.dtype == object:
        return 0.0
    tol = DEFAULT_ZERO_TOL if tol is None else tol
    scale = float(np.max(np.abs(comp), initial=0.0))
    return tol * max(scale, floor)


def _nonzero(comp: np.ndarray, thr: float) -> np.ndarray:
    if comp.dtype == object:
        return comp != 0
    return np.abs(comp) > thr


@dataclass
class BoostDecomposition:
    """Frame-basis blocks keyed by boost weight."""

    blocks: dict[int, np.ndarray]
    rank: int
    frame: Any = field(repr=False)
    threshold: float = 0.0

    def block(self, s: int) -> np.ndarray:
        if s in self.blocks:
            return self.blocks[s]
        any_block = next(iter(self.blocks.values()))
        return np.zeros_like(any_block)

    def nonzero_weights(self) -> list[int]:
        return sorted(s for s, b in self.blocks.items() if np.any(_nonzero(b, self.threshold)))

    def order(self):
        ws = self.nonzero_weights()
        return max(ws) if ws else NEG_INFINITY

    def block_tensor(self, s: int, mode: str, nvars: int) -> TensorValue:
        """Block ``s`` transformed back to the coordinate basis."""
        return TensorValue(from_frame_components(self.block(s), self.frame)[..., None], "d" * self.rank, nvars)

    def reassemble(self) -> np.ndarray:
        total = sum(self.blocks.values())
        return from_frame_components(total, self.frame)


def boost_decompose(a: TensorValue, frame, tol: float | None = None) -> BoostDecomposition:
    comp = frame_components(a, frame)
    grid = weight_grid(a.rank, comp.shape[0] if a.rank else 0)
    blocks = {}
    zero = comp * 0
    for s in range(-a.rank, a.rank + 1):
        mask = grid == s
        if np.any(mask):
            blocks[s] = np.where(mask, comp, zero)
    if a.rank == 0:
        blocks = {0: comp}
    return BoostDecomposition(blocks, a.rank, frame, zero_threshold(comp, tol))


def boost_order(a: TensorValue, frame, tol: float | None = None):
    """Largest boost weight with a nonzero frame component, or ``NEG_INFINITY``."""
    comp = frame_components(a, frame)
    thr = zero_threshold(comp, tol)
    nz = _nonzero(comp, thr)
    if not np.any(nz):
        return NEG_INFINITY
    if a.rank == 0:
        return 0
    return int(np.max(weight_grid(a.rank, comp.shape[0])[nz]))


def components_above(a: TensorValue, frame, s) -> np.ndarray:
    """Frame components whose boost weight exceeds ``s`` (others zeroed)."""
    comp = frame_components(a, frame)
    if a.rank == 0:
        return comp if s < 0 else comp * 0
    grid = weight_grid(a.rank, comp.shape[0])
    return np.where(grid > s, comp, comp * 0)


def residual_norm(comp: np.ndarray):
    """Max absolute entry; exact for rationals."""
    if comp.size == 0:
        return J.mpq(0) if comp.dtype == object else 0.0
    if comp.dtype == object:
        return max(abs(x) for x in comp.reshape(-1))
    return float(np.max(np.abs(comp)))


def block_contraction(a: TensorValue, frame, pairs, inverse: TensorValue, s: int = 0, tol: float | None = None):
    """Full contraction of the boost-weight-``s`` block of ``a``.

    For a type II tensor the weight-0 block carries the whole trace: every
    other block pairs a ``k`` slot with a ``k`` slot or an ``l`` slot with
    an ``l`` slot somewhere and contracts to zero.
    """
    dec = boost_decompose(a, frame, tol)
    return full_contraction(dec.block_tensor(s, a.mode, a.nvars), pairs, inverse)
