"""Truncated multivariate Taylor expansions ("jets").

A jet of order ``D`` in ``n`` variables is stored as a coefficient vector
indexed by the multi-indices of total degree at most ``D``.  Coefficient
``c[alpha]`` equals ``d^alpha f / alpha!`` at the base point.  Monomials are
graded by degree, so truncating to a lower order is a prefix slice.

Arrays of jets (tensors whose components are jets) simply carry the
coefficient axis last; all helpers below broadcast over leading axes.

Scalars are either exact rationals (``gmpy2.mpq`` in object arrays) or
float64.  The two are never mixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement

import gmpy2
import numpy as np

from . import _kernels
from .errors import EvaluationError, JetOrderError, ModeError, ShapeError

RATIONAL = "rational"
FLOAT = "float"
MODES = (RATIONAL, FLOAT)

mpq = gmpy2.mpq


def to_rational(x) -> "gmpy2.mpq":
    """Exact rational from int, Fraction, mpq, decimal/fraction string or float."""
    if isinstance(x, str):
        s = x.strip()
        try:
            return mpq(Fraction(s))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {x!r}") from exc
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, (np.floating, float)):
        if not math.isfinite(x):
            raise ValueError(f"not a finite number: {x!r}")
        return mpq(Fraction(float(x)))
    if isinstance(x, np.integer):
        return mpq(int(x))
    return mpq(x)


def to_scalar(x, mode: str):
    if mode == RATIONAL:
        return to_rational(x)
    if mode == FLOAT:
        if isinstance(x, str):
            return float(Fraction(x.strip()))
        return float(x)
    raise ModeError(f"unknown scalar mode {mode!r}")


def dtype_for(mode: str):
    if mode == RATIONAL:
        return object
    if mode == FLOAT:
        return np.float64
    raise ModeError(f"unknown scalar mode {mode!r}")


def zeros(shape, mode: str) -> np.ndarray:
    if mode == RATIONAL:
        out = np.empty(shape, dtype=object)
        out.fill(mpq(0))
        return out
    return np.zeros(shape, dtype=np.float64)


def array_mode(a: np.ndarray) -> str:
    return RATIONAL if a.dtype == object else FLOAT


def is_zero_array(a: np.ndarray) -> bool:
    return not np.any(a != 0)


def jet_size(nvars: int, order: int) -> int:
    return math.comb(nvars + order, nvars)


def order_of(nvars: int, m: int) -> int:
    d = 0
    while jet_size(nvars, d) < m:
        d += 1
    if jet_size(nvars, d) != m:
        raise ShapeError(f"{m} coefficients is not a complete jet in {nvars} variables")
    return d


class JetBasis:
    """Monomial bookkeeping for jets of a fixed order and number of variables."""

    def __init__(self, nvars: int, order: int):
        if order < 0:
            raise JetOrderError("jet order must be non-negative")
        self.nvars = nvars
        self.order = order
        monos: list[tuple[int, ...]] = []
        for deg in range(order + 1):
            block = []
            for combo in combinations_with_replacement(range(nvars), deg):
                alpha = [0] * nvars
                for v in combo:
                    alpha[v] += 1
                block.append(tuple(alpha))
            block.sort(reverse=True)
            monos.extend(block)
        self.monomials = monos
        self.index = {m: i for i, m in enumerate(monos)}
        self.size = len(monos)
        self.degrees = np.array([sum(m) for m in monos], dtype=np.int64)
        self.factorials = [math.prod(math.factorial(a) for a in m) for m in monos]

        prefix = np.zeros(self.size, dtype=np.int64)
        targets = []
        pi, pj, pk = [], [], []
        for i, a in enumerate(monos):
            mi = jet_size(nvars, order - sum(a))
            prefix[i] = mi
            tgt = np.empty(mi, dtype=np.int64)
            for j in range(mi):
                b = monos[j]
                k = self.index[tuple(x + y for x, y in zip(a, b))]
                tgt[j] = k
                pi.append(i)
                pj.append(j)
                pk.append(k)
            targets.append(tgt)
        self.prefix = prefix
        self.targets = targets
        self.pi = np.array(pi, dtype=np.int64)
        self.pj = np.array(pj, dtype=np.int64)
        self.pk = np.array(pk, dtype=np.int64)

        # d/dx_v maps order-D coefficients onto order-(D-1) coefficients
        self.deriv_src = []
        self.deriv_fac = []
        lower = jet_size(nvars, order - 1) if order > 0 else 0
        for v in range(nvars):
            src = np.empty(lower, dtype=np.int64)
            fac = np.empty(lower, dtype=np.int64)
            for j in range(lower):
                beta = list(monos[j])
                fac[j] = beta[v] + 1
                beta[v] += 1
                src[j] = self.index[tuple(beta)]
            self.deriv_src.append(src)
            self.deriv_fac.append(fac)


@lru_cache(maxsize=None)
def basis(nvars: int, order: int) -> JetBasis:
    return JetBasis(nvars, order)


# ---------------------------------------------------------------------------
# array-level operations (coefficient axis last)


def truncate(a: np.ndarray, nvars: int, order: int) -> np.ndarray:
    m = jet_size(nvars, order)
    if a.shape[-1] < m:
        raise JetOrderError(f"cannot raise jet order {order_of(nvars, a.shape[-1])} to {order}")
    return a[..., :m]


def common_order(nvars: int, *arrays: np.ndarray) -> int:
    return min(order_of(nvars, a.shape[-1]) for a in arrays)


def _check_modes(*arrays):
    modes = {array_mode(a) for a in arrays}
    if len(modes) > 1:
        raise ModeError("cannot mix rational and float jets")


def constant(values, nvars: int, order: int, mode: str) -> np.ndarray:
    values = np.asarray(values, dtype=dtype_for(mode))
    out = zeros(values.shape + (jet_size(nvars, order),), mode)
    out[..., 0] = values
    return out


def variable(i: int, point, order: int, mode: str) -> np.ndarray:
    nvars = len(point)
    out = zeros((jet_size(nvars, order),), mode)
    out[0] = to_scalar(point[i], mode)
    if order >= 1:
        out[basis(nvars, order).index[tuple(int(j == i) for j in range(nvars))]] = to_scalar(1, mode)
    return out


def mul(a: np.ndarray, b: np.ndarray, nvars: int) -> np.ndarray:
    """Elementwise truncated product with numpy broadcasting on leading axes."""
    _check_modes(a, b)
    d = common_order(nvars, a, b)
    a = truncate(a, nvars, d)
    b = truncate(b, nvars, d)
    if d == 0:
        return a * b
    shape = np.broadcast_shapes(a.shape, b.shape)
    af = np.broadcast_to(a, shape).reshape(-1, shape[-1])
    bf = np.broadcast_to(b, shape).reshape(-1, shape[-1])
    if af.dtype != object:
        af = np.ascontiguousarray(af)
        bf = np.ascontiguousarray(bf)
    return _kernels.jmul_flat(af, bf, basis(nvars, d)).reshape(shape)


def matmul(A: np.ndarray, B: np.ndarray, nvars: int) -> np.ndarray:
    """Jet-valued batched matrix product ``(Bt,P,K,M) x (Bt,K,Q,M)``."""
    _check_modes(A, B)
    d = common_order(nvars, A, B)
    A = truncate(A, nvars, d)
    B = truncate(B, nvars, d)
    if d == 0:
        return np.matmul(A[..., 0], B[..., 0])[..., None]
    return _kernels.jdot_flat(A, B, basis(nvars, d))


def diff(a: np.ndarray, var: int, nvars: int) -> np.ndarray:
    d = order_of(nvars, a.shape[-1])
    if d == 0:
        raise JetOrderError("cannot differentiate an order-0 jet")
    b = basis(nvars, d)
    fac = b.deriv_fac[var]
    if a.dtype == object:
        fac = fac.astype(object)
    return a[..., b.deriv_src[var]] * fac


def gradient(a: np.ndarray, nvars: int) -> np.ndarray:
    """Stack of partial derivatives; the new derivative axis goes first."""
    return np.stack([diff(a, v, nvars) for v in range(nvars)])


def _nilpotent_part(a):
    t = a.copy()
    t[..., 0] = 0
    return t


def compose(a: np.ndarray, coeffs: list, nvars: int) -> np.ndarray:
    """Evaluate ``sum_k coeffs[k] * (a - a0)^k`` truncated at the jet order."""
    d = order_of(nvars, a.shape[-1])
    t = _nilpotent_part(a)
    out = zeros(a.shape, array_mode(a))
    out[..., 0] = coeffs[0]
    power = t
    for k in range(1, d + 1):
        out = out + np.asarray(coeffs[k])[..., None] * power
        if k < d:
            power = mul(power, t, nvars)
    return out


def reciprocal(a: np.ndarray, nvars: int, where: str = "") -> np.ndarray:
    a0 = a[..., 0]
    if np.any(a0 == 0):
        raise EvaluationError("division by zero", where)
    d = order_of(nvars, a.shape[-1])
    inv = 1 / a0
    coeffs = [inv]
    c = inv
    for _ in range(d):
        c = -c * inv
        coeffs.append(c)
    return compose(a, coeffs, nvars)


def _exact_sqrt(q):
    q = mpq(q)
    num, den = q.numerator, q.denominator
    if num < 0 or not (gmpy2.is_square(num) and gmpy2.is_square(den)):
        return None
    return mpq(gmpy2.isqrt(num), gmpy2.isqrt(den))


def sqrt(a: np.ndarray, nvars: int, where: str = "") -> np.ndarray:
    a0 = a[..., 0]
    if np.any(a0 <= 0):
        raise EvaluationError("square root of a non-positive value", where)
    d = order_of(nvars, a.shape[-1])
    if a.dtype == object:
        flat = [_exact_sqrt(x) for x in a0.reshape(-1)]
        if any(r is None for r in flat):
            raise ModeError(f"square root is not rational{' in ' + where if where else ''}; use float mode")
        root = np.empty(a0.shape, dtype=object)
        root.reshape(-1)[:] = flat
        half = mpq(1, 2)
    else:
        root = np.sqrt(a0)
        half = 0.5
    coeffs = []
    binom = 1 if a.dtype != object else mpq(1)
    inv = 1 / a0
    scale = root
    for k in range(d + 1):
        coeffs.append(binom * scale)
        binom = binom * (half - k) / (k + 1)
        scale = scale * inv
    return compose(a, coeffs, nvars)


def _require_float(a, name, where):
    if a.dtype == object:
        raise ModeError(f"{name} is not available in rational mode{' (' + where + ')' if where else ''}")


def exp(a: np.ndarray, nvars: int, where: str = "") -> np.ndarray:
    _require_float(a, "exp", where)
    d = order_of(nvars, a.shape[-1])
    e0 = np.exp(a[..., 0])
    return compose(a, [e0 / math.factorial(k) for k in range(d + 1)], nvars)


def log(a: np.ndarray, nvars: int, where: str = "") -> np.ndarray:
    _require_float(a, "ln", where)
    a0 = a[..., 0]
    if np.any(a0 <= 0):
        raise EvaluationError("logarithm of a non-positive value", where)
    d = order_of(nvars, a.shape[-1])
    coeffs = [np.log(a0)] + [(-1) ** (k + 1) / (k * a0**k) for k in range(1, d + 1)]
    return compose(a, coeffs, nvars)


def _trig(a, nvars, start):
    d = order_of(nvars, a.shape[-1])
    s, c = np.sin(a[..., 0]), np.cos(a[..., 0])
    cycle = [s, c, -s, -c]
    return compose(a, [cycle[(start + k) % 4] / math.factorial(k) for k in range(d + 1)], nvars)


def sin(a: np.ndarray, nvars: int, where: str = "") -> np.ndarray:
    _require_float(a, "sin", where)
    return _trig(a, nvars, 0)


def cos(a: np.ndarray, nvars: int, where: str = "") -> np.ndarray:
    _require_float(a, "cos", where)
    return _trig(a, nvars, 1)


def power(a: np.ndarray, p: int, nvars: int, where: str = "") -> np.ndarray:
    if p < 0:
        return power(reciprocal(a, nvars, where), -p, nvars, where)
    result = None
    base = a
    while p:
        if p & 1:
            result = base if result is None else mul(result, base, nvars)
        p >>= 1
        if p:
            base = mul(base, base, nvars)
    if result is None:
        result = zeros(a.shape, array_mode(a))
        result[..., 0] = 1
    return result


# ---------------------------------------------------------------------------
# scalar jets


@dataclass(frozen=True, eq=False)
class Jet:
    """A single truncated Taylor expansion at ``point``.

    ``coeffs[i]`` is the Taylor coefficient of the i-th monomial of
    ``basis(len(point), order)``; use :meth:`partial` for raw derivatives.
    """

    point: tuple
    order: int
    mode: str
    coeffs: np.ndarray

    @property
    def nvars(self) -> int:
        return len(self.point)

    @property
    def value(self):
        return self.coeffs[0]

    @classmethod
    def constant(cls, c, point, order: int, mode: str) -> "Jet":
        point = tuple(to_scalar(x, mode) for x in point)
        return cls(point, order, mode, constant(to_scalar(c, mode), len(point), order, mode))

    @classmethod
    def variable(cls, i: int, point, order: int, mode: str) -> "Jet":
        point = tuple(to_scalar(x, mode) for x in point)
        return cls(point, order, mode, variable(i, point, order, mode))

    def coefficient(self, alpha) -> object:
        alpha = tuple(alpha)
        if sum(alpha) > self.order:
            raise JetOrderError(f"multi-index {alpha} exceeds jet order {self.order}")
        return self.coeffs[basis(self.nvars, self.order).index[alpha]]

    def partial(self, alpha):
        """Raw partial derivative ``d^alpha f`` at the base point."""
        c = self.coefficient(alpha)
        fac = math.prod(math.factorial(a) for a in alpha)
        return c * fac

    def coefficient_table(self) -> dict:
        return {m: self.coeffs[i] for i, m in enumerate(basis(self.nvars, self.order).monomials)}

    def _wrap(self, coeffs) -> "Jet":
        return Jet(self.point, self.order, self.mode, coeffs)

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, Jet):
            if other.mode != self.mode:
                raise ModeError("cannot combine rational and float jets")
            if other.order != self.order or other.nvars != self.nvars:
                raise ShapeError("jets must share order and number of variables")
            if any(a != b for a, b in zip(other.point, self.point)):
                raise ShapeError("jets must share the base point")
            return other.coeffs
        if self.mode == RATIONAL and isinstance(other, float):
            raise ModeError("cannot combine a rational jet with a float")
        return constant(to_scalar(other, self.mode), self.nvars, self.order, self.mode)

    def __add__(self, other):
        return self._wrap(self.coeffs + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.coeffs - self._coerce(other))

    def __rsub__(self, other):
        return self._wrap(self._coerce(other) - self.coeffs)

    def __neg__(self):
        return self._wrap(-self.coeffs)

    def __mul__(self, other):
        return self._wrap(mul(self.coeffs, self._coerce(other), self.nvars))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(mul(self.coeffs, reciprocal(self._coerce(other), self.nvars), self.nvars))

    def __rtruediv__(self, other):
        return self._wrap(mul(self._coerce(other), reciprocal(self.coeffs, self.nvars), self.nvars))

    def __pow__(self, p: int):
        if not isinstance(p, (int, np.integer)):
            raise TypeError("jets support integer powers only")
        return self._wrap(power(self.coeffs, int(p), self.nvars))

    def __repr__(self) -> str:
        return f"Jet(order={self.order}, mode={self.mode}, value={self.value!r})"
