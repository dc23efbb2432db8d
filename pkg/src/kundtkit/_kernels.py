"""Hot loops for truncated Taylor (jet) arithmetic.

Two implementations of every kernel live here: a numba ``@njit`` version
used for float64 data, and a pure-numpy version used for object arrays
(exact rationals) and whenever numba is switched off.  Set
``KUNDTKIT_NO_NUMBA=1`` in the environment to force the numpy path.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("KUNDTKIT_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("numba disabled by KUNDTKIT_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


def numba_enabled() -> bool:
    return HAVE_NUMBA


@njit(cache=True)
def _jmul_nb(a, b, pi, pj, pk, out):
    # a, b, out: (N, M); pairs (pi, pj) -> pk enumerate the truncated product
    for n in range(a.shape[0]):
        for t in range(pi.shape[0]):
            out[n, pk[t]] += a[n, pi[t]] * b[n, pj[t]]


@njit(cache=True)
def _jdot_nb(A, B, pi, pj, pk, out):
    # A: (Bt, P, K, M), B: (Bt, K, Q, M), out: (Bt, P, Q, M)
    nb, np_, nk, _ = A.shape
    nq = B.shape[2]
    nt = pi.shape[0]
    for b in range(nb):
        for p in range(np_):
            for k in range(nk):
                for q in range(nq):
                    for t in range(nt):
                        out[b, p, q, pk[t]] += A[b, p, k, pi[t]] * B[b, k, q, pj[t]]


def _jmul_np(a, b, prefix, targets, out):
    for i in range(a.shape[-1]):
        mi = prefix[i]
        out[..., targets[i]] += a[..., i : i + 1] * b[..., :mi]


def _jdot_np(A, B, prefix, targets, out):
    nb, np_, nk, m = A.shape
    nq = B.shape[2]
    for i in range(m):
        mi = prefix[i]
        block = np.matmul(A[..., i], B[..., :mi].reshape(nb, nk, nq * mi))
        out[..., targets[i]] += block.reshape(nb, np_, nq, mi)


def jmul_flat(a, b, basis, use_numba: bool | None = None):
    """Truncated product of two stacks of jets, both shaped ``(N, M)``."""
    if use_numba is None:
        use_numba = HAVE_NUMBA
    if a.dtype == object or b.dtype == object:
        out = np.zeros(a.shape, dtype=object)
        _jmul_np(a, b, basis.prefix, basis.targets, out)
        return out
    out = np.zeros(a.shape, dtype=np.float64)
    if use_numba:
        _jmul_nb(a, b, basis.pi, basis.pj, basis.pk, out)
    else:
        _jmul_np(a, b, basis.prefix, basis.targets, out)
    return out


def jdot_flat(A, B, basis, use_numba: bool | None = None):
    """Batched jet matrix product ``(Bt,P,K,M) x (Bt,K,Q,M) -> (Bt,P,Q,M)``."""
    if use_numba is None:
        use_numba = HAVE_NUMBA
    shape = (A.shape[0], A.shape[1], B.shape[2], A.shape[3])
    if A.dtype == object or B.dtype == object:
        out = np.zeros(shape, dtype=object)
        _jdot_np(A, B, basis.prefix, basis.targets, out)
        return out
    out = np.zeros(shape, dtype=np.float64)
    if use_numba:
        _jdot_nb(np.ascontiguousarray(A), np.ascontiguousarray(B), basis.pi, basis.pj, basis.pk, out)
    else:
        _jdot_np(A, B, basis.prefix, basis.targets, out)
    return out
