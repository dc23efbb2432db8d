"""Independent curvature oracle: central finite differences in high-precision decimals.

Nothing here imports the jet machinery.  A metric is a callable taking a tuple of
``Decimal`` coordinates and returning an ``n x n`` nested list of ``Decimal``.
With 60 significant digits and a step of 1e-15 the truncation error is about
1e-30 and rounding about 1e-30, far below any tolerance used in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction

PREC = 60
STEP = Decimal("1e-15")


def dsin(x: Decimal) -> Decimal:
    """Taylor series for sine; fine for the |x| < 4 used here."""
    term, total, k = x, x, 1
    eps = Decimal(10) ** (-PREC - 5)
    while abs(term) > eps:
        term = -term * x * x / ((2 * k) * (2 * k + 1))
        total += term
        k += 1
    return total


def inverse(m):
    n = len(m)
    a = [list(row) + [Decimal(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        piv = max(range(c, n), key=lambda r: abs(a[r][c]))
        a[c], a[piv] = a[piv], a[c]
        p = a[c][c]
        a[c] = [x / p for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [row[n:] for row in a]


def to_decimal(v) -> Decimal:
    if isinstance(v, Decimal):
        return v
    q = Fraction(v) if not isinstance(v, str) else Fraction(v)
    return Decimal(q.numerator) / Decimal(q.denominator)


@dataclass
class Curvature:
    g: list
    ginv: list
    riemann: list  # R_abcd = g_ae R^e_bcd
    ricci: list
    scalar: Decimal
    kretschmann: Decimal


def _shift(x, steps):
    y = list(x)
    for c, s in steps:
        y[c] += s * STEP
    return tuple(y)


def curvature(metric, x) -> Curvature:
    with localcontext() as ctx:
        ctx.prec = PREC
        x = tuple(to_decimal(v) for v in x)
        n = len(x)
        R = range(n)
        g0 = metric(x)
        plus = [metric(_shift(x, [(c, 1)])) for c in R]
        minus = [metric(_shift(x, [(c, -1)])) for c in R]
        h = STEP
        dg = [[[(plus[c][a][b] - minus[c][a][b]) / (2 * h) for b in R] for a in R] for c in R]
        ddg = [[None] * n for _ in R]
        for c in R:
            ddg[c][c] = [[(plus[c][a][b] - 2 * g0[a][b] + minus[c][a][b]) / (h * h) for b in R] for a in R]
            for d in range(c + 1, n):
                pp = metric(_shift(x, [(c, 1), (d, 1)]))
                pm = metric(_shift(x, [(c, 1), (d, -1)]))
                mp = metric(_shift(x, [(c, -1), (d, 1)]))
                mm = metric(_shift(x, [(c, -1), (d, -1)]))
                blk = [[(pp[a][b] - pm[a][b] - mp[a][b] + mm[a][b]) / (4 * h * h) for b in R] for a in R]
                ddg[c][d] = ddg[d][c] = blk
        gi = inverse(g0)
        # first-kind symbols G[d][b][c] and their derivatives dG[e][d][b][c]
        G = [[[(dg[b][d][c] + dg[c][d][b] - dg[d][b][c]) / 2 for c in R] for b in R] for d in R]
        dG = [[[[(ddg[e][b][d][c] + ddg[e][c][d][b] - ddg[e][d][b][c]) / 2 for c in R] for b in R] for d in R] for e in R]
        dgi = [[[-sum(gi[a][i] * dg[e][i][j] * gi[j][d] for i in R for j in R) for d in R] for a in R] for e in R]
        Gam = [[[sum(gi[a][d] * G[d][b][c] for d in R) for c in R] for b in R] for a in R]
        dGam = [
            [[[sum(dgi[e][a][d] * G[d][b][c] + gi[a][d] * dG[e][d][b][c] for d in R) for c in R] for b in R] for a in R]
            for e in R
        ]
        Rup = [[[[dGam[c][a][d][b] - dGam[d][a][c][b] + sum(Gam[a][c][e] * Gam[e][d][b] - Gam[a][d][e] * Gam[e][c][b] for e in R) for d in R] for c in R] for b in R] for a in R]
        Rdn = [[[[sum(g0[a][e] * Rup[e][b][c][d] for e in R) for d in R] for c in R] for b in R] for a in R]
        Ric = [[sum(Rup[c][b][c][d] for c in R) for d in R] for b in R]
        scalar = sum(gi[b][d] * Ric[b][d] for b in R for d in R)
        # R^abcd by raising each slot in turn
        up = Rdn
        for slot in range(4):
            new = [[[[Decimal(0)] * n for _ in R] for _ in R] for _ in R]
            for i in R:
                for j in R:
                    for k in R:
                        for m in R:
                            idx = [i, j, k, m]
                            s = Decimal(0)
                            for e in R:
                                src = list(idx)
                                src[slot] = e
                                s += gi[idx[slot]][e] * up[src[0]][src[1]][src[2]][src[3]]
                            new[i][j][k][m] = s
            up = new
        kret = sum(Rdn[i][j][k][m] * up[i][j][k][m] for i in R for j in R for k in R for m in R)
        return Curvature(g0, gi, Rdn, Ric, scalar, kret)


def schwarzschild(mass=1):
    """Static-coordinate metric (t, r, theta, phi) as a decimal callable."""
    M = Decimal(mass)

    def metric(x):
        _, r, th, _ = x
        f = 1 - 2 * M / r
        s = dsin(th)
        z = Decimal(0)
        return [[-f, z, z, z], [z, 1 / f, z, z], [z, z, r * r, z], [z, z, z, r * r * s * s]]

    return metric


def from_fractions(fn):
    """Wrap a callable on exact ``Fraction`` coordinates returning rational entries."""

    def metric(x):
        vals = fn(tuple(Fraction(v) for v in x))
        return [[Decimal(int(q.numerator)) / Decimal(int(q.denominator)) for q in row] for row in vals]

    return metric


def t_derivative(metric_at_t, x, dt: Fraction):
    """Central difference in t of the scalar curvature and the Riemann tensor."""
    a = curvature(metric_at_t(dt), x)
    b = curvature(metric_at_t(-dt), x)
    with localcontext() as ctx:
        ctx.prec = PREC
        d = Decimal(dt.numerator) / Decimal(dt.denominator)
        dR = (a.scalar - b.scalar) / (2 * d)
        n = len(a.g)
        dRm = [[[[(a.riemann[i][j][k][m] - b.riemann[i][j][k][m]) / (2 * d) for m in range(n)] for k in range(n)] for j in range(n)] for i in range(n)]
    return dR, dRm
