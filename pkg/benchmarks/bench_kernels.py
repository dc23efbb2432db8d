"""Compare the numba and numpy jet kernels, and an end-to-end float curvature run.

    python benchmarks/bench_kernels.py [--repeat 5] [--order 5]

The end-to-end timing runs each backend in a subprocess because the
KUNDTKIT_NO_NUMBA switch is read at import time.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from kundtkit import jet as J
from kundtkit import _kernels

END_TO_END = """
import time
from kundtkit import catalog, jet as J
from kundtkit.spi import generate_invariants, spi_report
doc = catalog.get("nonconstant-h2")
pts = doc.points(J.FLOAT)
spi_report(doc.metric, pts[:1], generate_invariants(2, 3), J.FLOAT)  # warm-up / compile
t0 = time.perf_counter()
for _ in range({repeat}):
    spi_report(doc.metric, pts, generate_invariants(2, 3), J.FLOAT)
print((time.perf_counter() - t0) / {repeat})
"""


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_rows(order: int, repeat: int, batch: int):
    rng = np.random.default_rng(0)
    b = J.basis(4, order)
    A = rng.normal(size=(batch, b.size))
    B = rng.normal(size=(batch, b.size))
    M1 = rng.normal(size=(batch // 16 or 1, 4, 4, b.size))
    M2 = rng.normal(size=(batch // 16 or 1, 4, 4, b.size))
    # compile once outside the timings
    _kernels.jmul_flat(A[:2], B[:2], b, use_numba=True)
    _kernels.jdot_flat(M1[:1], M2[:1], b, use_numba=True)
    rows = []
    for name, fn in (
        ("jmul", lambda nb: _kernels.jmul_flat(A, B, b, use_numba=nb)),
        ("jdot", lambda nb: _kernels.jdot_flat(M1, M2, b, use_numba=nb)),
    ):
        t_nb = best_of(lambda: fn(True), repeat)
        t_np = best_of(lambda: fn(False), repeat)
        assert np.allclose(fn(True), fn(False))
        rows.append((f"{name} order {order} (4 vars, {b.size} coeffs)", t_nb, t_np))
    return rows


def end_to_end(repeat: int, disable: bool) -> float:
    env = dict(os.environ)
    if disable:
        env["KUNDTKIT_NO_NUMBA"] = "1"
    else:
        env.pop("KUNDTKIT_NO_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", END_TO_END.format(repeat=repeat)], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--order", type=int, nargs="+", default=[3, 5])
    ap.add_argument("--batch", type=int, default=2048)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args(argv)
    if not _kernels.numba_enabled():
        print("numba is disabled or missing; both columns use numpy")
    print(f"{'case':44s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s}")
    rows = []
    for order in args.order:
        rows += kernel_rows(order, args.repeat, args.batch)
    if not args.skip_end_to_end:
        rows.append(("spi slice m<=2 p<=3, 5 points (float)", end_to_end(2, False), end_to_end(2, True)))
    for name, t_nb, t_np in rows:
        print(f"{name:44s} {1e3 * t_nb:11.2f} {1e3 * t_np:11.2f} {t_np / t_nb:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
